//! Density-matrix simulator for conditional spin-flip pulses on
//! Ising-coupled spin-1/2 clusters.
//!
//! The model: `n` spin-1/2 nuclei in a strong field gradient (one Larmor
//! frequency per spin) with uniform pairwise Ising coupling, driven by a
//! rectangular transverse RF pulse and described in the frame rotating at
//! the drive frequency. What is simulated is not a wave function but the
//! *deviation* part of a high-temperature ensemble density matrix — the
//! traceless departure from the fully mixed state, which carries all the
//! observable dynamics — propagated through the commutator equation of
//! motion `i dr/dt = [H, r]`.
//!
//! The crate is organized in four layers:
//!
//! * [`operators`] — basis bookkeeping, spin operators, and the
//!   rotating-frame Hamiltonian;
//! * [`states`] — initial deviation matrices: a four-spin thermal ensemble
//!   whose two-qubit register (the *active* states) is prepared digitally or
//!   in a superposition;
//! * [`evolution`] — two independent propagation routes: a fixed-step RK4
//!   integrator over all matrix elements and an eigendecomposition-based
//!   exact propagator used as a cross-check oracle;
//! * [`gate`] — conditional-flip (Control-Not) semantics: resonance
//!   selection, π-pulse execution, truth-table verification with explicit
//!   tolerances.
//!
//! Everything is generic over the real scalar type through the [`Real`]
//! trait, so the full pipeline runs in `f32` or `f64`; the aliases at the
//! crate root pin the `f64` production types.
//!
//! # Example: verify the conditional flip on the reference cluster
//!
//! ```
//! use cnsim_core::gate::run_cn_gate;
//! use cnsim_core::operators::SpinSystemConfig;
//! use cnsim_core::states::digital_active;
//!
//! // four spins at 100/200/300/400, coupling 10, drive amplitude 0.1,
//! // drive frequency 130 = the conditional resonance of spin 0
//! let cfg: SpinSystemConfig<f64> = SpinSystemConfig::default();
//! let report = run_cn_gate(&cfg, &digital_active(0)?, 2e-3)?;
//! assert!(report.passed);
//! // the pulse moved the register population from state |0000> to |0001>
//! assert!(report.final_populations[1] > 0.999);
//! # Ok::<(), cnsim_core::Error>(())
//! ```

#![warn(missing_docs)]

pub mod evolution;
pub mod gate;
pub mod operators;
pub mod states;

mod error;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Single-precision complex number.
pub type C32 = num_complex::Complex<f32>;
/// Double-precision complex number.
pub type C64 = num_complex::Complex<f64>;

/// Double-precision spin-system configuration (the production scalar).
pub type SpinSystemConfig64 = operators::SpinSystemConfig<f64>;
/// Double-precision dense operator.
pub type OperatorMatrix64 = operators::OperatorMatrix<f64>;
/// Double-precision deviation density matrix.
pub type DeviationMatrix64 = states::DeviationMatrix<f64>;
/// Double-precision active register block.
pub type ActiveBlock64 = states::ActiveBlock<f64>;
/// Double-precision pulse description.
pub type PulseSpec64 = evolution::PulseSpec<f64>;
/// Double-precision sampled trajectory.
pub type TimeSeries64 = evolution::TimeSeries<f64>;
/// Double-precision gate verdict.
pub type GateReport64 = gate::GateReport<f64>;
