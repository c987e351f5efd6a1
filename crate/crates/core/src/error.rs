//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building operators, preparing states,
/// propagating, or checking a gate.
#[derive(Debug, Error)]
pub enum Error {
    /// A spin-system parameter set violates its constraints.
    #[error("invalid spin system configuration: {reason}")]
    InvalidConfig {
        /// Human-readable description of the violated constraint.
        reason: String,
    },

    /// A spin index addressed a spin that does not exist.
    #[error("spin index {index} out of range for {n_spins} spins")]
    SpinIndexOutOfRange {
        /// The offending spin index.
        index: usize,
        /// Number of spins in the cluster.
        n_spins: usize,
    },

    /// A basis-state index addressed a state outside the Hilbert space.
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndexOutOfRange {
        /// The offending basis index.
        index: usize,
        /// Hilbert-space dimension.
        dim: usize,
    },

    /// A computational-subspace state label outside 0..=3 was requested.
    #[error("active-state index {index} out of range (the computational subspace has 4 states)")]
    ActiveIndexOutOfRange {
        /// The offending register index.
        index: usize,
    },

    /// Superposition amplitudes whose squared magnitudes do not sum to one.
    #[error("amplitudes are not normalized: their norm is {norm}")]
    UnnormalizedAmplitudes {
        /// Euclidean norm of the supplied amplitude vector.
        norm: f64,
    },

    /// An active block that is not Hermitian or not normalized to unit trace.
    #[error("invalid active block: {reason} (residue {residue:.3e})")]
    InvalidActiveBlock {
        /// Which invariant was violated.
        reason: &'static str,
        /// Size of the violation.
        residue: f64,
    },

    /// The ensemble deviation layout is defined for four-spin systems only.
    #[error("this operation requires a 4-spin system, got {n_spins} spins")]
    RequiresFourSpins {
        /// Number of spins in the offending cluster.
        n_spins: usize,
    },

    /// A matrix expected to be Hermitian was not.
    #[error("matrix is not Hermitian: max |M - M^H| element is {residue:.3e}")]
    NotHermitian {
        /// Largest elementwise magnitude of `M - M^H`.
        residue: f64,
    },

    /// A matrix with an unexpected shape was supplied.
    #[error("bad matrix dimension: expected {expected}, got {actual}")]
    DimensionMismatch {
        /// Dimension required by the operation.
        expected: usize,
        /// Dimension actually supplied.
        actual: usize,
    },

    /// A non-positive or non-finite time step.
    #[error("time step must be positive and finite, got {dt}")]
    InvalidTimeStep {
        /// The rejected step.
        dt: f64,
    },

    /// A non-positive or non-finite evolution time.
    #[error("duration must be positive and finite, got {duration}")]
    InvalidDuration {
        /// The rejected duration.
        duration: f64,
    },

    /// A Rabi frequency that cannot define a pi pulse.
    #[error("Rabi frequency must be positive to define a pi pulse, got {rabi}")]
    InvalidRabi {
        /// The rejected drive amplitude.
        rabi: f64,
    },

    /// The integrator produced a NaN or infinite entry.
    #[error("numerical blow-up: non-finite matrix entry after step {step}")]
    NumericalBlowup {
        /// Index of the step after which the state stopped being finite.
        step: usize,
    },

    /// The Hermitian eigensolver did not converge.
    #[error("eigendecomposition of the Hamiltonian failed to converge")]
    EigendecompositionFailed,

    /// Diagonal entries carried a non-negligible imaginary part.
    #[error("populations are not real: max imaginary residue is {residue:.3e}")]
    NonRealPopulations {
        /// Largest imaginary magnitude found on the diagonal.
        residue: f64,
    },

    /// The drive frequency does not match the conditional-flip resonance.
    #[error(
        "drive frequency {rf_freq} is off the conditional-flip resonance {resonance}; \
         pass the off-resonance override to force the run"
    )]
    OffResonance {
        /// The configured drive frequency.
        rf_freq: f64,
        /// The resonance the gate expects.
        resonance: f64,
    },

    /// A truth-table member run failed before producing a report.
    #[error("truth-table member k={k} failed: {source}")]
    TruthTableMember {
        /// Register index of the failing member.
        k: usize,
        /// The underlying failure.
        #[source]
        source: Box<Error>,
    },
}
