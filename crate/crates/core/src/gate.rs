//! Conditional-flip gate semantics: resonance selection, π-pulse execution,
//! and truth-table verification.
//!
//! The register convention: within the active states, spin 1 is the control
//! and spin 0 the target, and qubit values are inverted relative to spin
//! states (a spin in its *ground* state carries qubit value 1). A single
//! π-pulse at the transition frequency of the target spin *conditioned on
//! every other spin being in its ground state* therefore flips the target
//! exactly when the control qubit is 1: active populations 0 and 1 swap,
//! populations 2 and 3 (control spin flipped, transition detuned by twice
//! the coupling) stay put.

use nalgebra::Matrix4;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::evolution::{
    default_time_step, evolve_pulse, pi_pulse_duration, PulseSpec, TimeSeries,
    DEFAULT_SAMPLE_STRIDE,
};
use crate::operators::SpinSystemConfig;
use crate::scalar::{fabs, fmax, Real};
use crate::states::{thermal_deviation, ActiveBlock, ActiveKind};

/// Number of active register states.
const ACTIVE: usize = 4;

/// Knobs for [`run_cn_gate_with`]; `Default` gives the production settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOptions<T: Real> {
    /// Integrator step.
    pub dt: T,
    /// Steps between emitted samples.
    pub sample_stride: usize,
    /// Pulse length override; `None` means the π-pulse length `π/rabi`
    /// (an override is then required for a zero-amplitude drive).
    pub duration_override: Option<T>,
    /// Skip the resonance precondition (for deliberately detuned runs).
    pub allow_off_resonance: bool,
    /// Bound on the active-population error for a pass verdict.
    pub active_tolerance: T,
    /// Bound on the passive-population drift for a pass verdict.
    pub passive_tolerance: T,
}

impl<T: Real> Default for GateOptions<T> {
    fn default() -> Self {
        Self {
            dt: default_time_step(),
            sample_stride: DEFAULT_SAMPLE_STRIDE,
            duration_override: None,
            allow_off_resonance: false,
            active_tolerance: T::lit(1e-2),
            passive_tolerance: T::lit(1e-3),
        }
    }
}

/// Outcome of one gate run: measured versus expected populations, with the
/// pass verdict `active_error ≤ active_tolerance ∧ max_passive_drift ≤
/// passive_tolerance`.
///
/// Off-diagonal phases of the final active block are recorded (the pulse
/// realizes the conditional flip only up to phase factors) but never enter
/// the verdict.
#[derive(Debug, Clone)]
pub struct GateReport<T: Real> {
    /// Human-readable description of the prepared active block.
    pub initial_label: String,
    /// All populations at the end of the pulse.
    pub final_populations: Vec<T>,
    /// Per-state expectations: swapped actives, frozen passives.
    pub expected_populations: Vec<T>,
    /// Largest |final − initial| over the passive states (indices 4–15).
    pub max_passive_drift: T,
    /// Largest |final − expected| over the active states (indices 0–3).
    pub active_error: T,
    /// Verdict under the tolerances below.
    pub passed: bool,
    /// Full final active block, phases included.
    pub final_active: Matrix4<Complex<T>>,
    /// Bound applied to `active_error`.
    pub active_tolerance: T,
    /// Bound applied to `max_passive_drift`.
    pub passive_tolerance: T,
    /// Resonance frequency of the targeted transition.
    pub resonance_frequency: T,
    /// Length of the pulse that was applied.
    pub pulse_duration: T,
}

/// Transition frequency of `target` conditioned on all other spins being in
/// their ground state (`others_ground = true`, giving `ω_target +
/// (n_spins−1)·J`) or all flipped (`false`, giving `ω_target −
/// (n_spins−1)·J`). These are the energy differences of the corresponding
/// zero-drive levels.
pub fn cn_resonance_frequency<T: Real>(
    cfg: &SpinSystemConfig<T>,
    target: usize,
    others_ground: bool,
) -> Result<T> {
    let n = cfg.n_spins();
    if target >= n {
        return Err(Error::SpinIndexOutOfRange {
            index: target,
            n_spins: n,
        });
    }
    let shift = T::from_usize(n - 1).expect("spin count fits the scalar") * cfg.j_coupling();
    Ok(if others_ground {
        cfg.omega(target) + shift
    } else {
        cfg.omega(target) - shift
    })
}

/// Population-level expectation after an ideal conditional flip: active
/// populations 0 and 1 swapped, 2 and 3 unchanged. Off-diagonals are zeroed
/// because the pulse's phases are not part of the contract.
pub fn cn_expected_final<T: Real>(initial_active: &ActiveBlock<T>) -> ActiveBlock<T> {
    let d = initial_active.diagonal_populations();
    let mut m = Matrix4::zeros();
    m[(0, 0)] = Complex::new(d[1], T::zero());
    m[(1, 1)] = Complex::new(d[0], T::zero());
    m[(2, 2)] = Complex::new(d[2], T::zero());
    m[(3, 3)] = Complex::new(d[3], T::zero());
    ActiveBlock::from_matrix_unchecked(m, ActiveKind::Custom)
}

/// Runs the conditional-flip pulse with default options except for the
/// integrator step, returning the report alone.
pub fn run_cn_gate<T: Real>(
    cfg: &SpinSystemConfig<T>,
    initial_active: &ActiveBlock<T>,
    dt: T,
) -> Result<GateReport<T>> {
    let opts = GateOptions {
        dt,
        ..GateOptions::default()
    };
    run_cn_gate_with(cfg, initial_active, &opts).map(|(report, _)| report)
}

/// Runs the conditional-flip pulse: builds the thermal initial state around
/// `initial_active`, drives the cluster at `cfg.rf_freq()` for a π-pulse
/// (or the override length), and scores the outcome.
///
/// Unless `allow_off_resonance` is set, `cfg.rf_freq()` must match the
/// conditional resonance of the target within 10⁻⁹ — running detuned is
/// almost always a configuration mistake.
pub fn run_cn_gate_with<T: Real>(
    cfg: &SpinSystemConfig<T>,
    initial_active: &ActiveBlock<T>,
    opts: &GateOptions<T>,
) -> Result<(GateReport<T>, TimeSeries<T>)> {
    let resonance = cn_resonance_frequency(cfg, 0, true)?;
    if !opts.allow_off_resonance && fabs(cfg.rf_freq() - resonance) > T::lit(1e-9) {
        return Err(Error::OffResonance {
            rf_freq: cfg.rf_freq().as_f64(),
            resonance: resonance.as_f64(),
        });
    }

    let duration = match opts.duration_override {
        Some(d) => d,
        None => pi_pulse_duration(cfg.rabi())?,
    };
    let pulse = PulseSpec::new(cfg.rf_freq(), cfg.rabi(), duration)?;
    let rho0 = thermal_deviation(cfg, initial_active)?;
    let initial_populations = rho0.populations()?;
    let series = evolve_pulse(cfg, &pulse, &rho0, opts.dt, opts.sample_stride)?;

    let final_populations = series.final_populations().to_vec();
    let expected_active = cn_expected_final(initial_active).diagonal_populations();
    let mut expected_populations = Vec::with_capacity(final_populations.len());
    expected_populations.extend_from_slice(&expected_active);
    expected_populations.extend_from_slice(&initial_populations[ACTIVE..]);

    let mut active_error = T::zero();
    for k in 0..ACTIVE {
        active_error = fmax(
            active_error,
            fabs(final_populations[k] - expected_populations[k]),
        );
    }
    let mut max_passive_drift = T::zero();
    for n in ACTIVE..final_populations.len() {
        max_passive_drift = fmax(
            max_passive_drift,
            fabs(final_populations[n] - initial_populations[n]),
        );
    }
    let passed =
        active_error <= opts.active_tolerance && max_passive_drift <= opts.passive_tolerance;

    let report = GateReport {
        initial_label: initial_active.describe(),
        final_populations,
        expected_populations,
        max_passive_drift,
        active_error,
        passed,
        final_active: *series.final_state().active_block()?.as_matrix(),
        active_tolerance: opts.active_tolerance,
        passive_tolerance: opts.passive_tolerance,
        resonance_frequency: resonance,
        pulse_duration: duration,
    };
    Ok((report, series))
}

/// Reports for the four digital preparations, in register order.
#[derive(Debug, Clone)]
pub struct TruthTableReport<T: Real> {
    /// One report per prepared register state `k = 0..4`.
    pub reports: Vec<GateReport<T>>,
}

impl<T: Real> TruthTableReport<T> {
    /// True when every member passed.
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    /// Indices of the members that failed.
    pub fn failing_members(&self) -> Vec<usize> {
        self.reports
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.passed)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Runs the four digital preparations through the gate with default options
/// except for the integrator step.
pub fn truth_table_suite<T: Real>(cfg: &SpinSystemConfig<T>, dt: T) -> Result<TruthTableReport<T>> {
    let opts = GateOptions {
        dt,
        ..GateOptions::default()
    };
    truth_table_suite_with(cfg, &opts)
}

/// [`truth_table_suite`] with full option control. A member that errors
/// fails the whole suite with its register index attached.
pub fn truth_table_suite_with<T: Real>(
    cfg: &SpinSystemConfig<T>,
    opts: &GateOptions<T>,
) -> Result<TruthTableReport<T>> {
    let mut reports = Vec::with_capacity(ACTIVE);
    for k in 0..ACTIVE {
        let member = (|| -> Result<GateReport<T>> {
            let active = crate::states::digital_active(k)?;
            Ok(run_cn_gate_with(cfg, &active, opts)?.0)
        })();
        match member {
            Ok(report) => reports.push(report),
            Err(source) => {
                return Err(Error::TruthTableMember {
                    k,
                    source: Box::new(source),
                })
            }
        }
    }
    Ok(TruthTableReport { reports })
}
