//! Configuration resolution: built-in reference defaults, overridden by an
//! optional TOML file, overridden in turn by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use cnsim_core::evolution::{default_time_step, DEFAULT_SAMPLE_STRIDE};
use cnsim_core::{SpinSystemConfig64, C64};

use crate::CliError;

/// Which initial condition the pulse is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// First digital register state: the target spin flips up.
    Fig2a,
    /// Second digital register state: the target spin flips back down.
    Fig2b,
    /// Third digital register state: no transition is resonant; nothing moves.
    Fig2c,
    /// Fourth digital register state: no transition is resonant; nothing moves.
    Fig2d,
    /// Reference superposition with populations (0.3, 0.2, 1/3, 1/6).
    Fig3,
    /// Caller-supplied four-component amplitude vector (`custom_amplitudes`).
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2a => "fig2a",
            Experiment::Fig2b => "fig2b",
            Experiment::Fig2c => "fig2c",
            Experiment::Fig2d => "fig2d",
            Experiment::Fig3 => "fig3",
            Experiment::Custom => "custom",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Encoding of the time-series file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Flags shared by the experiment runner (also accepted before the
/// `acceptance` subcommand, where only `--config` matters).
#[derive(Debug, Default, clap::Args)]
pub struct RunArgs {
    /// Initial condition to drive (defaults to fig2a)
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// TOML file with system parameters and run settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Time-series file to write; the gate report lands next to it
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Time-series encoding
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Integrator step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integrator steps between emitted samples
    #[arg(long)]
    pub stride: Option<usize>,
}

/// The file-level schema: everything optional, unknown keys rejected so a
/// typo cannot silently fall back to a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    omega: Option<Vec<f64>>,
    j_coupling: Option<f64>,
    rabi: Option<f64>,
    rf_freq: Option<f64>,
    experiment: Option<Experiment>,
    custom_amplitudes: Option<Vec<[f64; 2]>>,
    dt: Option<f64>,
    sample_stride: Option<usize>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

/// Fully resolved settings for one experiment run.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub system: SpinSystemConfig64,
    pub experiment: Experiment,
    pub custom_amplitudes: Option<[C64; 4]>,
    pub dt: f64,
    pub sample_stride: usize,
    pub output: PathBuf,
    pub format: Format,
}

/// Fully resolved settings for the acceptance suite.
#[derive(Debug)]
pub struct AcceptanceConfig {
    pub system: SpinSystemConfig64,
    pub dt: f64,
    pub sample_stride: usize,
    pub output: PathBuf,
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Shared system/integrator resolution from defaults, file, and flags.
fn resolve_numerics(
    file: &FileConfig,
    dt_flag: Option<f64>,
    stride_flag: Option<usize>,
) -> Result<(SpinSystemConfig64, f64, usize), CliError> {
    let defaults = SpinSystemConfig64::default();
    let omega = file
        .omega
        .clone()
        .unwrap_or_else(|| defaults.omegas().to_vec());
    let j = file.j_coupling.unwrap_or(defaults.j_coupling());
    let rabi = file.rabi.unwrap_or(defaults.rabi());
    let rf = file.rf_freq.unwrap_or(defaults.rf_freq());
    let system = SpinSystemConfig64::new(omega, j, rabi, rf)?;

    let dt = dt_flag.or(file.dt).unwrap_or_else(default_time_step);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Config(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    let stride = stride_flag
        .or(file.sample_stride)
        .unwrap_or(DEFAULT_SAMPLE_STRIDE);
    if stride == 0 {
        return Err(CliError::Config(
            "sample stride must be at least 1".to_string(),
        ));
    }
    Ok((system, dt, stride))
}

/// Resolves an experiment run, enforcing that `custom_amplitudes` is present
/// exactly when the experiment is `custom`.
pub fn resolve_experiment(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let (system, dt, sample_stride) = resolve_numerics(&file, args.dt, args.stride)?;

    let experiment = args
        .experiment
        .or(file.experiment)
        .unwrap_or(Experiment::Fig2a);
    let custom_amplitudes = match (&file.custom_amplitudes, experiment) {
        (Some(raw), Experiment::Custom) => {
            if raw.len() != 4 {
                return Err(CliError::Config(format!(
                    "custom_amplitudes must hold exactly 4 [re, im] pairs, got {}",
                    raw.len()
                )));
            }
            let mut c = [C64::new(0.0, 0.0); 4];
            for (slot, pair) in c.iter_mut().zip(raw) {
                *slot = C64::new(pair[0], pair[1]);
            }
            Some(c)
        }
        (None, Experiment::Custom) => {
            return Err(CliError::Config(
                "experiment \"custom\" requires custom_amplitudes in the config file".to_string(),
            ));
        }
        (Some(_), _) => {
            return Err(CliError::Config(format!(
                "custom_amplitudes is set but the experiment is \"{experiment}\"; \
                 use experiment = \"custom\" or remove the amplitudes"
            )));
        }
        (None, _) => None,
    };

    let format = args.format.or(file.format).unwrap_or(Format::Csv);
    let output = args
        .output
        .clone()
        .or(file.output)
        .unwrap_or_else(|| PathBuf::from(format!("{experiment}.{}", format.extension())));

    Ok(ExperimentConfig {
        system,
        experiment,
        custom_amplitudes,
        dt,
        sample_stride,
        output,
        format,
    })
}

/// Resolves the acceptance suite's settings; experiment selection and output
/// format in the file are ignored because the suite fixes its own runs.
pub fn resolve_acceptance(
    config: Option<&Path>,
    output: Option<&Path>,
) -> Result<AcceptanceConfig, CliError> {
    let file = match config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let (system, dt, sample_stride) = resolve_numerics(&file, None, None)?;
    let output = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("acceptance_summary.json"));
    Ok(AcceptanceConfig {
        system,
        dt,
        sample_stride,
        output,
    })
}
