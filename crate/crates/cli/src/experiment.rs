//! Drives one configured experiment end to end: build the initial state,
//! run the pulse, write the time series and the gate report.

use std::path::{Path, PathBuf};

use cnsim_core::gate::{run_cn_gate_with, GateOptions, GateReport};
use cnsim_core::states::{digital_active, embed_superposition, ActiveBlock};
use cnsim_core::C64;

use crate::config::{Experiment, ExperimentConfig, Format};
use crate::report;
use crate::CliError;

/// Reference superposition amplitudes: populations (0.3, 0.2, 1/3, 1/6).
pub fn reference_superposition() -> [C64; 4] {
    [
        C64::new(0.3f64.sqrt(), 0.0),
        C64::new(0.2f64.sqrt(), 0.0),
        C64::new((1.0f64 / 3.0).sqrt(), 0.0),
        C64::new((1.0f64 / 6.0).sqrt(), 0.0),
    ]
}

fn initial_active(cfg: &ExperimentConfig) -> Result<ActiveBlock<f64>, CliError> {
    let active = match cfg.experiment {
        Experiment::Fig2a => digital_active(0)?,
        Experiment::Fig2b => digital_active(1)?,
        Experiment::Fig2c => digital_active(2)?,
        Experiment::Fig2d => digital_active(3)?,
        Experiment::Fig3 => embed_superposition(reference_superposition())?,
        Experiment::Custom => {
            let c = cfg
                .custom_amplitudes
                .expect("config resolution guarantees amplitudes for custom");
            embed_superposition(c)?
        }
    };
    Ok(active)
}

/// Where the gate report lands: next to the time series, with the extension
/// swapped for `report.json`.
pub fn report_path_for(timeseries: &Path) -> PathBuf {
    timeseries.with_extension("report.json")
}

pub struct Outcome {
    pub report: GateReport<f64>,
    pub timeseries_path: PathBuf,
    pub report_path: PathBuf,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let active = initial_active(cfg)?;
    let opts = GateOptions {
        dt: cfg.dt,
        sample_stride: cfg.sample_stride,
        ..GateOptions::default()
    };
    let (report, series) = run_cn_gate_with(&cfg.system, &active, &opts)?;

    let timeseries_path = cfg.output.clone();
    let contents = match cfg.format {
        Format::Csv => report::timeseries_csv(&series),
        Format::Json => report::timeseries_json(&series, cfg.experiment.name()),
    };
    write_file(&timeseries_path, &contents)?;

    let report_path = report_path_for(&timeseries_path);
    write_file(&report_path, &report::gate_report_json(cfg, &report))?;

    Ok(Outcome {
        report,
        timeseries_path,
        report_path,
    })
}
