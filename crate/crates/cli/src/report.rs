//! Plain-text emitters for the three output files: the time-series CSV or
//! JSON, the per-run gate report, and the acceptance summary.
//!
//! All numbers are written with [`fmt_f64`] — exactly 17 significant digits,
//! enough for bit-faithful round-trips — and nothing time- or host-dependent
//! enters the files, so identical configs produce byte-identical output.

use cnsim_core::evolution::TimeSeries;
use cnsim_core::gate::GateReport;

use crate::config::ExperimentConfig;

/// Fixed column layout for four spins: time, the sixteen diagonal
/// populations, then the transverse magnetization split into real and
/// imaginary parts.
pub const CSV_HEADER: &str =
    "t,r00,r01,r02,r03,r04,r05,r06,r07,r08,r09,r10,r11,r12,r13,r14,r15,re_iplus,im_iplus";

/// 17 significant digits: enough to reconstruct the exact f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Escapes a string for inclusion in a JSON document.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn join_numbers(values: impl IntoIterator<Item = f64>, sep: &str) -> String {
    values
        .into_iter()
        .map(fmt_f64)
        .collect::<Vec<_>>()
        .join(sep)
}

fn sample_row(series: &TimeSeries<f64>, i: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(19);
    row.push(series.times()[i]);
    row.extend_from_slice(&series.populations()[i]);
    row.push(series.i_plus()[i].re);
    row.push(series.i_plus()[i].im);
    row
}

/// One row per sample; final row lands exactly at the pulse end.
pub fn timeseries_csv(series: &TimeSeries<f64>) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        out.push_str(&join_numbers(sample_row(series, i), ","));
        out.push('\n');
    }
    out
}

/// The same table as [`timeseries_csv`], as a JSON object with a column
/// legend and an array of rows.
pub fn timeseries_json(series: &TimeSeries<f64>, experiment: &str) -> String {
    let columns = CSV_HEADER
        .split(',')
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(", ");
    let mut rows = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        rows.push(format!(
            "    [{}]",
            join_numbers(sample_row(series, i), ", ")
        ));
    }
    format!(
        "{{\n  \"version\": \"{version}\",\n  \"experiment\": \"{experiment}\",\n  \
         \"columns\": [{columns}],\n  \"rows\": [\n{rows}\n  ]\n}}\n",
        version = env!("CARGO_PKG_VERSION"),
        experiment = json_escape(experiment),
        rows = rows.join(",\n"),
    )
}

fn config_echo_json(cfg: &ExperimentConfig, indent: &str) -> String {
    format!(
        "{indent}\"experiment\": \"{experiment}\",\n\
         {indent}\"omega\": [{omega}],\n\
         {indent}\"j_coupling\": {j},\n\
         {indent}\"rabi\": {rabi},\n\
         {indent}\"rf_freq\": {rf},\n\
         {indent}\"dt\": {dt},\n\
         {indent}\"sample_stride\": {stride}",
        experiment = cfg.experiment,
        omega = join_numbers(cfg.system.omegas().iter().copied(), ", "),
        j = fmt_f64(cfg.system.j_coupling()),
        rabi = fmt_f64(cfg.system.rabi()),
        rf = fmt_f64(cfg.system.rf_freq()),
        dt = fmt_f64(cfg.dt),
        stride = cfg.sample_stride,
    )
}

/// The gate report as JSON: every [`GateReport`] field, a config echo, and
/// the crate version.
pub fn gate_report_json(cfg: &ExperimentConfig, report: &GateReport<f64>) -> String {
    let mut active_rows = Vec::with_capacity(4);
    for r in 0..4 {
        let entries = (0..4)
            .map(|c| {
                let z = report.final_active[(r, c)];
                format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
            })
            .collect::<Vec<_>>()
            .join(", ");
        active_rows.push(format!("      [{entries}]"));
    }
    format!(
        "{{\n  \"version\": \"{version}\",\n  \"config\": {{\n{config}\n  }},\n  \"report\": {{\n    \
         \"initial_label\": \"{label}\",\n    \
         \"resonance_frequency\": {resonance},\n    \
         \"pulse_duration\": {duration},\n    \
         \"active_tolerance\": {active_tol},\n    \
         \"passive_tolerance\": {passive_tol},\n    \
         \"final_populations\": [{fin}],\n    \
         \"expected_populations\": [{exp}],\n    \
         \"final_active\": [\n{active}\n    ],\n    \
         \"active_error\": {active_err},\n    \
         \"max_passive_drift\": {drift},\n    \
         \"passed\": {passed}\n  }}\n}}\n",
        version = env!("CARGO_PKG_VERSION"),
        config = config_echo_json(cfg, "    "),
        label = json_escape(&report.initial_label),
        resonance = fmt_f64(report.resonance_frequency),
        duration = fmt_f64(report.pulse_duration),
        active_tol = fmt_f64(report.active_tolerance),
        passive_tol = fmt_f64(report.passive_tolerance),
        fin = join_numbers(report.final_populations.iter().copied(), ", "),
        exp = join_numbers(report.expected_populations.iter().copied(), ", "),
        active = active_rows.join(",\n"),
        active_err = fmt_f64(report.active_error),
        drift = fmt_f64(report.max_passive_drift),
        passed = report.passed,
    )
}

/// One acceptance check's outcome.
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub detail: String,
}

/// The acceptance summary as JSON: version, the checks in execution order,
/// and the overall verdict. Wall time deliberately stays out of the file.
pub fn acceptance_summary_json(checks: &[Check], passed: bool) -> String {
    let body = checks
        .iter()
        .map(|c| {
            format!(
                "    {{\"name\": \"{}\", \"passed\": {}, \"measured\": {}, \"detail\": \"{}\"}}",
                json_escape(c.name),
                c.passed,
                fmt_f64(c.measured),
                json_escape(&c.detail),
            )
        })
        .collect::<Vec<_>>()
        .join(",\n");
    format!(
        "{{\n  \"version\": \"{version}\",\n  \"checks\": [\n{body}\n  ],\n  \"passed\": {passed}\n}}\n",
        version = env!("CARGO_PKG_VERSION"),
    )
}
