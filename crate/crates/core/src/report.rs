//! Bit-stable trace and report serialization.
//!
//! CSV uses '.' decimals, ',' delimiters, and '\n' line endings regardless
//! of locale. Floats are rounded to 9 significant digits and printed as the
//! shortest string that round-trips the rounded value, so identical runs
//! always produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mitigation::Trace;
use crate::scenarios::ComparisonReport;

/// The exact trace.csv column header.
pub const TRACE_CSV_HEADER: &str =
    "t,ind1,ind2,ind3,arousal,performance,gauge,f_c,s_c,phase,regime,action,hysteresis_offset,genotype,landscape_fitness";

/// Format a float with 9 significant digits, shortest-round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("9-digit round trip");
    format!("{rounded}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(contents.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

/// Render a trace as CSV (header plus one line per step).
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(trace.rows.len() * 96 + 128);
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for row in &trace.rows {
        let fields = [
            fmt_f64(row.t),
            fmt_f64(row.indicators[0]),
            fmt_f64(row.indicators[1]),
            fmt_f64(row.indicators[2]),
            fmt_f64(row.arousal),
            fmt_f64(row.performance),
            row.gauge.to_string(),
            fmt_f64(row.f_c),
            fmt_f64(row.s_c),
            row.phase.as_str().to_string(),
            row.regime.as_str().to_string(),
            row.action.kind().to_string(),
            fmt_f64(row.hysteresis_offset),
            row.genotype.to_string(),
            fmt_f64(row.landscape_fitness),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Summary metrics of one run, echoed alongside the full config and header.
#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    header: &'a crate::mitigation::TraceHeader,
    config: &'a RunConfig,
    metrics: RunMetricsOut,
}

#[derive(Debug, Serialize)]
struct RunMetricsOut {
    rows: usize,
    final_gauge: u8,
    mean_performance: f64,
    time_in_optimal_fraction: f64,
    hysteresis_drift: f64,
    fc_degenerate_steps: u32,
    first_equilibrium_time: Option<f64>,
    robustness_indicator: f64,
    phase_occupancy: [f64; 3],
    action_counts: std::collections::BTreeMap<&'static str, u32>,
}

fn summarize<'a>(trace: &'a Trace, config: &'a RunConfig) -> RunSummary<'a> {
    let mut action_counts = std::collections::BTreeMap::new();
    for row in &trace.rows {
        *action_counts.entry(row.action.kind()).or_insert(0) += 1;
    }
    let first_eq = trace.first_equilibrium_time();
    let (evolvable, robust, brittle) = trace.phase_occupancy();
    RunSummary {
        header: &trace.header,
        config,
        metrics: RunMetricsOut {
            rows: trace.rows.len(),
            final_gauge: trace.rows.last().map(|r| r.gauge).unwrap_or(0),
            mean_performance: if trace.rows.is_empty() {
                0.0
            } else {
                trace.rows.iter().map(|r| r.performance).sum::<f64>() / trace.rows.len() as f64
            },
            time_in_optimal_fraction: trace
                .time_in_optimal_fraction(config.report.optimal_performance_threshold),
            hysteresis_drift: trace.hysteresis_drift(),
            fc_degenerate_steps: trace.header.fc_degenerate_steps,
            first_equilibrium_time: first_eq,
            robustness_indicator: crate::adaptation::robustness_indicator(
                first_eq.unwrap_or(f64::INFINITY),
            )
            .unwrap_or(0.0),
            phase_occupancy: [evolvable, robust, brittle],
            action_counts,
        },
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
    text.push('\n');
    text
}

/// Write trace.csv, summary.json, and the plotdata/ CSVs into `dir`.
/// Returns the written paths.
pub fn write_outputs(trace: &Trace, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let plotdata = dir.join("plotdata");
    fs::create_dir_all(&plotdata).map_err(io_err(&plotdata))?;

    let mut written = Vec::new();

    let trace_path = dir.join("trace.csv");
    write_file(&trace_path, &trace_to_csv(trace))?;
    written.push(trace_path);

    let summary_path = dir.join("summary.json");
    write_file(&summary_path, &to_pretty_json(&summarize(trace, config)))?;
    written.push(summary_path);

    let gauge_path = plotdata.join("gauge_vs_time.csv");
    let mut gauge_csv = String::from("t,gauge\n");
    for row in &trace.rows {
        gauge_csv.push_str(&format!("{},{}\n", fmt_f64(row.t), row.gauge));
    }
    write_file(&gauge_path, &gauge_csv)?;
    written.push(gauge_path);

    let fs_path = plotdata.join("f_s_vs_time.csv");
    let mut fs_csv = String::from("t,f_c,s_c\n");
    for row in &trace.rows {
        fs_csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.t),
            fmt_f64(row.f_c),
            fmt_f64(row.s_c)
        ));
    }
    write_file(&fs_path, &fs_csv)?;
    written.push(fs_path);

    let portrait_path = plotdata.join("phase_portrait.csv");
    let mut portrait_csv = String::from("f_c,s_c,phase\n");
    for row in &trace.rows {
        portrait_csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.f_c),
            fmt_f64(row.s_c),
            row.phase.as_str()
        ));
    }
    write_file(&portrait_path, &portrait_csv)?;
    written.push(portrait_path);

    Ok(written)
}

/// Write a controller comparison report as JSON. Returns the path.
pub fn write_comparison(report: &ComparisonReport, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("compare_report.json");
    write_file(&path, &to_pretty_json(report))?;
    Ok(path)
}

/// Read the performance column and time step back out of a trace.csv.
pub fn read_trace_performance(path: &Path) -> Result<(Vec<f64>, f64)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| {
        Error::InsufficientData(format!("{} is empty", path.display()))
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    let t_idx = columns.iter().position(|&c| c == "t").ok_or_else(|| {
        Error::Config(format!("{} has no 't' column", path.display()))
    })?;
    let p_idx = columns.iter().position(|&c| c == "performance").ok_or_else(|| {
        Error::Config(format!("{} has no 'performance' column", path.display()))
    })?;
    let mut times = Vec::new();
    let mut performance = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64> {
            fields
                .get(idx)
                .and_then(|f| f.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{}:{}: malformed trace row",
                        path.display(),
                        lineno + 2
                    ))
                })
        };
        times.push(parse(t_idx)?);
        performance.push(parse(p_idx)?);
    }
    if performance.len() < 2 {
        return Err(Error::InsufficientData(
            "trace needs at least 2 rows to infer the time step".into(),
        ));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::Config("trace time column is not increasing".into()));
    }
    Ok((performance, dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mitigation::{run_closed_loop, ControllerConfig, SimulationSpec, ThresholdConfig};
    use crate::physiology::Environment;
    use crate::scenarios::{Calibration, ScenarioScript, Segment};

    #[test]
    fn float_formatting_is_compact_and_locale_free() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(0.65), "0.65");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_f64(-0.05), "-0.05");
        assert_eq!(fmt_f64(12.25), "12.25");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn nine_significant_digits_round_trip() {
        for x in [0.1234567891234, 981.123456789, 1e-9 * 0.123456789123] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-8, "{x} -> {s}");
        }
    }

    fn tiny_trace() -> Trace {
        let scenario = ScenarioScript {
            name: "tiny".into(),
            segments: vec![Segment {
                duration: 1,
                env: Environment::default(),
                label: "only".into(),
            }],
            calibration: Calibration::default(),
        };
        run_closed_loop(
            &scenario,
            &ControllerConfig::Threshold(ThresholdConfig::passive()),
            &SimulationSpec::default(),
            1,
            1,
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn one_row_trace_has_header_plus_one_line() {
        let csv = trace_to_csv(&tiny_trace());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], TRACE_CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 15);
    }

    #[test]
    fn outputs_are_reproducible_and_complete() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig::default();
        let trace = tiny_trace();
        let first = write_outputs(&trace, &config, dir.path()).unwrap();
        assert_eq!(first.len(), 5);
        let snapshot: Vec<Vec<u8>> = first.iter().map(|p| fs::read(p).unwrap()).collect();
        let second = write_outputs(&trace, &config, dir.path()).unwrap();
        for (path, bytes) in second.iter().zip(&snapshot) {
            assert_eq!(&fs::read(path).unwrap(), bytes, "{}", path.display());
        }
        // Phase portrait has one point per trace row.
        let portrait = fs::read_to_string(dir.path().join("plotdata/phase_portrait.csv")).unwrap();
        assert_eq!(portrait.lines().count(), 1 + trace.rows.len());
    }

    #[test]
    fn trace_performance_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = ScenarioScript {
            name: "readback".into(),
            segments: vec![Segment {
                duration: 40,
                env: Environment::default(),
                label: "only".into(),
            }],
            calibration: Calibration::default(),
        };
        let trace = run_closed_loop(
            &scenario,
            &ControllerConfig::Threshold(ThresholdConfig::passive()),
            &SimulationSpec::default(),
            2,
            40,
            0.25,
        )
        .unwrap();
        let path = dir.path().join("trace.csv");
        write_file(&path, &trace_to_csv(&trace)).unwrap();
        let (performance, dt) = read_trace_performance(&path).unwrap();
        assert_eq!(performance.len(), 40);
        assert!((dt - 0.25).abs() < 1e-9);
        // Values survive the 9-significant-digit round trip.
        for (read, row) in performance.iter().zip(&trace.rows) {
            assert!((read - row.performance).abs() < 1e-7);
        }
    }
}
