//! `mitsim` command line: landscape inspection, closed-loop simulation, the
//! four-step gauge scenario, controller comparison, and power-law analysis
//! of recorded traces.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mitsim_core::config::{parse_config, ControllerChoice, RunConfig};
use mitsim_core::error::{Error, Result};
use mitsim_core::landscape::{ExtremumKind, Landscape};
use mitsim_core::mitigation::{run_closed_loop, ControllerConfig, ThresholdConfig};
use mitsim_core::report;
use mitsim_core::scenarios;

#[derive(Parser)]
#[command(name = "mitsim", about = "Closed-loop mitigation simulator on NK fitness landscapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an NK landscape and print its serialized spec.
    Landscape {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute extrema counts and the ruggedness autocorrelation.
        #[arg(long)]
        stats: bool,
    },
    /// Run one closed-loop simulation and write trace/summary/plot data.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ControllerArg::Threshold)]
        controller: ControllerArg,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured step count.
        #[arg(long)]
        steps: Option<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the four-step gauge scenario and report end-of-segment gauges.
    FourStep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare both controllers over a nonstationary scenario ensemble.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured ensemble size.
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit the power law of practice to a recorded trace.
    Powerlaw {
        #[arg(long)]
        trace: PathBuf,
        /// Performance level defining the optimal band.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Threshold,
    Landscape,
}

impl From<ControllerArg> for ControllerChoice {
    fn from(value: ControllerArg) -> Self {
        match value {
            ControllerArg::Threshold => ControllerChoice::Threshold,
            ControllerArg::Landscape => ControllerChoice::Landscape,
        }
    }
}

fn load_config(path: &PathBuf) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    parse_config(&text)
}

#[derive(Serialize)]
struct LandscapeStats {
    local_maxima: usize,
    local_minima: usize,
    ruggedness_rho: f64,
    rho_zero_variance: bool,
}

#[derive(Serialize)]
struct LandscapeOutput {
    #[serde(flatten)]
    spec: mitsim_core::landscape::LandscapeSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<LandscapeStats>,
}

fn cmd_landscape(n: usize, k: usize, seed: u64, stats: bool) -> Result<()> {
    let landscape = Landscape::generate(n, k, seed)?;
    let stats = if stats {
        let rho = landscape.ruggedness_autocorrelation(1000, seed)?;
        Some(LandscapeStats {
            local_maxima: landscape.local_extrema(ExtremumKind::Maxima).len(),
            local_minima: landscape.local_extrema(ExtremumKind::Minima).len(),
            ruggedness_rho: rho.rho,
            rho_zero_variance: rho.zero_variance,
        })
    } else {
        None
    };
    let output = LandscapeOutput {
        spec: landscape.spec(),
        stats,
    };
    println!("{}", serde_json::to_string_pretty(&output).expect("serializable"));
    Ok(())
}

fn cmd_simulate(
    config_path: &PathBuf,
    controller: ControllerArg,
    seed: Option<u64>,
    steps: Option<u32>,
    out: &PathBuf,
) -> Result<()> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(steps) = steps {
        config.steps = steps;
    }
    config.validate()?;
    let scenario = config.scenario_script()?;
    let controller = config.controller(controller.into());
    let trace = run_closed_loop(
        &scenario,
        &controller,
        &config.simulation_spec(),
        config.seed,
        config.steps,
        config.dt,
    )?;
    let paths = report::write_outputs(&trace, &config, out)?;
    for path in paths {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_four_step(config_path: &PathBuf, out: &PathBuf) -> Result<()> {
    let config = load_config(config_path)?;
    let (scenario, expected) = scenarios::four_step();
    // The gauge scenario is observed, not intervened on.
    let controller = ControllerConfig::Threshold(ThresholdConfig::passive());
    let steps = scenario.total_steps();
    let trace = run_closed_loop(
        &scenario,
        &controller,
        &config.simulation_spec(),
        config.seed,
        steps,
        config.dt,
    )?;
    let gauges: Vec<u8> = scenario
        .segment_end_steps()
        .iter()
        .map(|&i| trace.rows[i as usize].gauge)
        .collect();
    report::write_outputs(&trace, &config, out)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "expected_gauges": expected,
            "observed_gauges": gauges,
            "match": gauges == expected,
        }))
        .expect("serializable")
    );
    if gauges != expected {
        return Err(Error::Domain {
            name: "four-step",
            message: format!("observed gauges {gauges:?} differ from expected {expected:?}"),
        });
    }
    Ok(())
}

fn cmd_compare(config_path: &PathBuf, ensemble: Option<usize>, out: &PathBuf) -> Result<()> {
    let mut config = load_config(config_path)?;
    if let Some(count) = ensemble {
        config.scenario.ensemble_count = count;
    }
    config.validate()?;
    let ensemble = scenarios::nonstationary_ensemble(
        config.scenario.ensemble_count,
        config.seed,
        config.scenario.volatility,
    )?;
    let report_out = scenarios::compare_controllers(
        &ensemble,
        &config.controller(ControllerChoice::Threshold),
        &config.controller(ControllerChoice::Landscape),
        &config.simulation_spec(),
        config.seed,
        config.steps,
        config.dt,
        &config.report_config(),
    )?;
    let path = report::write_comparison(&report_out, out)?;
    println!("{}", path.display());
    println!(
        "time-in-optimal: threshold {:.4}, landscape {:.4}, difference {:+.4} (95% CI [{:+.4}, {:+.4}])",
        report_out.baseline.mean_time_in_optimal,
        report_out.candidate.mean_time_in_optimal,
        report_out.time_in_optimal_difference,
        report_out.ci95_low,
        report_out.ci95_high,
    );
    Ok(())
}

fn cmd_powerlaw(trace_path: &PathBuf, threshold: Option<f64>) -> Result<()> {
    let threshold = threshold
        .unwrap_or(scenarios::ReportConfig::default().optimal_performance_threshold);
    let (performance, dt) = report::read_trace_performance(trace_path)?;
    let times = scenarios::excursion_times(&performance, threshold, dt);
    if times.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "found {} completed excursions below {threshold}; need at least 3",
            times.len()
        )));
    }
    let trials: Vec<f64> = (1..=times.len()).map(|n| n as f64).collect();
    let fit = scenarios::fit_power_law(&trials, &times)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "trials": times.len(),
            "threshold": threshold,
            "a": fit.a,
            "b": fit.b,
            "r_squared": fit.r_squared,
        }))
        .expect("serializable")
    );
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Landscape { n, k, seed, stats } => cmd_landscape(n, k, seed, stats),
        Command::Simulate {
            config,
            controller,
            seed,
            steps,
            out,
        } => cmd_simulate(&config, controller, seed, steps, &out),
        Command::FourStep { config, out } => cmd_four_step(&config, &out),
        Command::Compare {
            config,
            ensemble,
            out,
        } => cmd_compare(&config, ensemble, &out),
        Command::Powerlaw { trace, threshold } => cmd_powerlaw(&trace, threshold),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
