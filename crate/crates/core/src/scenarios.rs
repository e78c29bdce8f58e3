//! Scenario scripts and experiments: the four-step gauge scenario,
//! nonstationary ensembles, practice trials for power-law analysis, and the
//! paired controller comparison with a bootstrap confidence interval.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mitigation::{run_closed_loop, ControllerConfig, SimulationSpec, Trace};
use crate::physiology::Environment;
use crate::rng;

/// Steps in a generated nonstationary script.
pub const NONSTATIONARY_STEPS: u32 = 600;
/// Expected extra segment boundaries per unit of volatility.
pub const SEGMENTS_PER_VOLATILITY: f64 = 10.0;
/// Degradation schedules are centred here; volatility spreads them.
pub const DEGRADATION_CENTER: f64 = 0.5;

/// One piecewise-constant stretch of the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: u32,
    pub env: Environment,
    pub label: String,
}

/// A memory consolidation applied when a run enters the labelled segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationEvent {
    pub presentations: u32,
    pub fearful: bool,
}

/// Named scenario parameters: the amplitude coupling to declarative memory
/// and any per-segment consolidation events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Overrides the configured initial amplitude when set.
    pub base_amplitude: Option<f64>,
    /// Amplitude gained per unit of declarative memory.
    pub amplitude_gain: f64,
    pub events: BTreeMap<String, ConsolidationEvent>,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            base_amplitude: None,
            amplitude_gain: 0.3,
            events: BTreeMap::new(),
        }
    }
}

/// An ordered list of environment segments plus calibration parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    pub segments: Vec<Segment>,
    pub calibration: Calibration,
}

impl ScenarioScript {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::parameter("scenario.segments", "must not be empty"));
        }
        let mut labels = std::collections::HashSet::new();
        for seg in &self.segments {
            if seg.duration == 0 {
                return Err(Error::parameter("scenario.segments", "durations must be positive"));
            }
            if !labels.insert(&seg.label) {
                return Err(Error::parameter(
                    "scenario.segments",
                    format!("duplicate segment label {:?}", seg.label),
                ));
            }
            seg.env.validate()?;
        }
        Ok(())
    }

    pub fn total_steps(&self) -> u32 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Segment active at `step`, and whether `step` is its first step.
    /// Steps past the script remain in the final segment.
    pub fn segment_at(&self, step: u32) -> (&Segment, bool) {
        let mut start = 0u32;
        for seg in &self.segments {
            if step < start + seg.duration {
                return (seg, step == start);
            }
            start += seg.duration;
        }
        let last = self.segments.last().expect("validated scripts are non-empty");
        (last, false)
    }

    /// Step indices of the last step of each segment, for end-of-segment
    /// readouts.
    pub fn segment_end_steps(&self) -> Vec<u32> {
        let mut ends = Vec::with_capacity(self.segments.len());
        let mut acc = 0u32;
        for seg in &self.segments {
            acc += seg.duration;
            ends.push(acc - 1);
        }
        ends
    }
}

/// Shared scenario constants for calibrated scripts. These assume the
/// shipped default response curve (mu 0.5, sigma 0.15).
const CAL_MU: f64 = 0.5;
const CAL_SIGMA: f64 = 0.15;
const CAL_BASE_AMPLITUDE: f64 = 0.65;
const CAL_NOISE: f64 = 0.01;
const FOUR_STEP_SEGMENT_STEPS: u32 = 150;

/// Drift bias that settles steady-state performance at `target` for a curve
/// with peak `amplitude` (approached from above).
fn drift_for_performance(amplitude: f64, target: f64) -> f64 {
    CAL_MU + CAL_SIGMA * (2.0 * (amplitude / target).ln()).sqrt()
}

/// The four-step gauge scenario: baseline performance, degraded conditions,
/// then consolidated learning. End-of-segment gauges read 6, 3, and 8.
pub fn four_step() -> (ScenarioScript, [u8; 3]) {
    let baseline = Segment {
        duration: FOUR_STEP_SEGMENT_STEPS,
        env: Environment {
            degradation: 0.1,
            stimulus_clarity: 1.0,
            drift_bias: CAL_MU,
            noise_scale: CAL_NOISE,
        },
        label: "baseline".into(),
    };
    let degraded = Segment {
        duration: FOUR_STEP_SEGMENT_STEPS,
        env: Environment {
            degradation: 0.55,
            stimulus_clarity: 0.9,
            drift_bias: drift_for_performance(CAL_BASE_AMPLITUDE, 0.35),
            noise_scale: CAL_NOISE,
        },
        label: "degraded".into(),
    };
    let learned = Segment {
        duration: FOUR_STEP_SEGMENT_STEPS,
        env: Environment {
            degradation: 0.3,
            stimulus_clarity: 0.95,
            drift_bias: CAL_MU,
            noise_scale: CAL_NOISE,
        },
        label: "learned".into(),
    };
    let mut events = BTreeMap::new();
    // Ten declarative presentations lift the amplitude to
    // 0.65 + 0.3 * (1 - 0.9^10) ~ 0.845: squarely in the gauge-8 band.
    events.insert(
        "learned".to_string(),
        ConsolidationEvent {
            presentations: 10,
            fearful: false,
        },
    );
    let script = ScenarioScript {
        name: "four-step".into(),
        segments: vec![baseline, degraded, learned],
        calibration: Calibration {
            base_amplitude: Some(CAL_BASE_AMPLITUDE),
            amplitude_gain: 0.3,
            events,
        },
    };
    (script, [6, 3, 8])
}

/// Seeded ensemble of piecewise-constant degradation schedules.
///
/// `volatility` controls both the expected segment count
/// (`1 + 10 * volatility`) and the spread of degradation and arousal drift
/// around their centres.
pub fn nonstationary_ensemble(count: usize, seed: u64, volatility: f64) -> Result<Vec<ScenarioScript>> {
    if count < 1 {
        return Err(Error::parameter("count", "must be >= 1"));
    }
    if !(volatility >= 0.0) {
        return Err(Error::parameter("volatility", "must be >= 0"));
    }
    let steps = NONSTATIONARY_STEPS;
    let switch_prob = (volatility * SEGMENTS_PER_VOLATILITY / (steps - 1) as f64).min(1.0);
    let d_spread = 0.4 * volatility;
    let drift_spread = 0.5 * volatility;

    let scripts = (0..count)
        .map(|i| {
            let mut rng = rng::substream(seed, i as u64);
            let mut boundaries = vec![0u32];
            for step in 1..steps {
                if rng.random::<f64>() < switch_prob {
                    boundaries.push(step);
                }
            }
            boundaries.push(steps);
            let segments = boundaries
                .windows(2)
                .enumerate()
                .map(|(seg_idx, w)| {
                    let u_d: f64 = rng.random();
                    let u_drift: f64 = rng.random();
                    Segment {
                        duration: w[1] - w[0],
                        env: Environment {
                            degradation: (DEGRADATION_CENTER + d_spread * (2.0 * u_d - 1.0))
                                .clamp(0.0, 1.0),
                            stimulus_clarity: 1.0,
                            drift_bias: (CAL_MU + drift_spread * (2.0 * u_drift - 1.0))
                                .clamp(0.05, 0.95),
                            noise_scale: CAL_NOISE,
                        },
                        label: format!("seg_{seg_idx}"),
                    }
                })
                .collect();
            ScenarioScript {
                name: format!("nonstationary_{i}"),
                segments,
                calibration: Calibration {
                    base_amplitude: Some(CAL_BASE_AMPLITUDE),
                    ..Default::default()
                },
            }
        })
        .collect();
    Ok(scripts)
}

/// Repeated identical stimulus trials with per-trial consolidation: the
/// constant-stimulus practice scenario whose recovery times shrink with
/// learning.
pub fn practice_scenario(trials: u32) -> Result<ScenarioScript> {
    if trials < 3 {
        return Err(Error::parameter("trials", "needs at least 3 trials"));
    }
    let mut segments = Vec::with_capacity(2 * trials as usize);
    let mut events = BTreeMap::new();
    for trial in 0..trials {
        let stim_label = format!("stim_{trial}");
        events.insert(
            stim_label.clone(),
            ConsolidationEvent {
                presentations: 1,
                fearful: false,
            },
        );
        segments.push(Segment {
            duration: 15,
            env: Environment {
                degradation: 0.2,
                stimulus_clarity: 1.0,
                drift_bias: 0.85,
                noise_scale: 0.005,
            },
            label: stim_label,
        });
        segments.push(Segment {
            duration: 45,
            env: Environment {
                degradation: 0.2,
                stimulus_clarity: 1.0,
                drift_bias: CAL_MU,
                noise_scale: 0.005,
            },
            label: format!("recover_{trial}"),
        });
    }
    Ok(ScenarioScript {
        name: "practice".into(),
        segments,
        calibration: Calibration {
            base_amplitude: Some(CAL_BASE_AMPLITUDE),
            amplitude_gain: 0.3,
            events,
        },
    })
}

/// Durations (in time units) of completed excursions of `performance` below
/// `threshold`, with linear interpolation of the crossing instants. These
/// are the per-trial times used for power-law analysis.
pub fn excursion_times(performance: &[f64], threshold: f64, dt: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut entry: Option<f64> = None;
    for i in 0..performance.len() {
        let t = i as f64 * dt;
        let below = performance[i] < threshold;
        match (entry, below) {
            (None, true) => {
                let frac = if i > 0 && performance[i - 1] != performance[i] {
                    ((performance[i - 1] - threshold) / (performance[i - 1] - performance[i]))
                        .clamp(0.0, 1.0)
                } else {
                    0.0
                };
                entry = Some(if i > 0 { t - dt + frac * dt } else { t });
            }
            (Some(start), false) => {
                let frac = if performance[i - 1] != performance[i] {
                    ((performance[i - 1] - threshold) / (performance[i - 1] - performance[i]))
                        .clamp(0.0, 1.0)
                } else {
                    0.0
                };
                times.push(t - dt + frac * dt - start);
                entry = None;
            }
            _ => {}
        }
    }
    times
}

/// Least-squares fit of `T = a * N^(-b)` on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(trial_indices: &[f64], times: &[f64]) -> Result<PowerLawFit> {
    if trial_indices.len() != times.len() {
        return Err(Error::Shape(format!(
            "trial and time series lengths differ: {} vs {}",
            trial_indices.len(),
            times.len()
        )));
    }
    if trial_indices.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 3 points, got {}",
            trial_indices.len()
        )));
    }
    if trial_indices.iter().chain(times).any(|&v| !(v > 0.0)) {
        return Err(Error::domain(
            "series",
            "power-law fit needs strictly positive trial indices and times",
        ));
    }
    let x: Vec<f64> = trial_indices.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let n = x.len() as f64;
    let x_mean = x.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - x_mean).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - x_mean) * (yi - y_mean)).sum();
    if sxx <= 1e-24 {
        return Err(Error::DegenerateRange(
            "trial indices have no spread on the log axis".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = y.iter().map(|yi| (yi - y_mean).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - (intercept + slope * xi)).powi(2))
        .sum();
    // A perfectly flat series is fit exactly by b = 0.
    let r_squared = if ss_tot <= 1e-24 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        a: intercept.exp(),
        b: -slope,
        r_squared,
    })
}

/// Per-arm aggregate metrics of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub controller: String,
    pub mean_time_in_optimal: f64,
    pub mean_hysteresis_drift: f64,
    /// Mean over runs that reached an equilibrium.
    pub mean_first_equilibrium_time: Option<f64>,
    pub equilibrium_found_fraction: f64,
    pub phase_occupancy: PhaseOccupancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseOccupancy {
    pub evolvable: f64,
    pub robust: f64,
    pub brittle: f64,
}

/// Result of running two controllers over the same paired ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub ensemble_size: usize,
    pub master_seed: u64,
    pub steps: u32,
    pub dt: f64,
    pub optimal_performance_threshold: f64,
    pub baseline: ArmSummary,
    pub candidate: ArmSummary,
    /// Mean candidate minus baseline time-in-optimal, paired per scenario.
    pub time_in_optimal_difference: f64,
    pub bootstrap_resamples: u32,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

/// Reporting knobs for comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    /// Performance level counted as "in the optimal band".
    pub optimal_performance_threshold: f64,
    pub bootstrap_resamples: u32,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            optimal_performance_threshold: 0.4,
            bootstrap_resamples: 1000,
        }
    }
}

struct RunMetrics {
    time_in_optimal: f64,
    hysteresis_drift: f64,
    first_equilibrium: Option<f64>,
    occupancy: (f64, f64, f64),
}

fn run_metrics(trace: &Trace, p_opt: f64) -> RunMetrics {
    RunMetrics {
        time_in_optimal: trace.time_in_optimal_fraction(p_opt),
        hysteresis_drift: trace.hysteresis_drift(),
        first_equilibrium: trace.first_equilibrium_time(),
        occupancy: trace.phase_occupancy(),
    }
}

fn summarize(controller: &ControllerConfig, metrics: &[RunMetrics]) -> ArmSummary {
    let n = metrics.len() as f64;
    let eq_times: Vec<f64> = metrics.iter().filter_map(|m| m.first_equilibrium).collect();
    ArmSummary {
        controller: controller.kind().to_string(),
        mean_time_in_optimal: metrics.iter().map(|m| m.time_in_optimal).sum::<f64>() / n,
        mean_hysteresis_drift: metrics.iter().map(|m| m.hysteresis_drift).sum::<f64>() / n,
        mean_first_equilibrium_time: if eq_times.is_empty() {
            None
        } else {
            Some(eq_times.iter().sum::<f64>() / eq_times.len() as f64)
        },
        equilibrium_found_fraction: eq_times.len() as f64 / n,
        phase_occupancy: PhaseOccupancy {
            evolvable: metrics.iter().map(|m| m.occupancy.0).sum::<f64>() / n,
            robust: metrics.iter().map(|m| m.occupancy.1).sum::<f64>() / n,
            brittle: metrics.iter().map(|m| m.occupancy.2).sum::<f64>() / n,
        },
    }
}

/// Run both controllers on one scenario with the same seed.
pub fn paired_runs(
    scenario: &ScenarioScript,
    baseline: &ControllerConfig,
    candidate: &ControllerConfig,
    spec: &SimulationSpec,
    seed: u64,
    steps: u32,
    dt: f64,
) -> Result<(Trace, Trace)> {
    let a = run_closed_loop(scenario, baseline, spec, seed, steps, dt)?;
    let b = run_closed_loop(scenario, candidate, spec, seed, steps, dt)?;
    Ok((a, b))
}

/// Run the paired comparison over an ensemble and bootstrap a 95% CI on the
/// time-in-optimal difference (candidate minus baseline).
///
/// Scenario `i` uses the seed derived from `master_seed` and `i` for both
/// arms, so the arms face identical noise realizations. Ensemble members run
/// in parallel; aggregation is index-ordered, so reports are reproducible
/// regardless of worker count.
pub fn compare_controllers(
    ensemble: &[ScenarioScript],
    baseline: &ControllerConfig,
    candidate: &ControllerConfig,
    spec: &SimulationSpec,
    master_seed: u64,
    steps: u32,
    dt: f64,
    report: &ReportConfig,
) -> Result<ComparisonReport> {
    if ensemble.is_empty() {
        return Err(Error::parameter("ensemble", "must not be empty"));
    }
    let pairs: Vec<(RunMetrics, RunMetrics)> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, scenario)| {
            let seed = rng::derive_seed(master_seed, i as u64);
            let (a, b) = paired_runs(scenario, baseline, candidate, spec, seed, steps, dt)?;
            Ok((
                run_metrics(&a, report.optimal_performance_threshold),
                run_metrics(&b, report.optimal_performance_threshold),
            ))
        })
        .collect::<Result<_>>()?;

    let (base_metrics, cand_metrics): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let diffs: Vec<f64> = base_metrics
        .iter()
        .zip(&cand_metrics)
        .map(|(a, b)| b.time_in_optimal - a.time_in_optimal)
        .collect();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let (ci95_low, ci95_high) = bootstrap_ci(&diffs, report.bootstrap_resamples, master_seed);

    Ok(ComparisonReport {
        ensemble_size: ensemble.len(),
        master_seed,
        steps,
        dt,
        optimal_performance_threshold: report.optimal_performance_threshold,
        baseline: summarize(baseline, &base_metrics),
        candidate: summarize(candidate, &cand_metrics),
        time_in_optimal_difference: mean_diff,
        bootstrap_resamples: report.bootstrap_resamples,
        ci95_low,
        ci95_high,
    })
}

/// Percentile bootstrap CI of the mean of `samples`.
fn bootstrap_ci(samples: &[f64], resamples: u32, master_seed: u64) -> (f64, f64) {
    let mut rng = rng::substream(master_seed, rng::STREAM_BOOTSTRAP);
    let mut means = Vec::with_capacity(resamples as usize);
    for _ in 0..resamples {
        let total: f64 = (0..samples.len())
            .map(|_| samples[rng.random_range(0..samples.len())])
            .sum();
        means.push(total / samples.len() as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = |q: f64| (((means.len() - 1) as f64) * q).round() as usize;
    (means[idx(0.025)], means[idx(0.975)])
}
