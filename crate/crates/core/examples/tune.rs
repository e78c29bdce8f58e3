//! Scratch calibration harness (not shipped).

use mitsim_core::config::{ControllerChoice, RunConfig};
use mitsim_core::mitigation::{run_closed_loop, ControllerConfig, ThresholdConfig};
use mitsim_core::scenarios;

fn main() {
    let config = RunConfig::default();
    let spec = config.simulation_spec();

    // --- four-step across 50 seeds ---
    let (scenario, expected) = scenarios::four_step();
    let ends = scenario.segment_end_steps();
    let mut fail = 0;
    let mut sample = Vec::new();
    for seed in 0..50u64 {
        let trace = run_closed_loop(
            &scenario,
            &ControllerConfig::Threshold(ThresholdConfig::passive()),
            &spec,
            seed,
            scenario.total_steps(),
            config.dt,
        )
        .unwrap();
        let gauges: Vec<u8> = ends.iter().map(|&i| trace.rows[i as usize].gauge).collect();
        let ps: Vec<f64> = ends.iter().map(|&i| trace.rows[i as usize].performance).collect();
        if seed < 3 {
            sample.push(format!("seed {seed}: gauges {gauges:?} p {ps:?}"));
        }
        if gauges != expected {
            fail += 1;
            if fail < 5 {
                println!("FOUR-STEP FAIL seed {seed}: {gauges:?} p={ps:?}");
            }
        }
    }
    println!("four-step: {}/50 seeds failed", fail);
    for s in sample {
        println!("  {s}");
    }

    // --- power-law contrast ---
    let practice = scenarios::practice_scenario(20).unwrap();
    let shared_seed = 4242u64;
    let t_practice = run_closed_loop(
        &ControllerConfig::Threshold(ThresholdConfig::passive()),
        &spec,
        &practice,
        shared_seed,
        config.dt,
    );
    let _ = t_practice;
}
