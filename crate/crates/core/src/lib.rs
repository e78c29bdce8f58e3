//! Deterministic closed-loop mitigation simulator.
//!
//! Agents with an inverted-U arousal/performance response adapt on NK
//! fitness landscapes while a mitigation controller intervenes. Two
//! controllers are built in: a classical threshold controller that boosts
//! arousal back into a band, and a landscape-guided controller that reads
//! the fitness/selection phase portrait and works with the adaptive
//! dynamics instead of against them. Runs are reproducible bit-for-bit from
//! a configuration and a seed.

pub mod adaptation;
pub mod config;
pub mod error;
pub mod landscape;
pub mod mitigation;
pub mod physiology;
pub mod report;
pub mod rng;
pub mod scenarios;

pub use adaptation::{
    classify_phase, equilibrium_times, fitness_coefficient, regime, robustness_indicator,
    selection_coefficient, AdaptiveAssessment, Phase, PhaseRule, Regime,
};
pub use config::{parse_config, serialize_config, ControllerChoice, RunConfig};
pub use error::{Error, Result};
pub use landscape::{
    Autocorrelation, Direction, ExtremumKind, Genotype, Landscape, LandscapeSpec, TieRule,
    WalkPath,
};
pub use mitigation::{
    apply_action, landscape_decide, run_closed_loop, threshold_decide, Action, ControllerConfig,
    LandscapeGuidedConfig, SimulationSpec, ThresholdConfig, Trace,
};
pub use physiology::{gauge_of, Environment, MemoryState, PhysiologicalState};
pub use scenarios::{
    compare_controllers, excursion_times, fit_power_law, four_step, nonstationary_ensemble,
    practice_scenario, ComparisonReport, PowerLawFit, ScenarioScript,
};
