//! Run configuration: a single TOML document with nested sections, strict
//! validation, and canonical serialization (parse -> serialize -> parse is
//! the identity).

use serde::{Deserialize, Serialize};

use crate::adaptation::PhaseRule;
use crate::error::{Error, Result};
use crate::landscape::{LandscapeSpec, TieRule, FORMAT_VERSION, MAX_LOCI};
use crate::mitigation::{ControllerConfig, LandscapeGuidedConfig, SimulationSpec, ThresholdConfig};
use crate::physiology::{HysteresisRule, MemoryState, PhysiologicalState, RatchetRule};
use crate::scenarios::{self, ReportConfig, ScenarioScript};

/// Tie-breaking choice exposed in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRuleChoice {
    LowestIndex,
    SeededRandom,
}

/// Scenario selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    FourStep,
    Nonstationary,
    Practice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeSection {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub walk_tie_rule: TieRuleChoice,
    pub steps_per_walk_move: u32,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        LandscapeSection {
            n: 12,
            k: 3,
            seed: 0,
            walk_tie_rule: TieRuleChoice::LowestIndex,
            steps_per_walk_move: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysiologySection {
    pub mu: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub hysteresis_offset: f64,
    pub capacity: [f64; 2],
    pub habituation_rates: [f64; 3],
    pub indicators: [f64; 3],
}

impl Default for PhysiologySection {
    fn default() -> Self {
        PhysiologySection {
            mu: 0.5,
            sigma: 0.15,
            amplitude: 0.65,
            hysteresis_offset: 0.0,
            capacity: [0.1, 0.9],
            habituation_rates: [0.3, 0.5, 0.7],
            indicators: [0.5, 0.5, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessmentSection {
    pub robust_radius: f64,
    pub balance_band: f64,
    pub fc_window: usize,
}

impl Default for AssessmentSection {
    fn default() -> Self {
        AssessmentSection {
            robust_radius: 0.15,
            balance_band: 0.1,
            fc_window: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub threshold: ThresholdConfig,
    pub landscape: LandscapeGuidedConfig,
}

impl Default for ControllerSection {
    fn default() -> Self {
        ControllerSection {
            threshold: ThresholdConfig::default(),
            landscape: LandscapeGuidedConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    pub volatility: f64,
    pub ensemble_count: usize,
    pub trials: u32,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            kind: ScenarioKind::Nonstationary,
            volatility: 0.5,
            ensemble_count: 100,
            trials: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub optimal_performance_threshold: f64,
    pub bootstrap_resamples: u32,
    pub write_traces: bool,
}

impl Default for ReportSection {
    fn default() -> Self {
        let base = ReportConfig::default();
        ReportSection {
            optimal_performance_threshold: base.optimal_performance_threshold,
            bootstrap_resamples: base.bootstrap_resamples,
            write_traces: false,
        }
    }
}

/// The complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    pub seed: u64,
    pub steps: u32,
    pub dt: f64,
    pub landscape: LandscapeSection,
    pub physiology: PhysiologySection,
    pub memory: MemoryState,
    pub hysteresis: HysteresisRule,
    pub ratchet: RatchetRule,
    pub assessment: AssessmentSection,
    pub controller: ControllerSection,
    pub scenario: ScenarioSection,
    pub report: ReportSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format_version: FORMAT_VERSION,
            seed: 42,
            steps: 600,
            dt: 0.1,
            landscape: LandscapeSection::default(),
            physiology: PhysiologySection::default(),
            memory: MemoryState::default(),
            hysteresis: HysteresisRule::default(),
            ratchet: RatchetRule::default(),
            assessment: AssessmentSection::default(),
            controller: ControllerSection::default(),
            scenario: ScenarioSection::default(),
            report: ReportSection::default(),
        }
    }
}

impl RunConfig {
    /// Check every bound declared by the domain modules before running.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::parameter(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.format_version),
            ));
        }
        if self.steps < 1 {
            return Err(Error::parameter("steps", "must be >= 1"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::parameter("dt", "must be > 0"));
        }
        if self.landscape.n < 1 || self.landscape.n > MAX_LOCI {
            return Err(Error::parameter(
                "landscape.n",
                format!("must satisfy 1 <= n <= {MAX_LOCI}, got {}", self.landscape.n),
            ));
        }
        if self.landscape.k >= self.landscape.n {
            return Err(Error::parameter(
                "landscape.k",
                format!(
                    "must satisfy k <= n-1 (n = {}), got k = {}",
                    self.landscape.n, self.landscape.k
                ),
            ));
        }
        if self.landscape.steps_per_walk_move < 1 {
            return Err(Error::parameter("landscape.steps_per_walk_move", "must be >= 1"));
        }
        self.physiological_state().validate()?;
        self.memory.validate()?;
        if self.hysteresis.band_width_threshold < 0.0 {
            return Err(Error::parameter("hysteresis.band_width_threshold", "must be >= 0"));
        }
        if self.hysteresis.delta < 0.0 {
            return Err(Error::parameter("hysteresis.delta", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.hysteresis.band_level) {
            return Err(Error::parameter("hysteresis.band_level", "must lie in [0, 1]"));
        }
        if self.ratchet.threshold < 0.0 {
            return Err(Error::parameter("ratchet.threshold", "must be >= 0"));
        }
        if self.ratchet.widen_factor < 0.0 {
            return Err(Error::parameter("ratchet.widen_factor", "must be >= 0"));
        }
        if self.assessment.robust_radius < 0.0 {
            return Err(Error::parameter("assessment.robust_radius", "must be >= 0"));
        }
        if self.assessment.balance_band < 0.0 {
            return Err(Error::parameter("assessment.balance_band", "must be >= 0"));
        }
        if self.assessment.fc_window < 1 {
            return Err(Error::parameter("assessment.fc_window", "must be >= 1"));
        }
        self.controller.threshold.validate()?;
        self.controller.landscape.validate()?;
        if !(self.scenario.volatility >= 0.0) {
            return Err(Error::parameter("scenario.volatility", "must be >= 0"));
        }
        if self.scenario.ensemble_count < 1 {
            return Err(Error::parameter("scenario.ensemble_count", "must be >= 1"));
        }
        if self.scenario.trials < 3 {
            return Err(Error::parameter("scenario.trials", "must be >= 3"));
        }
        if !(0.0..=1.0).contains(&self.report.optimal_performance_threshold) {
            return Err(Error::parameter(
                "report.optimal_performance_threshold",
                "must lie in [0, 1]",
            ));
        }
        if self.report.bootstrap_resamples < 1 {
            return Err(Error::parameter("report.bootstrap_resamples", "must be >= 1"));
        }
        Ok(())
    }

    fn physiological_state(&self) -> PhysiologicalState {
        PhysiologicalState {
            indicators: self.physiology.indicators,
            mu: self.physiology.mu,
            sigma: self.physiology.sigma,
            amplitude: self.physiology.amplitude,
            hysteresis_offset: self.physiology.hysteresis_offset,
            capacity_bounds: (self.physiology.capacity[0], self.physiology.capacity[1]),
            habituation_rates: self.physiology.habituation_rates,
        }
    }

    /// Assemble the simulation spec a closed-loop run needs.
    pub fn simulation_spec(&self) -> SimulationSpec {
        SimulationSpec {
            landscape: LandscapeSpec {
                n: self.landscape.n,
                k: self.landscape.k,
                seed: self.landscape.seed,
                format_version: FORMAT_VERSION,
            },
            physiology: self.physiological_state(),
            memory: self.memory.clone(),
            hysteresis: self.hysteresis,
            ratchet: self.ratchet,
            phase_rule: PhaseRule {
                robust_radius: self.assessment.robust_radius,
                balance_band: self.assessment.balance_band,
            },
            fc_window: self.assessment.fc_window,
            tie_rule: match self.landscape.walk_tie_rule {
                TieRuleChoice::LowestIndex => TieRule::LowestIndex,
                // The embedded seed is a placeholder; closed-loop runs draw
                // tie breaks from the run seed's walk substream.
                TieRuleChoice::SeededRandom => TieRule::SeededRandom { seed: 0 },
            },
            steps_per_walk_move: self.landscape.steps_per_walk_move,
        }
    }

    pub fn controller(&self, kind: ControllerChoice) -> ControllerConfig {
        match kind {
            ControllerChoice::Threshold => ControllerConfig::Threshold(self.controller.threshold),
            ControllerChoice::Landscape => {
                ControllerConfig::LandscapeGuided(self.controller.landscape)
            }
        }
    }

    /// Build the scenario selected by `[scenario] kind`.
    pub fn scenario_script(&self) -> Result<ScenarioScript> {
        match self.scenario.kind {
            ScenarioKind::FourStep => Ok(scenarios::four_step().0),
            ScenarioKind::Nonstationary => Ok(scenarios::nonstationary_ensemble(
                1,
                self.seed,
                self.scenario.volatility,
            )?
            .remove(0)),
            ScenarioKind::Practice => scenarios::practice_scenario(self.scenario.trials),
        }
    }

    pub fn report_config(&self) -> ReportConfig {
        ReportConfig {
            optimal_performance_threshold: self.report.optimal_performance_threshold,
            bootstrap_resamples: self.report.bootstrap_resamples,
        }
    }
}

/// Controller selection on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerChoice {
    Threshold,
    Landscape,
}

/// Parse and validate a configuration document. An empty document yields
/// pure defaults; unknown keys and violated bounds are rejected with the
/// offending key named.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Canonical serialization; stable key order, suitable for byte-identical
/// round trips.
pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("run configs always serialize")
}
