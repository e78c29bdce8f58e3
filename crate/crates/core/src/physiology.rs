//! Agent physiology: arousal indicators, the inverted-U performance curve,
//! gauge discretization, hysteresis, ratchet capacity expansion, and the two
//! memory subsystems.
//!
//! Performance is a Gaussian bump over mean arousal with a vertical
//! hysteresis offset: `p = clamp(offset + A * exp(-(a - mu)^2 / (2 sigma^2)))`.
//! Three indicator channels track the same arousal phenomenon with distinct
//! habituation profiles, so they diverge over time even from identical
//! starting values.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hysteresis offsets are clamped to this symmetric limit.
pub const HYSTERESIS_OFFSET_LIMIT: f64 = 0.2;

/// Number of arousal indicator channels.
pub const INDICATOR_CHANNELS: usize = 3;

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Arousal state of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysiologicalState {
    /// Three indicators of the same phenomenon, each with its own profile.
    pub indicators: [f64; INDICATOR_CHANNELS],
    /// Optimal arousal (peak of the inverted U).
    pub mu: f64,
    /// Width of the performance curve.
    pub sigma: f64,
    /// Peak height of the performance curve, in (0, 1].
    pub amplitude: f64,
    /// Vertical shift accumulated through augmentation events.
    pub hysteresis_offset: f64,
    /// Reachable arousal interval; the ratchet can widen it within [0, 1].
    pub capacity_bounds: (f64, f64),
    /// Per-channel habituation rates (decay of arousal excursions).
    pub habituation_rates: [f64; INDICATOR_CHANNELS],
}

impl Default for PhysiologicalState {
    fn default() -> Self {
        PhysiologicalState {
            indicators: [0.5; INDICATOR_CHANNELS],
            mu: 0.5,
            sigma: 0.15,
            amplitude: 1.0,
            hysteresis_offset: 0.0,
            capacity_bounds: (0.0, 1.0),
            habituation_rates: [0.0; INDICATOR_CHANNELS],
        }
    }
}

impl PhysiologicalState {
    /// Check every declared bound; used when states come from config files.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::parameter("physiology.sigma", "must be > 0"));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::parameter("physiology.amplitude", "must lie in (0, 1]"));
        }
        if self.hysteresis_offset.abs() > HYSTERESIS_OFFSET_LIMIT {
            return Err(Error::parameter(
                "physiology.hysteresis_offset",
                format!("must lie in [-{HYSTERESIS_OFFSET_LIMIT}, {HYSTERESIS_OFFSET_LIMIT}]"),
            ));
        }
        let (lo, hi) = self.capacity_bounds;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(Error::parameter(
                "physiology.capacity_bounds",
                "must satisfy 0 <= lo < hi <= 1",
            ));
        }
        if self.indicators.iter().any(|&x| x < lo || x > hi) {
            return Err(Error::parameter(
                "physiology.indicators",
                "must lie within capacity_bounds",
            ));
        }
        if self.habituation_rates.iter().any(|&r| r < 0.0) {
            return Err(Error::parameter("physiology.habituation_rates", "must be >= 0"));
        }
        Ok(())
    }

    pub fn mean_arousal(&self) -> f64 {
        self.indicators.iter().sum::<f64>() / INDICATOR_CHANNELS as f64
    }

    /// Performance from the inverted-U curve over mean arousal, in [0, 1].
    pub fn performance(&self) -> f64 {
        let a = self.mean_arousal();
        let bump = self.amplitude * (-(a - self.mu).powi(2) / (2.0 * self.sigma * self.sigma)).exp();
        clamp01(self.hysteresis_offset + bump)
    }

    /// Performance the curve would produce at a hypothetical arousal `a`.
    pub fn performance_at(&self, a: f64) -> f64 {
        let bump = self.amplitude * (-(a - self.mu).powi(2) / (2.0 * self.sigma * self.sigma)).exp();
        clamp01(self.hysteresis_offset + bump)
    }

    /// Shift every indicator by `delta`, clamped to capacity.
    pub fn shift_indicators(&mut self, delta: f64) {
        let (lo, hi) = self.capacity_bounds;
        for x in &mut self.indicators {
            *x = (*x + delta).clamp(lo, hi);
        }
    }

    /// Advance the indicators by one time step.
    ///
    /// Each channel relaxes toward `env.drift_bias` (unit base rate plus the
    /// channel's habituation rate, which decays excursions multiplicatively),
    /// then receives Gaussian noise of scale `noise_scale * sqrt(dt)`. The
    /// result is clamped to the capacity bounds.
    pub fn step(&mut self, env: &Environment, dt: f64, rng: &mut ChaCha8Rng) {
        let (lo, hi) = self.capacity_bounds;
        let noise_scale = env.noise_scale * dt.sqrt();
        for (x, &rate) in self.indicators.iter_mut().zip(&self.habituation_rates) {
            let deviation = *x - env.drift_bias;
            let decay = (1.0 - dt * (1.0 + rate)).max(0.0);
            let noise: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
            *x = (env.drift_bias + deviation * decay + noise * noise_scale).clamp(lo, hi);
        }
    }

    /// Width of the arousal interval (inside capacity) where the curve is at
    /// or above `band_level` — the "optimal behavior" band of the response
    /// function.
    pub fn optimal_band_width(&self, band_level: f64) -> f64 {
        let (lo, hi) = self.capacity_bounds;
        let needed = band_level - self.hysteresis_offset;
        if needed <= 0.0 {
            return hi - lo;
        }
        if needed > self.amplitude {
            return 0.0;
        }
        let half = self.sigma * (2.0 * (self.amplitude / needed).ln()).sqrt();
        let band_lo = (self.mu - half).max(lo);
        let band_hi = (self.mu + half).min(hi);
        (band_hi - band_lo).max(0.0)
    }

    /// Apply one hysteresis event: a narrow optimal band shifts the response
    /// curve down, a wide one shifts it up, the boundary leaves it unchanged.
    pub fn apply_hysteresis(&mut self, band_width: f64, rule: &HysteresisRule) {
        let limit = HYSTERESIS_OFFSET_LIMIT;
        if band_width < rule.band_width_threshold {
            self.hysteresis_offset = (self.hysteresis_offset - rule.delta).clamp(-limit, limit);
        } else if band_width > rule.band_width_threshold {
            self.hysteresis_offset = (self.hysteresis_offset + rule.delta).clamp(-limit, limit);
        }
    }

    /// Widen the capacity bounds when the perturbation exceeds the ratchet
    /// threshold; sub-threshold perturbations leave the state untouched.
    pub fn ratchet_perturb(&mut self, magnitude: f64, rule: &RatchetRule) {
        if magnitude > rule.threshold {
            let widen = magnitude * rule.widen_factor;
            self.capacity_bounds.0 = (self.capacity_bounds.0 - widen).max(0.0);
            self.capacity_bounds.1 = (self.capacity_bounds.1 + widen).min(1.0);
        }
    }
}

/// Discretize performance onto the 0..9 gauge.
pub fn gauge_of(p: f64) -> Result<u8> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(
            "performance",
            format!("gauge input must lie in [0, 1], got {p}"),
        ));
    }
    Ok(((10.0 * p).floor() as u8).min(9))
}

/// Hysteresis parameters: the band-width threshold separating downward from
/// upward shifts, the shift per event, and the performance level that
/// defines the optimal band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HysteresisRule {
    pub band_width_threshold: f64,
    pub delta: f64,
    pub band_level: f64,
}

impl Default for HysteresisRule {
    fn default() -> Self {
        HysteresisRule {
            band_width_threshold: 0.3,
            delta: 0.05,
            band_level: 0.5,
        }
    }
}

/// Ratchet parameters: minimum effective magnitude and widening per unit of
/// perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatchetRule {
    pub threshold: f64,
    pub widen_factor: f64,
}

impl Default for RatchetRule {
    fn default() -> Self {
        RatchetRule {
            threshold: 0.2,
            widen_factor: 0.1,
        }
    }
}

/// The two memory subsystems: fast fear conditioning and slow declarative
/// consolidation, with fear acquisition suppressing declarative gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryState {
    pub fear_level: f64,
    pub declarative_level: f64,
    /// Fear acquisition rate; near 1 so a single presentation saturates.
    pub alpha_fear: f64,
    /// Declarative rate; small so consolidation takes tens of presentations.
    pub alpha_decl: f64,
    /// Interference strength of concurrent fear acquisition.
    pub interference: f64,
}

impl Default for MemoryState {
    fn default() -> Self {
        MemoryState {
            fear_level: 0.0,
            declarative_level: 0.0,
            alpha_fear: 0.95,
            alpha_decl: 0.1,
            interference: 0.8,
        }
    }
}

impl MemoryState {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("memory.fear_level", self.fear_level),
            ("memory.declarative_level", self.declarative_level),
            ("memory.alpha_fear", self.alpha_fear),
            ("memory.alpha_decl", self.alpha_decl),
            ("memory.interference", self.interference),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::parameter(name, "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Apply `count` presentations of a stimulus. Fearful presentations
    /// drive fear toward 1 almost immediately; declarative memory always
    /// accrues, scaled down by whatever fear was acquired in the same step.
    pub fn consolidate(&mut self, fearful: bool, count: u32) {
        for _ in 0..count {
            let fear_gain = if fearful {
                (1.0 - self.fear_level) * self.alpha_fear
            } else {
                0.0
            };
            self.fear_level = clamp01(self.fear_level + fear_gain);
            let suppression = 1.0 - self.interference * fear_gain;
            self.declarative_level = clamp01(
                self.declarative_level + (1.0 - self.declarative_level) * self.alpha_decl * suppression,
            );
        }
    }
}

/// Environmental drive on the physiology: degradation and stimulus clarity
/// feed the selection coefficient, drift and noise shape the indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Degree of masking in the stimulus channel, in [0, 1].
    pub degradation: f64,
    /// Control stimulus clarity, in [0, 1].
    pub stimulus_clarity: f64,
    /// Arousal level the indicators relax toward.
    pub drift_bias: f64,
    /// Scale of the per-step Gaussian arousal noise.
    pub noise_scale: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            degradation: 0.0,
            stimulus_clarity: 1.0,
            drift_bias: 0.5,
            noise_scale: 0.01,
        }
    }
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.degradation) {
            return Err(Error::parameter("environment.degradation", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.stimulus_clarity) {
            return Err(Error::parameter(
                "environment.stimulus_clarity",
                "must lie in [0, 1]",
            ));
        }
        if self.noise_scale < 0.0 {
            return Err(Error::parameter("environment.noise_scale", "must be >= 0"));
        }
        Ok(())
    }
}
