//! Fitness/selection coefficients, phase-portrait classification, and
//! regime/equilibrium analysis of paired fitness-selection series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for regime and equilibrium detection; scaled by the
/// largest absolute series value so results are unit-insensitive.
pub const REGIME_TOLERANCE_REL: f64 = 1e-6;

/// Adaptive phase of the system in the fitness-selection plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Evolvable,
    Robust,
    Brittle,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Evolvable => "Evolvable",
            Phase::Robust => "Robust",
            Phase::Brittle => "Brittle",
        }
    }
}

/// Point classification plus the three adaptability degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveAssessment {
    pub f_c: f64,
    pub s_c: f64,
    pub phase: Phase,
    /// Evolvability surplus; positive only in the Evolvable phase.
    pub e_d: f64,
    /// Robustness degree, 1 at perfect fitness-selection balance.
    pub r_d: f64,
    /// Brittleness surplus; positive only in the Brittle phase.
    pub b_d: f64,
}

/// Geometry of the phase portrait: the radius of the robust region around
/// the origin and the half-width of the balance band around `f_c = s_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRule {
    pub robust_radius: f64,
    pub balance_band: f64,
}

impl Default for PhaseRule {
    fn default() -> Self {
        PhaseRule {
            robust_radius: 0.15,
            balance_band: 0.1,
        }
    }
}

/// Min-max normalized fitness coefficient of a single measurement against
/// sample bounds.
pub fn fitness_coefficient(x_n: f64, x_min: f64, x_max: f64) -> Result<f64> {
    if !(x_max > x_min) {
        return Err(Error::DegenerateRange(format!(
            "fitness coefficient needs x_max > x_min, got [{x_min}, {x_max}]"
        )));
    }
    if !(x_n >= x_min && x_n <= x_max) {
        return Err(Error::domain(
            "x_n",
            format!("measurement {x_n} outside sample bounds [{x_min}, {x_max}]"),
        ));
    }
    Ok((x_n - x_min) / (x_max - x_min))
}

/// Selection coefficient: control stimulus clarity minus degradation.
pub fn selection_coefficient(c_s: f64, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c_s) {
        return Err(Error::domain("c_s", format!("must lie in [0, 1], got {c_s}")));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::domain("d", format!("must lie in [0, 1], got {d}")));
    }
    Ok(c_s - d)
}

/// Classify a (f_c, s_c) point.
///
/// Robust when the point sits near the origin or near the `f_c = s_c`
/// balance line; otherwise fitness surplus means Evolvable and selection
/// surplus means Brittle.
pub fn classify_phase(f_c: f64, s_c: f64, rule: &PhaseRule) -> Result<AdaptiveAssessment> {
    if !(0.0..=1.0).contains(&f_c) {
        return Err(Error::domain("f_c", format!("must lie in [0, 1], got {f_c}")));
    }
    if !(-1.0..=1.0).contains(&s_c) {
        return Err(Error::domain("s_c", format!("must lie in [-1, 1], got {s_c}")));
    }
    let gap = f_c - s_c;
    let radial = (f_c * f_c + s_c * s_c).sqrt();
    let phase = if radial <= rule.robust_radius || gap.abs() <= rule.balance_band {
        Phase::Robust
    } else if gap > rule.balance_band {
        Phase::Evolvable
    } else {
        Phase::Brittle
    };
    let e_d = if phase == Phase::Evolvable {
        (gap - rule.balance_band).max(0.0)
    } else {
        0.0
    };
    let b_d = if phase == Phase::Brittle {
        (-gap - rule.balance_band).max(0.0)
    } else {
        0.0
    };
    let r_d = (1.0 - gap.abs()).clamp(0.0, 1.0);
    Ok(AdaptiveAssessment {
        f_c,
        s_c,
        phase,
        e_d,
        r_d,
        b_d,
    })
}

/// Dynamic regime at one sample of the paired series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Selection outruns fitness: environmental sampling / gradient descent.
    Sampling,
    /// Fitness outruns selection: consolidation / gradient ascent.
    Consolidation,
    /// The derivatives balance.
    Equilibrium,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Sampling => "Sampling",
            Regime::Consolidation => "Consolidation",
            Regime::Equilibrium => "Equilibrium",
        }
    }
}

/// Per-point regime labels; `degenerate` marks an all-equilibrium result
/// (e.g. identical series).
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeLabels {
    pub labels: Vec<Regime>,
    pub degenerate: bool,
}

fn check_series(f: &[f64], s: &[f64], dt: f64) -> Result<()> {
    if f.len() != s.len() {
        return Err(Error::Shape(format!(
            "series lengths differ: {} vs {}",
            f.len(),
            s.len()
        )));
    }
    if f.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "regime analysis needs at least 3 samples, got {}",
            f.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::parameter("dt", "must be > 0"));
    }
    Ok(())
}

/// Central-difference derivative (forward/backward at the ends).
fn derivative(series: &[f64], dt: f64) -> Vec<f64> {
    let n = series.len();
    let mut d = Vec::with_capacity(n);
    d.push((series[1] - series[0]) / dt);
    for i in 1..n - 1 {
        d.push((series[i + 1] - series[i - 1]) / (2.0 * dt));
    }
    d.push((series[n - 1] - series[n - 2]) / dt);
    d
}

fn tolerance(f: &[f64], s: &[f64]) -> f64 {
    let scale = f
        .iter()
        .chain(s)
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    REGIME_TOLERANCE_REL * scale
}

/// Classify each sample of the paired series as Sampling, Consolidation, or
/// Equilibrium by comparing dS/dt against dF/dt.
pub fn regime(f: &[f64], s: &[f64], dt: f64) -> Result<RegimeLabels> {
    check_series(f, s, dt)?;
    let df = derivative(f, dt);
    let ds = derivative(s, dt);
    let tol = tolerance(f, s);
    let labels: Vec<Regime> = df
        .iter()
        .zip(&ds)
        .map(|(&df_i, &ds_i)| {
            let diff = ds_i - df_i;
            if diff > tol {
                Regime::Sampling
            } else if diff < -tol {
                Regime::Consolidation
            } else {
                Regime::Equilibrium
            }
        })
        .collect();
    let degenerate = labels.iter().all(|&r| r == Regime::Equilibrium);
    Ok(RegimeLabels { labels, degenerate })
}

/// Times where dF/dt = dS/dt.
///
/// Sign changes of `g = dF/dt - dS/dt` are located by linear interpolation;
/// runs of samples with `|g|` within tolerance are reported once, at the
/// midpoint of the run.
pub fn equilibrium_times(f: &[f64], s: &[f64], dt: f64) -> Result<Vec<f64>> {
    check_series(f, s, dt)?;
    let df = derivative(f, dt);
    let ds = derivative(s, dt);
    let g: Vec<f64> = df.iter().zip(&ds).map(|(a, b)| a - b).collect();
    let tol = tolerance(f, s);
    let time = |i: usize| i as f64 * dt;

    let mut times = Vec::new();
    let mut plateau_start: Option<usize> = None;
    for i in 0..g.len() {
        if g[i].abs() <= tol {
            plateau_start.get_or_insert(i);
        } else if let Some(start) = plateau_start.take() {
            times.push((time(start) + time(i - 1)) / 2.0);
        }
        if i > 0 && g[i - 1].abs() > tol && g[i].abs() > tol && g[i - 1].signum() != g[i].signum() {
            let frac = g[i - 1].abs() / (g[i - 1].abs() + g[i].abs());
            times.push(time(i - 1) + frac * dt);
        }
    }
    if let Some(start) = plateau_start {
        times.push((time(start) + time(g.len() - 1)) / 2.0);
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(times)
}

/// Robustness from the first equilibrium time: immediate equilibrium gives
/// 1, later equilibria decay toward 0, and absence (`+inf`) maps to 0.
pub fn robustness_indicator(t_eq: f64) -> Result<f64> {
    if t_eq.is_nan() || t_eq < 0.0 {
        return Err(Error::domain(
            "t_eq",
            format!("equilibrium time must be >= 0 (or +inf), got {t_eq}"),
        ));
    }
    if t_eq.is_infinite() {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + t_eq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fitness_coefficient_identities() {
        assert_abs_diff_eq!(fitness_coefficient(5.0, 0.0, 10.0).unwrap(), 0.5);
        assert_abs_diff_eq!(fitness_coefficient(2.0, 2.0, 9.0).unwrap(), 0.0);
        assert_abs_diff_eq!(fitness_coefficient(9.0, 2.0, 9.0).unwrap(), 1.0);
        assert!(matches!(
            fitness_coefficient(1.0, 3.0, 3.0),
            Err(Error::DegenerateRange(_))
        ));
        assert!(fitness_coefficient(11.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn fitness_coefficient_is_affine_invariant() {
        let cases = [(5.0, 0.0, 10.0), (0.7, 0.2, 1.4), (-3.0, -8.0, 2.0)];
        for (x, lo, hi) in cases {
            let base = fitness_coefficient(x, lo, hi).unwrap();
            for (scale, shift) in [(2.0, 1.0), (0.5, -3.0), (7.3, 0.01)] {
                let t =
                    fitness_coefficient(x * scale + shift, lo * scale + shift, hi * scale + shift)
                        .unwrap();
                assert_abs_diff_eq!(t, base, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn selection_coefficient_examples() {
        assert_abs_diff_eq!(selection_coefficient(1.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(selection_coefficient(0.8, 0.3).unwrap(), 0.5);
        assert_abs_diff_eq!(selection_coefficient(0.5, 0.5).unwrap(), 0.0);
        assert!(selection_coefficient(1.2, 0.0).is_err());
        assert!(selection_coefficient(0.5, -0.1).is_err());
    }

    #[test]
    fn phase_classification_examples() {
        let rule = PhaseRule::default();
        let origin = classify_phase(0.0, 0.0, &rule).unwrap();
        assert_eq!(origin.phase, Phase::Robust);
        assert_eq!(origin.e_d, 0.0);
        assert_eq!(origin.b_d, 0.0);

        let evolvable = classify_phase(0.9, 0.1, &rule).unwrap();
        assert_eq!(evolvable.phase, Phase::Evolvable);
        assert_abs_diff_eq!(evolvable.e_d, 0.7, epsilon = 1e-12);
        assert_eq!(evolvable.b_d, 0.0);

        let brittle = classify_phase(0.1, 0.9, &rule).unwrap();
        assert_eq!(brittle.phase, Phase::Brittle);
        assert_abs_diff_eq!(brittle.b_d, 0.7, epsilon = 1e-12);
        assert_eq!(brittle.e_d, 0.0);

        assert!(classify_phase(1.1, 0.0, &rule).is_err());
        assert!(classify_phase(0.5, -1.5, &rule).is_err());
    }

    #[test]
    fn at_most_one_surplus_is_positive() {
        let rule = PhaseRule::default();
        for i in 0..=20 {
            for j in 0..=40 {
                let f = i as f64 / 20.0;
                let s = j as f64 / 20.0 - 1.0;
                let a = classify_phase(f, s, &rule).unwrap();
                assert_eq!(a.e_d * a.b_d, 0.0);
                assert!(a.r_d >= 0.0 && a.r_d <= 1.0);
                assert!((0.0..=1.0).contains(&a.f_c));
            }
        }
    }

    #[test]
    fn swapping_coordinates_swaps_evolvable_and_brittle() {
        let rule = PhaseRule::default();
        for i in 0..=20 {
            for j in 0..=20 {
                let f = i as f64 / 20.0;
                let s = j as f64 / 20.0;
                let a = classify_phase(f, s, &rule).unwrap();
                let b = classify_phase(s, f, &rule).unwrap();
                let expected = match a.phase {
                    Phase::Evolvable => Phase::Brittle,
                    Phase::Brittle => Phase::Evolvable,
                    Phase::Robust => Phase::Robust,
                };
                assert_eq!(b.phase, expected);
                assert_abs_diff_eq!(a.e_d, b.b_d, epsilon = 1e-15);
                assert_abs_diff_eq!(a.r_d, b.r_d, epsilon = 1e-15);
            }
        }
    }

    fn sampled(f: impl Fn(f64) -> f64, dt: f64, t_max: f64) -> Vec<f64> {
        let n = (t_max / dt).round() as usize;
        (0..=n).map(|i| f(i as f64 * dt)).collect()
    }

    #[test]
    fn regime_labels_linear_examples() {
        let dt = 0.01;
        let f = sampled(|t| t, dt, 1.0);
        let s = sampled(|t| 2.0 * t, dt, 1.0);
        let labels = regime(&f, &s, dt).unwrap();
        assert!(labels.labels.iter().all(|&r| r == Regime::Sampling));
        assert!(!labels.degenerate);

        let labels = regime(&s, &f, dt).unwrap();
        assert!(labels.labels.iter().all(|&r| r == Regime::Consolidation));

        let labels = regime(&f, &f.clone(), dt).unwrap();
        assert!(labels.labels.iter().all(|&r| r == Regime::Equilibrium));
        assert!(labels.degenerate);

        assert!(regime(&f[..2], &s[..2], dt).is_err());
        assert!(regime(&f, &s[..f.len() - 1], dt).is_err());
    }

    #[test]
    fn equilibrium_crossing_on_quadratic_vs_linear() {
        for dt in [1e-2, 1e-3] {
            let f = sampled(|t| t * t, dt, 1.0);
            let s = sampled(|t| t, dt, 1.0);
            let times = equilibrium_times(&f, &s, dt).unwrap();
            assert_eq!(times.len(), 1, "dt = {dt}: {times:?}");
            assert!((times[0] - 0.5).abs() <= dt, "dt = {dt}: {}", times[0]);
        }
    }

    #[test]
    fn parallel_lines_report_full_interval_plateau() {
        let dt = 0.01;
        let f = sampled(|t| t, dt, 1.0);
        let s = sampled(|t| t + 1.0, dt, 1.0);
        let times = equilibrium_times(&f, &s, dt).unwrap();
        assert_eq!(times.len(), 1);
        assert_abs_diff_eq!(times[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn diverging_lines_have_no_equilibrium() {
        let dt = 0.01;
        let f = sampled(|t| t, dt, 1.0);
        let s = sampled(|t| 2.0 * t, dt, 1.0);
        assert!(equilibrium_times(&f, &s, dt).unwrap().is_empty());
    }

    #[test]
    fn reported_times_sit_in_or_between_regime_segments() {
        // Smooth oscillating pair: crossings either land inside an
        // Equilibrium-labelled run or exactly on a Sampling/Consolidation
        // boundary.
        let dt = 1e-3;
        let f = sampled(|t| (3.0 * t).sin(), dt, 2.0);
        let s = sampled(|t| t, dt, 2.0);
        let times = equilibrium_times(&f, &s, dt).unwrap();
        assert!(!times.is_empty());
        let labels = regime(&f, &s, dt).unwrap().labels;
        for &t_eq in &times {
            let i = (t_eq / dt).floor() as usize;
            let j = (i + 1).min(labels.len() - 1);
            let ok = labels[i] == Regime::Equilibrium
                || labels[j] == Regime::Equilibrium
                || labels[i] != labels[j];
            assert!(ok, "t_eq = {t_eq} not at a regime boundary");
        }
    }

    #[test]
    fn robustness_indicator_examples() {
        assert_abs_diff_eq!(robustness_indicator(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(robustness_indicator(1.0).unwrap(), 0.5);
        assert_eq!(robustness_indicator(f64::INFINITY).unwrap(), 0.0);
        assert!(robustness_indicator(-0.5).is_err());
        assert!(robustness_indicator(f64::NAN).is_err());
    }
}
