//! Mixed-strategy algebra: strategy weights, barycentric composition of
//! `(D, gamma_tilde)` pairs over a pattern of attack cycles, and the
//! no-advantage bound as a checkable report.

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticMetrics;
use crate::error::{Error, Result};

/// Tolerance for the no-advantage comparison.
pub const NO_ADVANTAGE_TOL: f64 = 1e-12;

/// One strategy's contribution to a mixed pattern.
///
/// `gamma_tilde` is the long-run apparent revenue rate in reward-per-`tau0`
/// units; numerically it equals the apparent hashrate `q_tilde` because
/// `q_tilde = gamma_tilde * tau0 / reward`. The weight `mu` is the expected
/// number of official blocks per cycle, `e_duration / d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub d: f64,
    pub gamma_tilde: f64,
    /// Expected cycle duration in `tau0` units.
    pub e_duration: f64,
    pub mu: f64,
}

impl StrategySummary {
    pub fn new(d: f64, gamma_tilde: f64, e_duration: f64) -> Result<Self> {
        Ok(Self { d, gamma_tilde, e_duration, mu: weight(e_duration, d)? })
    }

    pub fn from_metrics(metrics: &AnalyticMetrics) -> Self {
        Self {
            d: metrics.delta,
            gamma_tilde: metrics.apparent_hashrate,
            e_duration: metrics.e_duration,
            mu: metrics.e_duration / metrics.delta,
        }
    }
}

/// Weight of a strategy: expected official blocks per attack cycle.
pub fn weight(e_duration: f64, d: f64) -> Result<f64> {
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::NonPositiveInput { name: "difficulty adjustment", value: d });
    }
    if e_duration <= 0.0 || !e_duration.is_finite() {
        return Err(Error::NonPositiveInput { name: "expected duration", value: e_duration });
    }
    Ok(e_duration / d)
}

/// Compose a pattern of strategies: `(D, gamma_tilde)` is the barycenter of
/// the components weighted by `mu`. The result is again a summary, so
/// composition nests.
pub fn compose(pattern: &[StrategySummary]) -> Result<StrategySummary> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let mu: f64 = pattern.iter().map(|s| s.mu).sum();
    let d = pattern.iter().map(|s| s.mu * s.d).sum::<f64>() / mu;
    let gamma_tilde = pattern.iter().map(|s| s.mu * s.gamma_tilde).sum::<f64>() / mu;
    let e_duration = pattern.iter().map(|s| s.e_duration).sum();
    Ok(StrategySummary { d, gamma_tilde, e_duration, mu: e_duration / d })
}

/// Result of checking the no-advantage bound on one pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoAdvantageReport {
    pub composed_gamma_tilde: f64,
    pub max_component_gamma_tilde: f64,
    /// Composed rate does not exceed the best component.
    pub bounded: bool,
    /// Composed rate equals the best component within tolerance.
    pub attains_max: bool,
    /// Equality is expected exactly when every component shares the max.
    pub equality_expected: bool,
    pub holds: bool,
}

/// Check that mixing never beats the best component: the composed
/// `gamma_tilde` stays below the maximum, with equality exactly when all
/// components share it.
pub fn no_advantage_check(pattern: &[StrategySummary]) -> Result<NoAdvantageReport> {
    let composed = compose(pattern)?;
    let max = pattern.iter().map(|s| s.gamma_tilde).fold(f64::NEG_INFINITY, f64::max);
    let bounded = composed.gamma_tilde <= max + NO_ADVANTAGE_TOL;
    let attains_max = (composed.gamma_tilde - max).abs() <= NO_ADVANTAGE_TOL;
    let equality_expected = pattern.iter().all(|s| (s.gamma_tilde - max).abs() <= NO_ADVANTAGE_TOL);
    Ok(NoAdvantageReport {
        composed_gamma_tilde: composed.gamma_tilde,
        max_component_gamma_tilde: max,
        bounded,
        attains_max,
        equality_expected,
        holds: bounded && (attains_max == equality_expected),
    })
}
