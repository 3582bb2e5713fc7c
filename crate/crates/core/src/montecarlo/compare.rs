//! Verdicts of bound predictions against ensemble statistics.

use serde::Serialize;

use super::stats::z_quantile;
use super::EnsembleStats;
use crate::error::{Error, Result};
use crate::predict::{BoundPrediction, Evidence, PredictionValue};

/// Fraction of trials a probability-`1 - 1/n^3` bracket must contain.
pub const BRACKET_COVERAGE: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Fewer than two trials: no confidence limit can be formed.
    Insufficient,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Insufficient => "INSUFFICIENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub theorem_id: String,
    pub t: u64,
    pub verdict: Verdict,
    pub mean: f64,
    pub std_error: f64,
    /// The confidence limit that was compared (lower or upper depending on
    /// the prediction's evidence mode); the mean itself for points.
    pub limit: f64,
    /// Bound value (slack already subtracted), bracket lower end, or point.
    pub threshold: f64,
    pub inside_fraction: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Pass)
    }
}

/// Compares every prediction against the ensemble at its budget.
///
/// * Lower bounds with [`Evidence::Significant`] pass when the one-sided
///   `1 - alpha` lower confidence limit of the mean is at least the bound;
///   with [`Evidence::NotRejected`] the upper confidence limit is used.
/// * Brackets pass when at least [`BRACKET_COVERAGE`] of the trials and the
///   sample mean lie inside.
/// * Point predictions pass when the mean is within the relative tolerance.
pub fn compare_bounds(stats: &EnsembleStats, predictions: &[BoundPrediction], alpha: f64) -> Result<ComparisonReport> {
    let z = z_quantile(alpha);
    let trials = stats.trials;
    let mut entries = Vec::with_capacity(predictions.len());
    for p in predictions {
        let cs = stats.at(p.t).map_err(|_| Error::CheckpointMismatch(p.t))?;
        let se = cs.std_error(trials);
        let mean = cs.mean;
        let enough = trials >= 2;
        let entry = match p.value {
            PredictionValue::Lower(bound) => {
                let limit = match p.evidence {
                    Evidence::Significant => mean - z * se,
                    Evidence::NotRejected => mean + z * se,
                };
                let verdict = if !enough {
                    Verdict::Insufficient
                } else if limit >= bound {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                ComparisonEntry {
                    theorem_id: p.theorem_id.clone(),
                    t: p.t,
                    verdict,
                    mean,
                    std_error: se,
                    limit,
                    threshold: bound,
                    inside_fraction: None,
                    detail: format!(
                        "{} confidence limit {limit:.6} vs bound {bound:.6}",
                        match p.evidence {
                            Evidence::Significant => "lower",
                            Evidence::NotRejected => "upper",
                        }
                    ),
                }
            }
            PredictionValue::Bracket { lower, upper } => {
                let frac = stats.inside(p.t, lower, upper)? as f64 / trials as f64;
                let mean_inside = lower <= mean && mean <= upper;
                let verdict = if !enough {
                    Verdict::Insufficient
                } else if frac >= BRACKET_COVERAGE && mean_inside {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                ComparisonEntry {
                    theorem_id: p.theorem_id.clone(),
                    t: p.t,
                    verdict,
                    mean,
                    std_error: se,
                    limit: mean,
                    threshold: lower,
                    inside_fraction: Some(frac),
                    detail: format!(
                        "bracket [{lower:.6}, {upper:.6}] holds {:.2}% of trials; mean {}",
                        100.0 * frac,
                        if mean_inside { "inside" } else { "outside" }
                    ),
                }
            }
            PredictionValue::Point { value, rel_tol } => {
                let rel = (mean - value).abs() / value.abs().max(f64::MIN_POSITIVE);
                let verdict = if !enough {
                    Verdict::Insufficient
                } else if rel <= rel_tol {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                ComparisonEntry {
                    theorem_id: p.theorem_id.clone(),
                    t: p.t,
                    verdict,
                    mean,
                    std_error: se,
                    limit: mean,
                    threshold: value,
                    inside_fraction: None,
                    detail: format!(
                        "mean {mean:.6} vs point {value:.6}: relative deviation {:.4}% (tolerance {:.2}%)",
                        100.0 * rel,
                        100.0 * rel_tol
                    ),
                }
            }
        };
        entries.push(entry);
    }
    Ok(ComparisonReport {
        alpha,
        trials,
        master_seed: stats.master_seed,
        entries,
    })
}
