//! Drift functions and the iterated one-step map `x -> x - h(x)`.
//!
//! States are fitness distances: 0 is the optimum and the drift `h(x)` is a
//! lower bound on the expected one-step decrease of the distance.

mod iterate;
mod premise;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use iterate::{
    budget_sum, iterate_tilde, iterate_tilde_with, limited_time_bound, tilde_derivative_at_zero,
    Clamp,
};
pub use premise::{check_premises, PremiseReport};

pub trait DriftFunction: Send + Sync {
    fn label(&self) -> &str;

    /// Closed interval on which `h` is defined.
    fn domain(&self) -> (f64, f64);

    /// Formula value without a domain check.
    fn value(&self, x: f64) -> f64;

    fn derivative(&self, _x: f64) -> Option<f64> {
        None
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain {
                what: "drift function",
                value: x,
                lo,
                hi,
            });
        }
        Ok(self.value(x))
    }
}

#[inline]
fn keep_rate(n: usize) -> f64 {
    1.0 - 1.0 / n as f64
}

/// `(1 - 1/n)^(n - x) * x / n`, the OneMax drift lower bound at distance `x`.
#[derive(Debug, Clone)]
pub struct OneMaxDrift {
    n: usize,
}

impl OneMaxDrift {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "OneMax drift needs n >= 2");
        Self { n }
    }
}

impl DriftFunction for OneMaxDrift {
    fn label(&self) -> &str {
        "onemax"
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.n as f64)
    }

    fn value(&self, x: f64) -> f64 {
        let n = self.n as f64;
        keep_rate(self.n).powf(n - x) * x / n
    }

    fn derivative(&self, x: f64) -> Option<f64> {
        let n = self.n as f64;
        let q = keep_rate(self.n);
        Some(q.powf(n - x) / n * (1.0 - x * q.ln()))
    }
}

/// `(1 - 1/n)^(n - x) * 2 / n`, the drift of the adjusted LeadingOnes distance.
#[derive(Debug, Clone)]
pub struct LeadingOnesDrift {
    n: usize,
}

impl LeadingOnesDrift {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "LeadingOnes drift needs n >= 2");
        Self { n }
    }
}

impl DriftFunction for LeadingOnesDrift {
    fn label(&self) -> &str {
        "leadingones"
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.n as f64)
    }

    fn value(&self, x: f64) -> f64 {
        let n = self.n as f64;
        keep_rate(self.n).powf(n - x) * 2.0 / n
    }

    fn derivative(&self, x: f64) -> Option<f64> {
        Some(-keep_rate(self.n).ln() * self.value(x))
    }
}

/// Exact LeadingOnes distance drift `(2 - 2^(1-x)) (1 - 1/n)^(n - x) / n`,
/// extended to real `x`. Non-decreasing but not convex.
#[derive(Debug, Clone)]
pub struct ExactLeadingOnesDrift {
    n: usize,
}

impl ExactLeadingOnesDrift {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "LeadingOnes drift needs n >= 2");
        Self { n }
    }
}

impl DriftFunction for ExactLeadingOnesDrift {
    fn label(&self) -> &str {
        "leadingones-exact"
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.n as f64)
    }

    fn value(&self, x: f64) -> f64 {
        let n = self.n as f64;
        (2.0 - (1.0 - x).exp2()) * keep_rate(self.n).powf(n - x) / n
    }

    fn derivative(&self, x: f64) -> Option<f64> {
        let n = self.n as f64;
        let q = keep_rate(self.n);
        let base = q.powf(n - x) / n;
        let free = (1.0 - x).exp2();
        Some(base * (free * std::f64::consts::LN_2 - (2.0 - free) * q.ln()))
    }
}

/// Constant drift `delta` (additive drift).
#[derive(Debug, Clone)]
pub struct ConstantDrift {
    delta: f64,
    domain: (f64, f64),
}

impl ConstantDrift {
    pub fn new(delta: f64, upper: f64) -> Self {
        Self {
            delta,
            domain: (0.0, upper),
        }
    }

    pub fn with_domain(delta: f64, lo: f64, hi: f64) -> Self {
        Self {
            delta,
            domain: (lo, hi),
        }
    }
}

impl DriftFunction for ConstantDrift {
    fn label(&self) -> &str {
        "constant"
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn value(&self, _x: f64) -> f64 {
        self.delta
    }

    fn derivative(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Drift given at integer states 0..=k, linearly interpolated in between.
#[derive(Debug, Clone)]
pub struct TabulatedDrift {
    label: String,
    values: Vec<f64>,
}

impl TabulatedDrift {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(
                "a tabulated drift needs at least two states".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "tabulated drift values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            values,
        })
    }
}

impl DriftFunction for TabulatedDrift {
    fn label(&self) -> &str {
        &self.label
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, (self.values.len() - 1) as f64)
    }

    fn value(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let x = x.clamp(0.0, last as f64);
        let i = (x.floor() as usize).min(last - 1);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

type DriftFactory = fn(usize) -> Arc<dyn DriftFunction>;

/// Shipped drift functions by name; each entry builds the function for a
/// problem size `n`.
pub fn registry() -> BTreeMap<&'static str, DriftFactory> {
    let mut map: BTreeMap<&'static str, DriftFactory> = BTreeMap::new();
    map.insert("onemax", |n| Arc::new(OneMaxDrift::new(n)));
    map.insert("leadingones", |n| Arc::new(LeadingOnesDrift::new(n)));
    map.insert("leadingones-exact", |n| Arc::new(ExactLeadingOnesDrift::new(n)));
    map
}

pub fn lookup(name: &str, n: usize) -> Result<Arc<dyn DriftFunction>> {
    registry()
        .get(name)
        .map(|make| make(n))
        .ok_or_else(|| Error::UnknownStrategy {
            family: "drift function",
            name: name.to_string(),
        })
}

/// Probability that one EA step improves LeadingOnes at distance `x >= 1`:
/// all `n - x` leading ones survive and the first zero flips.
pub fn improvement_probability(n: usize, x: usize) -> f64 {
    keep_rate(n).powi((n - x) as i32) / n as f64
}

/// Exact expected one-step decrease of the LeadingOnes distance at `x`.
pub fn exact_lo_drift(n: usize, x: usize) -> Result<f64> {
    if x < 1 || x > n {
        return Err(Error::Domain {
            what: "exact LeadingOnes drift",
            value: x as f64,
            lo: 1.0,
            hi: n as f64,
        });
    }
    let free_rider_factor = 2.0 - (1.0 - x as f64).exp2();
    Ok(free_rider_factor * keep_rate(n).powi((n - x) as i32) / n as f64)
}
