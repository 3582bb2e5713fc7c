//! Closed-form fixed-budget predictions (Theorems 3.2, 3.5, 3.6, 4.3, 5.1).
//!
//! Every `O(1)` / `o(t)` term of the paper becomes a named slack constant.
//! Callers pass a [`Constants`] map; missing keys take the documented
//! defaults from [`default_constants`], and every prediction records the
//! values it actually used.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::Arc;

use serde::Serialize;

use crate::concentration::{
    bracket_formula, calibrate_bracket_constant, fitness_bracket_with, lambda_grid,
    verify_mgf_drift_bound,
};
use crate::drift::{iterate_tilde, OneMaxDrift};
use crate::error::{Error, Result};
use crate::fitness::Problem;

pub type Constants = BTreeMap<String, f64>;

/// Absolute slack of the `n/2 + t/(2 sqrt e) - O(1)` OneMax bound.
pub const THM35_ABS_SLACK: &str = "thm35_abs_slack";
/// Relative slack (per unit of budget) standing in for the `(1 - o(1))` factor.
pub const THM35_REL_SLACK: &str = "thm35_rel_slack";
/// The `O(1)` of both LeadingOnes bounds of Theorem 3.6.
pub const LO_SLACK: &str = "lo_slack";
/// The `O(1)` of Theorem 4.3.
pub const THM43_SLACK: &str = "thm43_slack";
/// Constant `c` of the `O(sqrt(t log n) / n^(3/2))` bracket term. When
/// absent it is calibrated from [`MGF_C`].
pub const THM51_C: &str = "thm51_c";
/// Constant `c'` of the bracket's upper budget limit.
pub const THM51_WINDOW_C: &str = "thm51_window_c";
/// Relative tolerance for comparing the Theorem 5.1(b) point prediction.
pub const THM51_POINT_TOL: &str = "thm51_point_rel_tol";
/// Minimal constant of the exact mgf scan (Lemmas 5.3/5.5), computed on
/// demand for the problem size when absent.
pub const MGF_C: &str = "mgf_c";
/// Number of log-spaced grid points used when the mgf constant is computed.
pub const MGF_GRID_POINTS: usize = 24;

pub fn default_constants() -> Constants {
    [
        (THM35_ABS_SLACK, 0.0),
        (THM35_REL_SLACK, 0.02),
        (LO_SLACK, 2.0),
        (THM43_SLACK, 2.0),
        (THM51_WINDOW_C, 1.0),
        (THM51_POINT_TOL, 0.03),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// The defaults overlaid with the caller's values; for LeadingOnes the mgf
/// constant is filled in too, so repeated predictions at one `n` share it.
pub fn resolve_constants(problem: Problem, n: usize, overrides: &Constants) -> Result<Constants> {
    let mut c = default_constants();
    c.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    if problem == Problem::LeadingOnes && !c.contains_key(THM51_C) && !c.contains_key(MGF_C) && n >= 2 {
        c.insert(MGF_C.to_string(), mgf_constant(n)?);
    }
    Ok(c)
}

/// Minimal `c` of the exact mgf scan with `r = 0` over `[1/n^2, 1/(2en)]`.
pub fn mgf_constant(n: usize) -> Result<f64> {
    Ok(verify_mgf_drift_bound(n, &lambda_grid(n, MGF_GRID_POINTS), 0.0)?.c)
}

fn constant(constants: &Constants, key: &str) -> f64 {
    constants
        .get(key)
        .copied()
        .or_else(|| default_constants().get(key).copied())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionValue {
    /// `E[V_t] >= value` (slack already subtracted).
    Lower(f64),
    /// High-probability bracket for `V_t`, clamped to `[0, n]`.
    Bracket { lower: f64, upper: f64 },
    /// Point prediction of `E[V_t]` with a relative tolerance.
    Point { value: f64, rel_tol: f64 },
}

/// How a lower bound is compared against an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    /// The one-sided lower confidence limit of the mean must clear the bound.
    Significant,
    /// The bound must not be rejected: the upper confidence limit of the mean
    /// must clear it (used for exact-expectation inequalities such as
    /// Theorem 3.2, where the mean may sit on the bound).
    NotRejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPrediction {
    pub theorem_id: String,
    pub n: usize,
    pub t: u64,
    pub value: PredictionValue,
    /// The slack already folded into `value` (0 when none applies).
    pub slack: f64,
    pub constants: BTreeMap<String, f64>,
    pub evidence: Evidence,
}

impl BoundPrediction {
    fn lower(id: &str, n: usize, t: u64, raw: f64, slack: f64, used: &[(&str, f64)]) -> Self {
        Self {
            theorem_id: id.to_string(),
            n,
            t,
            value: PredictionValue::Lower(raw - slack),
            slack,
            constants: used.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            evidence: Evidence::Significant,
        }
    }

    /// Lower bound value, or the bracket's lower end, or the point value.
    pub fn primary(&self) -> f64 {
        match self.value {
            PredictionValue::Lower(v) => v,
            PredictionValue::Bracket { lower, .. } => lower,
            PredictionValue::Point { value, .. } => value,
        }
    }
}

pub trait BoundPredictor: Send + Sync {
    fn id(&self) -> &'static str;
    fn problem(&self) -> Problem;
    /// Closed budget range on which the prediction is claimed.
    fn validity(&self, n: usize, constants: &Constants) -> (f64, f64);
    fn evaluate(&self, n: usize, t: u64, constants: &Constants) -> Result<BoundPrediction>;

    fn predict(&self, n: usize, t: u64, constants: &Constants) -> Result<BoundPrediction> {
        let (lo, hi) = self.validity(n, constants);
        let tf = t as f64;
        if tf < lo || tf > hi {
            return Err(Error::OutOfRange {
                what: self.id(),
                t: tf,
                lo,
                hi,
            });
        }
        self.evaluate(n, t, constants)
    }
}

fn lo_log_limit(n: usize) -> f64 {
    let nf = n as f64;
    (E - 1.0) * nf * nf / 2.0 - nf.powf(1.5)
}

fn lo_additive_limit(n: usize) -> f64 {
    let nf = n as f64;
    (E - 1.0) * nf * nf / 2.0 - nf.powf(1.5) * nf.ln()
}

/// Theorem 3.5, first case: `n/2 + t/(2 sqrt e) - (abs + rel t)` for `t <= n`.
pub struct Thm35SqrtE;

impl BoundPredictor for Thm35SqrtE {
    fn id(&self) -> &'static str {
        "thm35_sqrt_e"
    }
    fn problem(&self) -> Problem {
        Problem::OneMax
    }
    fn validity(&self, n: usize, _: &Constants) -> (f64, f64) {
        (0.0, n as f64)
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let (abs, rel) = (constant(c, THM35_ABS_SLACK), constant(c, THM35_REL_SLACK));
        let tf = t as f64;
        let raw = n as f64 / 2.0 + tf / (2.0 * E.sqrt());
        Ok(BoundPrediction::lower(
            self.id(),
            n,
            t,
            raw,
            abs + rel * tf,
            &[(THM35_ABS_SLACK, abs), (THM35_REL_SLACK, rel)],
        ))
    }
}

/// Theorem 3.5, "furthermore": `n (1 - exp(-t/(en))/2)` for all `t`.
pub struct Thm35Exp;

impl BoundPredictor for Thm35Exp {
    fn id(&self) -> &'static str {
        "thm35_exp"
    }
    fn problem(&self) -> Problem {
        Problem::OneMax
    }
    fn validity(&self, _: usize, _: &Constants) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn evaluate(&self, n: usize, t: u64, _: &Constants) -> Result<BoundPrediction> {
        let nf = n as f64;
        let raw = nf * (1.0 - (-(t as f64) / (E * nf)).exp() / 2.0);
        Ok(BoundPrediction::lower(self.id(), n, t, raw, 0.0, &[]))
    }
}

/// Theorem 3.2 for OneMax: `n - h~^t(n/2)` with the OneMax drift function.
pub struct OneMaxIterated;

impl BoundPredictor for OneMaxIterated {
    fn id(&self) -> &'static str {
        "thm32_onemax_iterated"
    }
    fn problem(&self) -> Problem {
        Problem::OneMax
    }
    fn validity(&self, _: usize, _: &Constants) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn evaluate(&self, n: usize, t: u64, _: &Constants) -> Result<BoundPrediction> {
        let h = OneMaxDrift::new(n);
        let nf = n as f64;
        let raw = nf - iterate_tilde(&h, nf / 2.0, t)?;
        let mut p = BoundPrediction::lower(self.id(), n, t, raw, 0.0, &[]);
        p.evidence = Evidence::NotRejected;
        Ok(p)
    }
}

/// Theorem 3.6, first case: `2t/n - O(1)`.
///
/// The paper claims it for `t = O(n^(3/2))`; no finite cut-off is implied, so
/// no range is enforced here.
pub struct Thm36Linear;

impl BoundPredictor for Thm36Linear {
    fn id(&self) -> &'static str {
        "thm36_linear"
    }
    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }
    fn validity(&self, _: usize, _: &Constants) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let slack = constant(c, LO_SLACK);
        let raw = 2.0 * t as f64 / n as f64;
        Ok(BoundPrediction::lower(self.id(), n, t, raw, slack, &[(LO_SLACK, slack)]))
    }
}

/// Theorem 3.6, third case: `n ln(1 + 2t/n^2) - O(1)` for
/// `t <= (e-1)n^2/2 - n^(3/2)`.
pub struct Thm36Log;

impl BoundPredictor for Thm36Log {
    fn id(&self) -> &'static str {
        "thm36_log"
    }
    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }
    fn validity(&self, n: usize, _: &Constants) -> (f64, f64) {
        (0.0, lo_log_limit(n))
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let slack = constant(c, LO_SLACK);
        let nf = n as f64;
        let raw = nf * (2.0 * t as f64 / (nf * nf)).ln_1p();
        Ok(BoundPrediction::lower(self.id(), n, t, raw, slack, &[(LO_SLACK, slack)]))
    }
}

/// Theorem 4.3: `2t/(en) - O(1)` for `t <= (e-1)n^2/2 - n^(3/2) ln n`.
pub struct Thm43Additive;

impl BoundPredictor for Thm43Additive {
    fn id(&self) -> &'static str {
        "thm43_additive"
    }
    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }
    fn validity(&self, n: usize, _: &Constants) -> (f64, f64) {
        (0.0, lo_additive_limit(n))
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let slack = constant(c, THM43_SLACK);
        let raw = 2.0 * t as f64 / (E * n as f64);
        Ok(BoundPrediction::lower(self.id(), n, t, raw, slack, &[(THM43_SLACK, slack)]))
    }
}

/// The bracket constant to use at `(n, t)` and the constants that produced it.
fn bracket_constant(n: usize, t: u64, c: &Constants) -> Result<(f64, Vec<(&'static str, f64)>)> {
    if let Some(&v) = c.get(THM51_C) {
        return Ok((v, vec![(THM51_C, v)]));
    }
    let mgf = match c.get(MGF_C) {
        Some(&v) => v,
        None => mgf_constant(n)?,
    };
    let v = calibrate_bracket_constant(n, t, mgf)?;
    Ok((v, vec![(MGF_C, mgf), (THM51_C, v)]))
}

fn bracket_validity(n: usize, c: &Constants) -> (f64, f64) {
    crate::concentration::bracket_window(n, constant(c, THM51_WINDOW_C))
}

/// Theorem 5.1(a): the probability-`1 - 1/n^3` bracket for `V_t`.
pub struct Thm51Bracket;

impl BoundPredictor for Thm51Bracket {
    fn id(&self) -> &'static str {
        "thm51_bracket"
    }
    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }
    fn validity(&self, n: usize, c: &Constants) -> (f64, f64) {
        bracket_validity(n, c)
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let window_c = constant(c, THM51_WINDOW_C);
        let (bc, mut used) = bracket_constant(n, t, c)?;
        let b = fitness_bracket_with(n, t, bc, window_c)?;
        used.push((THM51_WINDOW_C, window_c));
        Ok(BoundPrediction {
            theorem_id: self.id().to_string(),
            n,
            t,
            value: PredictionValue::Bracket {
                lower: b.lower,
                upper: b.upper,
            },
            slack: 0.0,
            constants: used.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            evidence: Evidence::Significant,
        })
    }
}

/// Theorem 5.1(b) as stated: `E[V_t] ~ -n ln(1 - 2t/n^2)`.
pub struct Thm51Point;

impl BoundPredictor for Thm51Point {
    fn id(&self) -> &'static str {
        "thm51_point"
    }
    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }
    fn validity(&self, n: usize, c: &Constants) -> (f64, f64) {
        bracket_validity(n, c)
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let tol = constant(c, THM51_POINT_TOL);
        let (value, _) = bracket_formula(n, t, 0.0)?;
        Ok(BoundPrediction {
            theorem_id: self.id().to_string(),
            n,
            t,
            value: PredictionValue::Point {
                value,
                rel_tol: tol,
            },
            slack: 0.0,
            constants: [(THM51_POINT_TOL.to_string(), tol)].into_iter().collect(),
            evidence: Evidence::Significant,
        })
    }
}

/// `n ln(1 + 2t/n^2)`: the point prediction obtained when the logarithm in
/// the proof of Theorem 5.1 is simplified without the sign slip (see the
/// decisions ledger). Not one of the paper's stated results.
pub struct Thm51Corrected;

impl BoundPredictor for Thm51Corrected {
    fn id(&self) -> &'static str {
        "thm51_corrected_point"
    }
    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }
    fn validity(&self, n: usize, c: &Constants) -> (f64, f64) {
        bracket_validity(n, c)
    }
    fn evaluate(&self, n: usize, t: u64, c: &Constants) -> Result<BoundPrediction> {
        let tol = constant(c, THM51_POINT_TOL);
        let nf = n as f64;
        Ok(BoundPrediction {
            theorem_id: self.id().to_string(),
            n,
            t,
            value: PredictionValue::Point {
                value: nf * (2.0 * t as f64 / (nf * nf)).ln_1p(),
                rel_tol: tol,
            },
            slack: 0.0,
            constants: [(THM51_POINT_TOL.to_string(), tol)].into_iter().collect(),
            evidence: Evidence::Significant,
        })
    }
}

/// Shipped predictors by id.
pub fn registry() -> BTreeMap<&'static str, Arc<dyn BoundPredictor>> {
    let all: Vec<Arc<dyn BoundPredictor>> = vec![
        Arc::new(Thm35SqrtE),
        Arc::new(Thm35Exp),
        Arc::new(OneMaxIterated),
        Arc::new(Thm36Linear),
        Arc::new(Thm36Log),
        Arc::new(Thm43Additive),
        Arc::new(Thm51Bracket),
        Arc::new(Thm51Point),
        Arc::new(Thm51Corrected),
    ];
    all.into_iter().map(|p| (p.id(), p)).collect()
}

pub fn lookup(id: &str) -> Result<Arc<dyn BoundPredictor>> {
    registry()
        .get(id)
        .cloned()
        .ok_or_else(|| Error::UnknownStrategy {
            family: "bound predictor",
            name: id.to_string(),
        })
}

/// Predictors that apply to `problem`, in id order.
pub fn for_problem(problem: Problem) -> Vec<Arc<dyn BoundPredictor>> {
    registry()
        .into_values()
        .filter(|p| p.problem() == problem)
        .collect()
}

/// Theorem 3.5 lower bounds on the OneMax value; the first case is included
/// only when `t` lies in its regime.
pub fn predict_onemax_fitness(n: usize, t: u64, constants: &Constants) -> Result<Vec<BoundPrediction>> {
    let mut out = Vec::new();
    if let Ok(p) = Thm35SqrtE.predict(n, t, constants) {
        out.push(p);
    }
    out.push(Thm35Exp.predict(n, t, constants)?);
    Ok(out)
}

/// Theorem 3.6 lower bounds on the LeadingOnes value. Errors when `t` is
/// beyond the logarithmic bound's range.
pub fn predict_lo_fitness(n: usize, t: u64, constants: &Constants) -> Result<Vec<BoundPrediction>> {
    let log = Thm36Log.predict(n, t, constants)?;
    Ok(vec![Thm36Linear.predict(n, t, constants)?, log])
}

/// Theorem 4.3 lower bound on the LeadingOnes value.
pub fn predict_lo_additive(n: usize, t: u64, constants: &Constants) -> Result<BoundPrediction> {
    Thm43Additive.predict(n, t, constants)
}
