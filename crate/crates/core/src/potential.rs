//! Variable-drift potentials `g` with slope `1/h`, their inversion, and the
//! expectation bounds that combine a potential with a survival curve.

use serde::Serialize;

use crate::concentration::{djwz_tail, expected_opt_time_lo, gain_pmf};
use crate::drift::{exact_lo_drift, improvement_probability, DriftFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialSource {
    /// `g(x) = xmin/h(xmin) + integral_{xmin}^x 1/h(z) dz`, by quadrature.
    Integral,
    /// `g(a) = sum_{i=1}^a 1/h(i)` on integer states.
    DiscreteSum,
}

/// `g` tabulated on the integer states `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialTable {
    n: usize,
    xmin: f64,
    values: Vec<f64>,
    source: PotentialSource,
}

/// Simpson subintervals per unit of state.
const SIMPSON_PER_UNIT: usize = 10;

fn simpson(h: &dyn DriftFunction, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut k = ((b - a) * SIMPSON_PER_UNIT as f64).ceil() as usize;
    k = k.max(2);
    if k % 2 == 1 {
        k += 1;
    }
    let step = (b - a) / k as f64;
    let f = |z: f64| 1.0 / h.value(z);
    let mut acc = f(a) + f(b);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * step);
    }
    acc * step / 3.0
}

pub fn build_potential(
    h: &dyn DriftFunction,
    xmin: f64,
    n: usize,
    source: PotentialSource,
) -> Result<PotentialTable> {
    if xmin.is_nan() || xmin <= 0.0 || xmin > n as f64 {
        return Err(Error::InvalidParameter(format!(
            "potential needs 0 < xmin <= n, got xmin = {xmin}"
        )));
    }
    let xmin = match source {
        PotentialSource::Integral => xmin,
        PotentialSource::DiscreteSum => 1.0,
    };
    // h must be positive and non-decreasing on [xmin, n] (integer grid)
    let first = xmin.ceil() as usize;
    let mut grid: Vec<f64> = vec![xmin];
    grid.extend((first..=n).map(|i| i as f64).filter(|&x| x > xmin));
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let v = h.eval(x)?;
        if v <= 0.0 {
            return Err(Error::NonPositiveDrift {
                label: h.label().to_string(),
                state: x,
                value: v,
            });
        }
        if let Some((px, pv)) = prev {
            if v < pv {
                return Err(Error::NonMonotoneDrift {
                    label: h.label().to_string(),
                    from: px,
                    to: x,
                });
            }
        }
        prev = Some((x, v));
    }

    let mut values = vec![0.0; n + 1];
    match source {
        PotentialSource::DiscreteSum => {
            let mut acc = 0.0;
            for (a, slot) in values.iter_mut().enumerate().skip(1) {
                acc += 1.0 / h.value(a as f64);
                *slot = acc;
            }
        }
        PotentialSource::Integral => {
            let mut acc = xmin / h.value(xmin);
            let mut left = xmin;
            for (a, slot) in values.iter_mut().enumerate().skip(first) {
                let right = a as f64;
                acc += simpson(h, left, right);
                left = right;
                *slot = acc;
            }
        }
    }
    Ok(PotentialTable {
        n,
        xmin,
        values,
        source,
    })
}

/// Discrete potential of the (1+1) EA on LeadingOnes built from the exact
/// drift: `g(a) = sum_{i=1}^a 1/E[X_t - X_{t+1} | X_t = i]`.
pub fn exact_lo_potential(n: usize) -> Result<PotentialTable> {
    let mut values = vec![0.0; n + 1];
    let mut acc = 0.0;
    for (a, slot) in values.iter_mut().enumerate().skip(1) {
        acc += 1.0 / exact_lo_drift(n, a)?;
        *slot = acc;
    }
    Ok(PotentialTable {
        n,
        xmin: 1.0,
        values,
        source: PotentialSource::DiscreteSum,
    })
}

impl PotentialTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn source(&self) -> PotentialSource {
        self.source
    }

    #[inline]
    pub fn value(&self, a: usize) -> f64 {
        self.values[a]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values[self.n]
    }
}

/// Smallest integer state `a` with `g(a) >= y`.
pub fn invert_potential(g: &PotentialTable, y: f64) -> Result<usize> {
    if !(0.0..=g.max()).contains(&y) {
        return Err(Error::Domain {
            what: "potential inverse",
            value: y,
            lo: 0.0,
            hi: g.max(),
        });
    }
    Ok(g.values.partition_point(|&v| v < y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurvivalProvenance {
    Empirical,
    DjwzLowerBound,
}

impl SurvivalProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            SurvivalProvenance::Empirical => "empirical",
            SurvivalProvenance::DjwzLowerBound => "djwz-lower-bound",
        }
    }
}

/// `P(s < T)` for `s = 0..t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    probs: Vec<f64>,
    provenance: SurvivalProvenance,
}

impl SurvivalCurve {
    pub fn new(probs: Vec<f64>, provenance: SurvivalProvenance) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(
                "survival probabilities must lie in [0, 1]".into(),
            ));
        }
        if probs.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "survival curve must be non-increasing".into(),
            ));
        }
        Ok(Self { probs, provenance })
    }

    /// Curve with every probability equal to one.
    pub fn certain(t: usize, provenance: SurvivalProvenance) -> Self {
        Self {
            probs: vec![1.0; t],
            provenance,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn provenance(&self) -> SurvivalProvenance {
        self.provenance
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// The first `t` entries.
    pub fn truncated(&self, t: usize) -> Self {
        Self {
            probs: self.probs[..t.min(self.probs.len())].to_vec(),
            provenance: self.provenance,
        }
    }
}

/// Upper bound on `E[g(X_t)]`: `g(x0) - sum_s P(s < T)`.
pub fn expected_g_upper_bound(g: &PotentialTable, x0: usize, survival: &SurvivalCurve) -> f64 {
    g.value(x0) - survival.total()
}

/// Upper bound on `E[X_t]` under additive drift `delta`: `x0 - delta sum_s P(s < T)`.
pub fn additive_bound(x0: f64, delta: f64, survival: &SurvivalCurve) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "additive drift must be positive, got {delta}"
        )));
    }
    Ok(x0 - delta * survival.total())
}

/// Closed-form sandwich `(lower, upper)` for the discrete LeadingOnes
/// potential built from `h(i) = (1 - 1/n)^(n-i) 2/n`:
///
/// * upper `n/2 (n-1) (1-1/n)^-n (1 - (1-1/n)^a)`
/// * lower `e n^2 / 2 (1 - (1-1/n)^a) - 3 n ln n`
///
/// The lower value is returned unfloored; it is negative for small `a`.
pub fn g_closed_form_bounds(n: usize, a: usize) -> Result<(f64, f64)> {
    if n < 2 || a > n {
        return Err(Error::InvalidParameter(format!(
            "closed-form potential bounds need n >= 2 and a <= n, got n = {n}, a = {a}"
        )));
    }
    let nf = n as f64;
    let q: f64 = 1.0 - 1.0 / nf;
    let reached = 1.0 - q.powi(a as i32);
    let upper = nf / 2.0 * (nf - 1.0) * q.powi(-(n as i32)) * reached;
    let lower = std::f64::consts::E * nf * nf / 2.0 * reached - 3.0 * nf * nf.ln();
    if lower > upper {
        return Err(Error::InvalidParameter(format!(
            "n = {n} is too small for the potential sandwich at a = {a}"
        )));
    }
    Ok((lower, upper))
}

/// Analytic lower bound on the LeadingOnes survival curve from the
/// optimization-time tail: `P(s < T) >= 1 - 4 exp(-d^2/(20 e^2 n^3))` with
/// `d = E[T] - s`, clamped into the tail bound's domain and floored at 0.
pub fn survival_from_djwz(n: usize, t: u64) -> Result<SurvivalCurve> {
    let expected = expected_opt_time_lo(n)?;
    if t as f64 > expected {
        return Err(Error::OutOfRange {
            what: "analytic survival curve",
            t: t as f64,
            lo: 0.0,
            hi: expected,
        });
    }
    let nf = n as f64;
    let cap = 2.0 * nf * nf;
    let probs = (0..t)
        .map(|s| {
            let d = expected - s as f64;
            if d <= 0.0 {
                return Ok(0.0);
            }
            Ok((1.0 - djwz_tail(n, d.min(cap))?).max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SurvivalCurve {
        probs,
        provenance: SurvivalProvenance::DjwzLowerBound,
    })
}

/// Exact expected one-step decrease of `g` at LeadingOnes distance `i`:
/// `P(improve) * sum_j P(G = j) (g(i) - g(i - j))`.
pub fn g_drift(g: &PotentialTable, i: usize) -> Result<f64> {
    let n = g.n();
    if i == 0 || i > n {
        return Err(Error::Domain {
            what: "potential drift",
            value: i as f64,
            lo: 1.0,
            hi: n as f64,
        });
    }
    let pmf = gain_pmf(i)?;
    let gi = g.value(i);
    let inner: f64 = pmf
        .probs()
        .iter()
        .enumerate()
        .map(|(k, p)| p * (gi - g.value(i - (k + 1))))
        .sum();
    Ok(improvement_probability(n, i) * inner)
}

/// Extremes of the exact potential drift over all non-optimal states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GDriftProfile {
    pub n: usize,
    /// Minimum of the drift over states `1..=n`.
    pub min_drift: f64,
    /// `max n (drift - 1)` over states `i >= log2 n`.
    pub scaled_excess: f64,
    pub worst_state: usize,
}

impl GDriftProfile {
    pub fn excess_constant(&self) -> f64 {
        self.scaled_excess
    }
}

pub fn g_drift_profile(n: usize) -> Result<GDriftProfile> {
    let g = exact_lo_potential(n)?;
    let threshold = (n as f64).log2().ceil() as usize;
    let mut min_drift = f64::INFINITY;
    let mut scaled_excess = f64::NEG_INFINITY;
    let mut worst_state = threshold.max(1);
    for i in 1..=n {
        let d = g_drift(&g, i)?;
        min_drift = min_drift.min(d);
        if i >= threshold {
            let e = n as f64 * (d - 1.0);
            if e > scaled_excess {
                scaled_excess = e;
                worst_state = i;
            }
        }
    }
    Ok(GDriftProfile {
        n,
        min_drift,
        scaled_excess,
        worst_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{ConstantDrift, ExactLeadingOnesDrift, LeadingOnesDrift, OneMaxDrift, TabulatedDrift};

    #[test]
    fn zero_state_has_zero_potential() {
        let g = build_potential(&LeadingOnesDrift::new(10), 1.0, 10, PotentialSource::Integral).unwrap();
        assert_eq!(g.value(0), 0.0);
        let g = build_potential(&LeadingOnesDrift::new(10), 1.0, 10, PotentialSource::DiscreteSum).unwrap();
        assert_eq!(g.value(0), 0.0);
    }

    #[test]
    fn constant_integral_is_linear() {
        for delta in [0.25, 1.0, 2.0] {
            let h = ConstantDrift::new(delta, 20.0);
            let g = build_potential(&h, delta, 20, PotentialSource::Integral).unwrap();
            for a in 1..=20usize {
                if (a as f64) < delta {
                    assert_eq!(g.value(a), 0.0);
                } else {
                    assert!((g.value(a) - a as f64 / delta).abs() < 1e-12, "a = {a}");
                }
            }
        }
    }

    #[test]
    fn integral_matches_closed_form_for_leadingones() {
        // 1/h(z) = (n/2) q^(z-n): integral = (n/2) (q^(x-n) - q^(1-n)) / ln q
        let n = 50;
        let h = LeadingOnesDrift::new(n);
        let g = build_potential(&h, 1.0, n, PotentialSource::Integral).unwrap();
        let q: f64 = 1.0 - 1.0 / n as f64;
        let nf = n as f64;
        for a in 1..=n {
            let x = a as f64;
            let exact = 1.0 / h.value(1.0) + nf / 2.0 * (q.powf(x - nf) - q.powf(1.0 - nf)) / q.ln();
            assert!((g.value(a) - exact).abs() < 1e-8 * exact, "a = {a}");
        }
    }

    #[test]
    fn discrete_leadingones_first_state() {
        let g = build_potential(&LeadingOnesDrift::new(4), 1.0, 4, PotentialSource::DiscreteSum).unwrap();
        assert!((g.value(1) - 2.0 * 64.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone_or_vanishing_drift() {
        let bumpy = TabulatedDrift::new("bumpy", vec![0.0, 1.0, 0.5, 2.0]).unwrap();
        assert!(matches!(
            build_potential(&bumpy, 1.0, 3, PotentialSource::DiscreteSum),
            Err(Error::NonMonotoneDrift { .. })
        ));
        assert!(matches!(
            build_potential(&OneMaxDrift::new(5), 0.0, 5, PotentialSource::Integral),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn tables_are_strictly_increasing_and_invertible() {
        for n in [2usize, 17, 100, 500] {
            let tables = [
                build_potential(&LeadingOnesDrift::new(n), 1.0, n, PotentialSource::DiscreteSum).unwrap(),
                build_potential(&ExactLeadingOnesDrift::new(n), 1.0, n, PotentialSource::Integral).unwrap(),
                build_potential(&OneMaxDrift::new(n), 1.0, n, PotentialSource::Integral).unwrap(),
                exact_lo_potential(n).unwrap(),
            ];
            for g in &tables {
                assert!(g.values().windows(2).all(|w| w[0] < w[1]));
                for a in 1..=n {
                    assert_eq!(invert_potential(g, g.value(a)).unwrap(), a);
                }
            }
        }
    }

    #[test]
    fn inversion_edges() {
        let g = exact_lo_potential(30).unwrap();
        assert_eq!(invert_potential(&g, 0.0).unwrap(), 0);
        assert_eq!(invert_potential(&g, g.max()).unwrap(), 30);
        let mid = 0.5 * (g.value(11) + g.value(12));
        assert_eq!(invert_potential(&g, mid).unwrap(), 12);
        assert!(invert_potential(&g, g.max() * 1.001).is_err());
        assert!(invert_potential(&g, -1.0).is_err());
    }

    #[test]
    fn expectation_bounds() {
        let g = exact_lo_potential(20).unwrap();
        let full = SurvivalCurve::certain(15, SurvivalProvenance::Empirical);
        assert!((expected_g_upper_bound(&g, 12, &full) - (g.value(12) - 15.0)).abs() < 1e-12);
        let empty = SurvivalCurve::certain(0, SurvivalProvenance::Empirical);
        assert_eq!(expected_g_upper_bound(&g, 12, &empty), g.value(12));
        assert_eq!(additive_bound(9.0, 0.5, &full).unwrap(), 9.0 - 7.5);
        assert_eq!(additive_bound(9.0, 0.5, &empty).unwrap(), 9.0);
        assert!(additive_bound(9.0, 0.0, &full).is_err());
    }

    #[test]
    fn additive_leading_term_for_leadingones() {
        let n = 100usize;
        let delta = 2.0 / (std::f64::consts::E * n as f64);
        let t = 2500;
        let full = SurvivalCurve::certain(t, SurvivalProvenance::Empirical);
        let v = additive_bound(n as f64, delta, &full).unwrap();
        assert!((v - (n as f64 - 2.0 * t as f64 / (std::f64::consts::E * n as f64))).abs() < 1e-9);
    }

    #[test]
    fn survival_curve_validation() {
        assert!(SurvivalCurve::new(vec![1.0, 0.5, 0.7], SurvivalProvenance::Empirical).is_err());
        assert!(SurvivalCurve::new(vec![1.2], SurvivalProvenance::Empirical).is_err());
        assert!(SurvivalCurve::new(vec![1.0, 0.9, 0.9, 0.0], SurvivalProvenance::Empirical).is_ok());
    }

    #[test]
    fn closed_form_sandwich_examples() {
        let n = 100;
        let (lo, hi) = g_closed_form_bounds(n, 0).unwrap();
        assert!((lo + 3.0 * 100.0 * (100f64).ln()).abs() < 1e-9);
        assert_eq!(hi, 0.0);
        let g = build_potential(&LeadingOnesDrift::new(n), 1.0, n, PotentialSource::DiscreteSum).unwrap();
        assert!(lo.max(0.0) <= g.value(0) && g.value(0) <= hi);
        let (lo, hi) = g_closed_form_bounds(n, 50).unwrap();
        assert!(lo <= g.value(50) && g.value(50) <= hi * (1.0 + 1e-12));
        assert!(g_closed_form_bounds(n, 101).is_err());
    }

    #[test]
    fn closed_form_sandwich_tightens() {
        let ratio = |n: usize| {
            let a = n / 2;
            let (lo, hi) = g_closed_form_bounds(n, a).unwrap();
            hi / lo
        };
        let (r3, r4) = (ratio(1000), ratio(10_000));
        assert!(r3 > 1.0 && r4 > 1.0);
        assert!(r4 - 1.0 < r3 - 1.0);
    }

    #[test]
    fn djwz_survival_examples() {
        let n = 100;
        let et = expected_opt_time_lo(n).unwrap();
        let t = et.floor() as u64;
        let curve = survival_from_djwz(n, t).unwrap();
        assert_eq!(curve.provenance(), SurvivalProvenance::DjwzLowerBound);
        assert!(curve.probs().windows(2).all(|w| w[1] <= w[0]));
        assert!(survival_from_djwz(n, t + 2).is_err());

        // d clamped at 2n^2 gives 1 - 4 exp(-n/(5e^2))
        let n = 400;
        let et = expected_opt_time_lo(n).unwrap();
        let curve = survival_from_djwz(n, 2).unwrap();
        let d = et.min(2.0 * (n * n) as f64);
        let e2 = std::f64::consts::E.powi(2);
        let expected = 1.0 - 4.0 * (-d * d / (20.0 * e2 * (n as f64).powi(3))).exp();
        assert!((curve.probs()[0] - expected.max(0.0)).abs() < 1e-12);
        // E[T] < 2n^2, so d(s) = E[T] - s never reaches the clamp for s >= 0;
        // at the clamp point itself the bound is 1 - 4 exp(-n/(5e^2)).
        assert!(et < 2.0 * (n * n) as f64);
        let at_clamp = 1.0 - djwz_tail(n, 2.0 * (n * n) as f64).unwrap();
        assert!((at_clamp - (1.0 - 4.0 * (-(n as f64) / (5.0 * e2)).exp())).abs() < 1e-12);
    }

    #[test]
    fn g_drift_is_one_at_first_state() {
        let g = exact_lo_potential(50).unwrap();
        assert!((g_drift(&g, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(g_drift(&g, 0).is_err());
    }

    #[test]
    fn discrete_leadingones_potential_within_closed_form() {
        for n in [50usize, 100, 500, 1000] {
            let g = build_potential(&LeadingOnesDrift::new(n), 1.0, n, PotentialSource::DiscreteSum).unwrap();
            for a in 0..=n {
                let (lo, hi) = g_closed_form_bounds(n, a).unwrap();
                let v = g.value(a);
                assert!(lo.max(0.0) <= v && v <= hi * (1.0 + 1e-12), "n={n} a={a}: {lo} {v} {hi}");
            }
        }
    }

    #[test]
    fn exact_g_drift_is_at_least_one() {
        for n in 2..=200usize {
            let g = exact_lo_potential(n).unwrap();
            for i in 1..=n {
                let d = g_drift(&g, i).unwrap();
                assert!(d >= 1.0 - 1e-12, "n={n} i={i}: {d}");
            }
        }
    }

    #[test]
    fn g_drift_excess_is_order_one_over_n() {
        let profiles: Vec<GDriftProfile> = [100usize, 200, 400, 800]
            .iter()
            .map(|&n| g_drift_profile(n).unwrap())
            .collect();
        let c = profiles.iter().map(|p| p.scaled_excess).fold(0.0, f64::max);
        assert!(c.is_finite() && c < 10.0, "c = {c}");
        for p in &profiles {
            assert!(p.min_drift >= 1.0 - 1e-12);
        }
    }
}
