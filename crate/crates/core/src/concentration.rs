//! Gain law of LeadingOnes improvements, exponential tail bounds and the
//! high-probability fitness bracket.

use rand::Rng;
use serde::Serialize;

use crate::drift::{exact_lo_drift, improvement_probability};
use crate::error::{Error, Result};
use crate::potential::{exact_lo_potential, PotentialTable};

/// Largest distance for which the gain law is kept as exact dyadic rationals.
pub const DYADIC_LIMIT: usize = 63;

/// Law of the distance decrease `G` of an improving step at distance `x`.
///
/// `P(G = i) = 2^-i` for `i < x` and `P(G = x) = 2^(1-x)`: the first zero
/// flips and each following free-rider bit is an independent fair coin.
#[derive(Debug, Clone, PartialEq)]
pub struct GainPmf {
    x: usize,
    probs: Vec<f64>,
    /// Numerators over `2^(x-1)` when `x <= DYADIC_LIMIT`.
    numerators: Option<Vec<u64>>,
}

pub fn gain_pmf(x: usize) -> Result<GainPmf> {
    if x == 0 {
        return Err(Error::InvalidParameter(
            "gain law needs a positive distance".into(),
        ));
    }
    if x <= DYADIC_LIMIT {
        let numerators: Vec<u64> = (1..=x)
            .map(|i| if i < x { 1u64 << (x - 1 - i) } else { 1 })
            .collect();
        let denom = 2f64.powi(x as i32 - 1);
        let probs = numerators.iter().map(|&k| k as f64 / denom).collect();
        Ok(GainPmf {
            x,
            probs,
            numerators: Some(numerators),
        })
    } else {
        let mut probs: Vec<f64> = (1..x).map(|i| 0.5f64.powi(i as i32)).collect();
        probs.push(0.5f64.powi(x as i32 - 1));
        Ok(GainPmf {
            x,
            probs,
            numerators: None,
        })
    }
}

impl GainPmf {
    pub fn distance(&self) -> usize {
        self.x
    }

    /// `probs()[i - 1] = P(G = i)`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn numerators(&self) -> Option<(&[u64], u32)> {
        self.numerators
            .as_deref()
            .map(|nums| (nums, self.x as u32 - 1))
    }

    /// Whether the probabilities sum to exactly one. Exact in integer
    /// arithmetic for dyadic laws, within 1e-15 otherwise.
    pub fn sums_to_one(&self) -> bool {
        match self.numerators() {
            Some((nums, log2_denom)) => {
                nums.iter().map(|&k| k as u128).sum::<u128>() == 1u128 << log2_denom
            }
            None => (self.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-15,
        }
    }

    pub fn mean(&self) -> f64 {
        match self.numerators() {
            Some((nums, log2_denom)) => {
                let num: u128 = nums
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| (i as u128 + 1) * k as u128)
                    .sum();
                num as f64 / 2f64.powi(log2_denom as i32)
            }
            None => self
                .probs
                .iter()
                .enumerate()
                .map(|(i, p)| (i + 1) as f64 * p)
                .sum(),
        }
    }

    /// Exact numerator of the mean over `2^(x-1)`, for dyadic laws.
    pub fn mean_numerator(&self) -> Option<u128> {
        self.numerators().map(|(nums, _)| {
            nums.iter()
                .enumerate()
                .map(|(i, &k)| (i as u128 + 1) * k as u128)
                .sum()
        })
    }

    /// Draws a gain: one for the flipped zero plus the run of free riders.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut g = 1;
        while g < self.x && rng.random::<bool>() {
            g += 1;
        }
        g
    }
}

/// Closed-form `E[exp(eta G)]` for an improving step at distance `x`.
pub fn gain_mgf(x: usize, eta: f64) -> Result<f64> {
    if x == 0 {
        return Err(Error::InvalidParameter(
            "gain law needs a positive distance".into(),
        ));
    }
    let half = eta.exp() / 2.0;
    if (half - 1.0).abs() < 1e-12 {
        return Err(Error::MgfPole);
    }
    Ok((half.powi(x as i32) * (1.0 - eta.exp()) + half) / (1.0 - half))
}

/// Parameters of the two-branch martingale-difference tail bound: the mgf of
/// each difference is at most `exp(lambda^2 nu_i^2 / 2)` for `lambda` in
/// `[1/b1, 1/b2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBoundParams {
    pub b1: f64,
    pub b2: f64,
    pub nu_sq_sum: f64,
}

impl TailBoundParams {
    pub fn new(b1: f64, b2: f64, nu_sq_sum: f64) -> Result<Self> {
        if !(b2 > 0.0 && b2 < b1) {
            return Err(Error::InvalidParameter(format!(
                "tail bound needs 0 < b2 < b1, got b1 = {b1}, b2 = {b2}"
            )));
        }
        if !(nu_sq_sum >= 0.0 && nu_sq_sum.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "variance proxy must be finite and non-negative, got {nu_sq_sum}"
            )));
        }
        Ok(Self { b1, b2, nu_sq_sum })
    }

    /// Smallest deviation for which the bound says anything.
    pub fn validity_threshold(&self) -> f64 {
        if self.b1.is_infinite() {
            0.0
        } else {
            self.nu_sq_sum / self.b1
        }
    }

    pub fn branch_point(&self) -> f64 {
        self.nu_sq_sum / self.b2
    }
}

/// Bound on `P(Y_t - Y_0 >= d)` for a supermartingale (or the mirrored lower
/// tail for a submartingale), capped at 1.
pub fn martingale_tail(d: f64, params: &TailBoundParams) -> Result<f64> {
    let threshold = params.validity_threshold();
    if d < threshold || d.is_nan() {
        return Err(Error::TailBelowThreshold { d, threshold });
    }
    let raw = if d >= params.branch_point() {
        (-d / (2.0 * params.b2)).exp()
    } else {
        (-d * d / (2.0 * params.nu_sq_sum)).exp()
    };
    Ok(raw.min(1.0))
}

/// Smallest deviation `d` at which [`martingale_tail`] is at most `target`.
pub fn tail_quantile(params: &TailBoundParams, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail target {target} outside (0, 1)"
        )));
    }
    let log_inv = -target.ln();
    let quadratic = (2.0 * params.nu_sq_sum * log_inv).sqrt();
    if quadratic < params.branch_point() {
        return Ok(quadratic.max(params.validity_threshold()));
    }
    Ok((2.0 * params.b2 * log_inv).max(params.branch_point()))
}

/// Tail of the LeadingOnes optimization time around its mean:
/// `P(|T - E[T]| >= d) <= 4 exp(-d^2 / (20 e^2 n^3))` for `0 <= d <= 2n^2`,
/// capped at 1.
pub fn djwz_tail(n: usize, d: f64) -> Result<f64> {
    let nf = n as f64;
    let hi = 2.0 * nf * nf;
    if !(0.0..=hi).contains(&d) {
        return Err(Error::Domain {
            what: "optimization-time tail",
            value: d,
            lo: 0.0,
            hi,
        });
    }
    Ok(djwz_tail_formula(n, d))
}

/// The formula of [`djwz_tail`] without the `d <= 2n^2` domain check, for
/// callers that want the expression itself (the theorem says nothing there).
pub fn djwz_tail_formula(n: usize, d: f64) -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    (4.0 * (-d * d / (20.0 * e2 * (n as f64).powi(3))).exp()).min(1.0)
}

/// Exact expected optimization time of the (1+1) EA on LeadingOnes:
/// `(n^2 - n)/2 * ((1 + 1/(n-1))^n - 1)`.
pub fn expected_opt_time_lo(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "expected optimization time needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let growth = (nf * (1.0 / (nf - 1.0)).ln_1p()).exp_m1();
    Ok((nf * nf - nf) / 2.0 * growth)
}

/// High-probability bracket for the LeadingOnes value after `t` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitnessBracket {
    pub n: usize,
    pub t: u64,
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    /// Values before clamping to `[0, n]`; `raw_upper` is infinite when the
    /// upper logarithm's argument is not positive.
    pub raw_lower: f64,
    pub raw_upper: f64,
    pub confidence: f64,
}

impl FitnessBracket {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// Point prediction at the bracket's centre, `-n ln(1 - 2t/n^2)`.
    pub fn point(&self) -> f64 {
        bracket_formula(self.n, self.t, 0.0)
            .map(|(lo, _)| lo)
            .unwrap_or(f64::NAN)
    }
}

/// The unclamped bracket `(-n ln(1 - 2t/n^2 + eps), -n ln(1 - 2t/n^2 - eps))`
/// with `eps = c sqrt(t ln n) / n^(3/2)`, without the validity window.
pub fn bracket_formula(n: usize, t: u64, c: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let tf = t as f64;
    let eps = c * (tf * nf.ln()).sqrt() / nf.powf(1.5);
    let centre = 1.0 - 2.0 * tf / (nf * nf);
    let lower_arg = centre + eps;
    if lower_arg <= 0.0 {
        return Err(Error::LogArgument(lower_arg));
    }
    let upper_arg = centre - eps;
    let upper = if upper_arg > 0.0 {
        -nf * upper_arg.ln()
    } else {
        f64::INFINITY
    };
    Ok((-nf * lower_arg.ln(), upper))
}

/// Budget window of the bracket: `10 n ln n <= t <= (e-1)n^2/2 - c' n^(3/2) sqrt(ln n)`.
pub fn bracket_window(n: usize, window_c: f64) -> (f64, f64) {
    let nf = n as f64;
    let lo = 10.0 * nf * nf.ln();
    let hi = (std::f64::consts::E - 1.0) * nf * nf / 2.0 - window_c * nf.powf(1.5) * nf.ln().sqrt();
    (lo, hi)
}

pub fn fitness_bracket(n: usize, t: u64, c: f64) -> Result<FitnessBracket> {
    fitness_bracket_with(n, t, c, 1.0)
}

pub fn fitness_bracket_with(n: usize, t: u64, c: f64, window_c: f64) -> Result<FitnessBracket> {
    if n < 2 || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bracket needs n >= 2 and c >= 0, got n = {n}, c = {c}"
        )));
    }
    let (lo, hi) = bracket_window(n, window_c);
    let tf = t as f64;
    if tf < lo || tf > hi {
        return Err(Error::OutOfRange {
            what: "fitness bracket",
            t: tf,
            lo,
            hi,
        });
    }
    let (raw_lower, raw_upper) = bracket_formula(n, t, c)?;
    let nf = n as f64;
    Ok(FitnessBracket {
        n,
        t,
        c,
        lower: raw_lower.clamp(0.0, nf),
        upper: raw_upper.clamp(0.0, nf),
        raw_lower,
        raw_upper,
        confidence: 1.0 - nf.powi(-3),
    })
}

/// Bracket constant implied by an mgf constant `mgf_c`.
///
/// The per-step variance proxy is `nu^2 = 2 mgf_c n`; the upper tail of the
/// potential uses `b2 = 2en`, `b1 = inf`. The deviation `d` with tail
/// probability `n^-3` is mapped through the closed-form lower bound on the
/// potential into the logarithm's argument, `eps = (2d + 6 n ln n) / n^2`.
pub fn calibrate_bracket_constant(n: usize, t: u64, mgf_c: f64) -> Result<f64> {
    let nf = n as f64;
    let tf = t as f64;
    if t == 0 || n < 2 {
        return Err(Error::InvalidParameter(
            "bracket calibration needs t > 0 and n >= 2".into(),
        ));
    }
    let params = TailBoundParams::new(
        f64::INFINITY,
        2.0 * std::f64::consts::E * nf,
        2.0 * mgf_c * nf * tf,
    )?;
    let d = tail_quantile(&params, nf.powi(-3))?;
    let eps = (2.0 * d + 6.0 * nf * nf.ln()) / (nf * nf);
    Ok(eps * nf.powf(1.5) / (tf * nf.ln()).sqrt())
}

/// Result of the exact mgf scan over all LeadingOnes states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfCheck {
    pub n: usize,
    pub r: f64,
    /// Smallest `c` with `ln E[exp(lambda D)] <= c lambda^2 n` for every state
    /// and grid point, `D = g(X') - g(X) + 1 + r`.
    pub c: f64,
    /// Same constant with `g(X') - g(X)` replaced by its linear majorant
    /// `-G / h(X)`, evaluated through the closed-form gain mgf.
    pub c_linearized: f64,
    pub worst_state: usize,
    pub worst_lambda: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// `points` log-spaced values from `1/n^2` to `1/(2en)`, endpoints included.
pub fn lambda_grid(n: usize, points: usize) -> Vec<f64> {
    let nf = n as f64;
    let lo = 1.0 / (nf * nf);
    let hi = 1.0 / (2.0 * std::f64::consts::E * nf);
    if points <= 1 {
        return vec![hi];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| {
            if k == points - 1 {
                hi
            } else {
                (llo + (lhi - llo) * k as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Scans every non-optimal LeadingOnes state and every `lambda` in the grid,
/// computing the mgf of the compensated potential step exactly.
pub fn verify_mgf_drift_bound(n: usize, lambdas: &[f64], r: f64) -> Result<MgfCheck> {
    if n < 2 {
        return Err(Error::InvalidParameter("mgf check needs n >= 2".into()));
    }
    let g = exact_lo_potential(n)?;
    verify_mgf_with_potential(n, &g, lambdas, r)
}

pub fn verify_mgf_with_potential(
    n: usize,
    g: &PotentialTable,
    lambdas: &[f64],
    r: f64,
) -> Result<MgfCheck> {
    let nf = n as f64;
    let mut best = (0.0f64, 0usize, lambdas.first().copied().unwrap_or(0.0));
    let mut c_linearized = 0.0f64;
    for x in 1..=n {
        let p = improvement_probability(n, x);
        let pmf = gain_pmf(x)?;
        let h = exact_lo_drift(n, x)?;
        let gx = g.value(x);
        for &lambda in lambdas {
            if lambda == 0.0 {
                continue;
            }
            // E[exp(lambda (g(X') - g(X)))] - 1 over the gain law, then mixed
            // with the non-improving outcome.
            let inner_m1: f64 = pmf
                .probs()
                .iter()
                .enumerate()
                .map(|(i, &pj)| pj * (lambda * (g.value(x - (i + 1)) - gx)).exp_m1())
                .sum();
            let log_mgf = lambda * (1.0 + r) + (p * inner_m1).ln_1p();
            let c = log_mgf / (lambda * lambda * nf);
            if c > best.0 {
                best = (c, x, lambda);
            }
            let lin = gain_mgf(x, -lambda / h)? - 1.0;
            let log_lin = lambda * (1.0 + r) + (p * lin).ln_1p();
            c_linearized = c_linearized.max(log_lin / (lambda * lambda * nf));
        }
    }
    let (lambda_min, lambda_max) = lambdas.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| {
        (lo.min(l), hi.max(l))
    });
    Ok(MgfCheck {
        n,
        r,
        c: best.0,
        c_linearized,
        worst_state: best.1,
        worst_lambda: best.2,
        lambda_min,
        lambda_max,
    })
}
