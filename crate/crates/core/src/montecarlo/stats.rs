//! The fixed statistical tests of the verification suite (alpha = 0.01).

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Significance level used throughout.
pub const ALPHA: f64 = 0.01;

/// Upper `1 - alpha` quantile of the standard normal.
pub fn z_quantile(alpha: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha)
}

/// Sample mean and unbiased variance (0 for a single value).
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Type-7 quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub significant: bool,
}

/// Asymptotic `c(alpha)` of the two-sample Kolmogorov–Smirnov test,
/// `sqrt(-ln(alpha/2)/2)`; 1.628 at alpha = 0.01.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> TestOutcome {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs non-empty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let critical = ks_coefficient(alpha) * ((na + nb) / (na * nb)).sqrt();
    TestOutcome {
        statistic: d,
        critical,
        significant: d > critical,
    }
}

/// Chi-square test of homogeneity for two samples of counts over the same
/// categories. Adjacent categories are merged until every expected count is
/// at least 5.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64], alpha: f64) -> TestOutcome {
    assert_eq!(a.len(), b.len(), "count vectors must cover the same categories");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let expected_min = |ca: f64, cb: f64| {
        let col = ca + cb;
        (col * na / total).min(col * nb / total)
    };
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        acc.0 += x as f64;
        acc.1 += y as f64;
        if expected_min(acc.0, acc.1) >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    let df = bins.len().saturating_sub(1);
    if df == 0 {
        return TestOutcome {
            statistic: 0.0,
            critical: f64::INFINITY,
            significant: false,
        };
    }
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let col = x + y;
        for (obs, row) in [(x, na), (y, nb)] {
            let e = col * row / total;
            stat += (obs - e) * (obs - e) / e;
        }
    }
    let critical = ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha);
    TestOutcome {
        statistic: stat,
        critical,
        significant: stat > critical,
    }
}

/// Chi-square goodness-of-fit of observed counts against probabilities.
pub fn chi_square_fit(observed: &[u64], probs: &[f64], alpha: f64) -> TestOutcome {
    assert_eq!(observed.len(), probs.len());
    let total = observed.iter().sum::<u64>() as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        acc.0 += o as f64;
        acc.1 += p * total;
        if acc.1 >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    let df = bins.len().saturating_sub(1);
    if df == 0 {
        return TestOutcome {
            statistic: 0.0,
            critical: f64::INFINITY,
            significant: false,
        };
    }
    let stat: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let critical = ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha);
    TestOutcome {
        statistic: stat,
        critical,
        significant: stat > critical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_and_ks_constants() {
        assert!((z_quantile(0.01) - 2.326_347_874).abs() < 1e-6);
        assert!((ks_coefficient(0.01) - 1.627_58).abs() < 1e-4);
    }

    #[test]
    fn mean_variance_examples() {
        assert_eq!(mean_variance(&[3.0]), (3.0, 0.0));
        let (m, v) = mean_variance(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quantiles_type7() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 0.25), 2.0);
        assert!((quantile_sorted(&s, 0.05) - 1.2).abs() < 1e-12);
        assert_eq!(quantile_sorted(&[7.0], 0.95), 7.0);
    }

    #[test]
    fn ks_detects_shift_only() {
        let a: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..2000).map(|i| i as f64 + 0.5).collect();
        assert!(!ks_two_sample(&a, &b, ALPHA).significant);
        let c: Vec<f64> = (0..2000).map(|i| i as f64 + 400.0).collect();
        assert!(ks_two_sample(&a, &c, ALPHA).significant);
        assert_eq!(ks_two_sample(&a, &a, ALPHA).statistic, 0.0);
    }

    #[test]
    fn chi_square_examples() {
        let a = [100, 200, 300, 2, 1];
        assert!(!chi_square_homogeneity(&a, &a, ALPHA).significant);
        let b = [300, 200, 100, 2, 1];
        assert!(chi_square_homogeneity(&a, &b, ALPHA).significant);
        let fit = chi_square_fit(&[250, 250, 500], &[0.25, 0.25, 0.5], ALPHA);
        assert_eq!(fit.statistic, 0.0);
        assert!(chi_square_fit(&[400, 100, 500], &[0.25, 0.25, 0.5], ALPHA).significant);
    }
}
