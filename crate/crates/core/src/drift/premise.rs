use serde::Serialize;

use super::DriftFunction;

/// Grid-based check of the premises of the direct fixed-budget drift bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PremiseReport {
    /// `x - h(x)` is non-decreasing on the grid.
    pub greed_admitting: bool,
    /// All second differences of `h` are at least `-tolerance`.
    pub convex: bool,
    pub grid_step: f64,
    pub tolerance: f64,
}

impl PremiseReport {
    pub fn holds(&self) -> bool {
        self.greed_admitting && self.convex
    }
}

pub fn check_premises(h: &dyn DriftFunction, grid_step: f64, tol: f64) -> PremiseReport {
    assert!(grid_step > 0.0, "grid step must be positive");
    let (lo, hi) = h.domain();
    assert!(lo.is_finite() && hi.is_finite(), "premise check needs a bounded domain");

    let steps = ((hi - lo) / grid_step + 1e-9).floor() as usize;
    let xs: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * grid_step).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| h.value(x)).collect();

    let greed_admitting = xs
        .windows(2)
        .zip(hs.windows(2))
        .all(|(x, v)| (x[1] - v[1]) - (x[0] - v[0]) >= -tol);
    let convex = hs.windows(3).all(|v| v[2] - 2.0 * v[1] + v[0] >= -tol);

    PremiseReport {
        greed_admitting,
        convex,
        grid_step,
        tolerance: tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{
        ConstantDrift, ExactLeadingOnesDrift, LeadingOnesDrift, OneMaxDrift, TabulatedDrift,
    };

    #[test]
    fn constant_drift_satisfies_both() {
        let r = check_premises(&ConstantDrift::new(0.3, 10.0), 0.5, 1e-12);
        assert!(r.greed_admitting && r.convex);
    }

    #[test]
    fn shipped_drifts_satisfy_premises() {
        for n in [3usize, 10, 100, 1000] {
            for step in [1.0, 0.01] {
                assert!(check_premises(&OneMaxDrift::new(n), step, 1e-12).holds(), "onemax n={n}");
                assert!(
                    check_premises(&LeadingOnesDrift::new(n), step, 1e-12).holds(),
                    "leadingones n={n}"
                );
            }
        }
    }

    #[test]
    fn exact_leadingones_drift_is_not_convex() {
        let r = check_premises(&ExactLeadingOnesDrift::new(100), 1.0, 1e-12);
        assert!(r.greed_admitting);
        assert!(!r.convex);
    }

    #[test]
    fn three_state_counter_process() {
        // From state 2 the process moves to 0, 1 or 2 uniformly; from state 1 it
        // reaches 0 with probability 0.1. The drift is computed from these
        // transitions rather than taken as given.
        let transitions: [&[(usize, f64)]; 3] = [
            &[(0, 1.0)],
            &[(0, 0.1), (1, 0.9)],
            &[(0, 1.0 / 3.0), (1, 1.0 / 3.0), (2, 1.0 / 3.0)],
        ];
        let drift: Vec<f64> = transitions
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|&(y, p)| p * (x as f64 - y as f64)).sum())
            .collect();
        assert!((drift[2] - 1.0).abs() < 1e-15);
        assert!((drift[1] - 0.1).abs() < 1e-15);
        // x - h(x) = 0, 0.9, 1.0 is non-decreasing, so the definition is met.
        let h = TabulatedDrift::new("counter", drift).unwrap();
        let r = check_premises(&h, 1.0, 1e-12);
        assert!(r.greed_admitting);
        assert!(r.convex);
    }

    #[test]
    fn steep_drift_is_not_greed_admitting() {
        let h = TabulatedDrift::new("steep", vec![0.0, 0.1, 2.0]).unwrap();
        assert!(!check_premises(&h, 1.0, 1e-12).greed_admitting);
    }

    #[test]
    fn report_is_reproducible() {
        let h = LeadingOnesDrift::new(64);
        assert_eq!(check_premises(&h, 0.25, 1e-12), check_premises(&h, 0.25, 1e-12));
    }
}
