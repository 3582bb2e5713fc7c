//! Ensembles of independent trials with schedule-independent statistics, and
//! the comparison of ensemble statistics against bound predictions.

mod compare;
mod simulator;
pub mod stats;

use rayon::prelude::*;
use serde::Serialize;

use crate::ea::{Budget, HittingTime, Trajectory};
use crate::error::{Error, Result};
use crate::fitness::Problem;
use crate::potential::{SurvivalCurve, SurvivalProvenance};
use crate::rng::RngStream;

pub use compare::{compare_bounds, ComparisonEntry, ComparisonReport, Verdict};
pub use simulator::{
    default_for, fast_lo_trial, lookup, registry, sample_gain, BitLevel, FastLeadingOnes,
    TrialSimulator,
};

/// Quantile levels reported per checkpoint.
pub const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub problem: Problem,
    pub n: usize,
    pub trials: usize,
    pub budget: Budget,
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
    /// Simulator name; `None` picks [`default_for`] the problem.
    pub simulator: Option<String>,
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
}

impl EnsembleConfig {
    pub fn new(problem: Problem, n: usize, trials: usize, budget: Budget, checkpoints: Vec<u64>, master_seed: u64) -> Self {
        Self {
            problem,
            n,
            trials,
            budget,
            checkpoints,
            master_seed,
            simulator: None,
            workers: 0,
        }
    }

    pub fn with_simulator(mut self, name: &str) -> Self {
        self.simulator = Some(name.to_string());
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Statistics of the fitness values at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointStats {
    pub checkpoint: u64,
    pub mean: f64,
    pub variance: f64,
    /// At the levels of [`QUANTILES`].
    pub quantiles: [f64; 5],
}

impl CheckpointStats {
    pub fn std_error(&self, trials: usize) -> f64 {
        (self.variance / trials as f64).sqrt()
    }
}

/// Uncensored hitting times and the number of censored trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimeSample {
    pub values: Vec<u64>,
    pub censored_count: usize,
}

impl HittingTimeSample {
    pub fn mean_variance(&self) -> (f64, f64) {
        let v: Vec<f64> = self.values.iter().map(|&t| t as f64).collect();
        stats::mean_variance(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub problem: Problem,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub simulator: String,
    pub budget: Option<u64>,
    pub checkpoints: Vec<CheckpointStats>,
    /// `values[k][i]`: fitness of trial `i` at checkpoint `k`.
    values: Vec<Vec<u64>>,
    /// Per trial, in trial-index order.
    pub hitting_times: Vec<HittingTime>,
    pub initial_fitness: Vec<u64>,
}

impl EnsembleStats {
    fn index_of(&self, checkpoint: u64) -> Result<usize> {
        self.checkpoints
            .iter()
            .position(|c| c.checkpoint == checkpoint)
            .ok_or(Error::CheckpointMismatch(checkpoint))
    }

    pub fn at(&self, checkpoint: u64) -> Result<&CheckpointStats> {
        Ok(&self.checkpoints[self.index_of(checkpoint)?])
    }

    /// Fitness of every trial at `checkpoint`, in trial-index order.
    pub fn values_at(&self, checkpoint: u64) -> Result<&[u64]> {
        Ok(&self.values[self.index_of(checkpoint)?])
    }

    /// Number of trials with `lower <= V <= upper` at `checkpoint`.
    pub fn inside(&self, checkpoint: u64, lower: f64, upper: f64) -> Result<usize> {
        Ok(self
            .values_at(checkpoint)?
            .iter()
            .filter(|&&v| lower <= v as f64 && v as f64 <= upper)
            .count())
    }

    pub fn hitting_sample(&self) -> HittingTimeSample {
        HittingTimeSample {
            values: self.hitting_times.iter().filter_map(|h| h.hit()).collect(),
            censored_count: self.hitting_times.iter().filter(|h| h.is_censored()).count(),
        }
    }
}

fn aggregate(config: &EnsembleConfig, simulator: &str, trajectories: Vec<Trajectory>) -> EnsembleStats {
    let k = config.checkpoints.len();
    let mut values = vec![Vec::with_capacity(trajectories.len()); k];
    let mut hitting_times = Vec::with_capacity(trajectories.len());
    let mut initial_fitness = Vec::with_capacity(trajectories.len());
    for tr in &trajectories {
        for (col, &v) in values.iter_mut().zip(&tr.fitness_at) {
            col.push(v);
        }
        hitting_times.push(tr.hitting_time);
        initial_fitness.push(tr.initial_fitness);
    }
    let checkpoints = config
        .checkpoints
        .iter()
        .zip(&values)
        .map(|(&checkpoint, col)| {
            let xs: Vec<f64> = col.iter().map(|&v| v as f64).collect();
            let (mean, variance) = stats::mean_variance(&xs);
            let mut sorted = xs;
            sorted.sort_by(f64::total_cmp);
            CheckpointStats {
                checkpoint,
                mean,
                variance,
                quantiles: QUANTILES.map(|p| stats::quantile_sorted(&sorted, p)),
            }
        })
        .collect();
    EnsembleStats {
        problem: config.problem,
        n: config.n,
        trials: config.trials,
        master_seed: config.master_seed,
        simulator: simulator.to_string(),
        budget: config.budget.limit(),
        checkpoints,
        values,
        hitting_times,
        initial_fitness,
    }
}

/// Runs `config.trials` independent trials, trial `i` seeded from
/// `(master_seed, i)`, and aggregates them in trial-index order. The result
/// does not depend on the number of workers.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleStats> {
    if config.trials == 0 || config.n == 0 {
        return Err(Error::InvalidParameter("trials and n must be positive".into()));
    }
    let sim = match &config.simulator {
        Some(name) => lookup(name)?,
        None => default_for(config.problem),
    };
    if sim.problem() != config.problem {
        return Err(Error::InvalidParameter(format!(
            "simulator `{}` does not run {}",
            sim.name(),
            config.problem
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let trajectories = pool.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(config.master_seed, i);
                sim.run(config.n, config.budget, &config.checkpoints, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(config, sim.name(), trajectories))
}

/// `P^(s < T)` for `s = 0..len`: the fraction of trials still running after
/// `s` iterations. Censored trials count as running up to their budget.
pub fn empirical_survival(stats: &EnsembleStats, len: usize) -> Result<SurvivalCurve> {
    if let Some(b) = stats.budget {
        if len as u64 > b + 1 {
            return Err(Error::InvalidParameter(format!(
                "survival beyond the budget {b} is not observed"
            )));
        }
    }
    let trials = stats.hitting_times.len() as f64;
    // number of trials with T > s, via a histogram of exit points
    let mut exits = vec![0u64; len + 1];
    for h in &stats.hitting_times {
        let last_running = match *h {
            HittingTime::Hit(t) => t,
            HittingTime::Censored(b) => b + 1,
        };
        exits[(last_running as usize).min(len)] += 1;
    }
    let mut running = stats.hitting_times.len() as u64;
    let mut probs = Vec::with_capacity(len);
    for exit in exits.iter().take(len) {
        running -= exit;
        probs.push(running as f64 / trials);
    }
    SurvivalCurve::new(probs, SurvivalProvenance::Empirical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::expected_opt_time_lo;

    fn lo(n: usize, trials: usize, budget: Budget, cps: Vec<u64>, seed: u64) -> EnsembleConfig {
        EnsembleConfig::new(Problem::LeadingOnes, n, trials, budget, cps, seed)
    }

    #[test]
    fn single_trial_stats_equal_trajectory() {
        let cfg = lo(30, 1, Budget::Steps(500), vec![0, 100, 500], 4);
        let s = run_ensemble(&cfg).unwrap();
        let tr = fast_lo_trial(30, Budget::Steps(500), &[0, 100, 500], &mut RngStream::new(4, 0)).unwrap();
        for (c, v) in s.checkpoints.iter().zip(&tr.fitness_at) {
            assert_eq!(c.mean, *v as f64);
            assert_eq!(c.variance, 0.0);
            assert!(c.quantiles.iter().all(|q| *q == *v as f64));
        }
        assert_eq!(s.hitting_times, vec![tr.hitting_time]);
    }

    #[test]
    fn schedule_independent() {
        for sim in ["fast-leadingones", "bit-leadingones"] {
            let base = lo(40, 300, Budget::Steps(800), vec![0, 200, 800], 77).with_simulator(sim);
            let one = run_ensemble(&base.clone().with_workers(1)).unwrap();
            for w in [2, 8] {
                assert_eq!(one, run_ensemble(&base.clone().with_workers(w)).unwrap());
            }
        }
    }

    #[test]
    fn onemax_n1_after_one_step() {
        let cfg = EnsembleConfig::new(Problem::OneMax, 1, 500, Budget::Steps(1), vec![1], 3);
        let s = run_ensemble(&cfg).unwrap();
        assert_eq!(s.checkpoints[0].mean, 1.0);
    }

    #[test]
    fn quantiles_monotone() {
        let s = run_ensemble(&lo(60, 400, Budget::Steps(3000), vec![500, 3000], 5)).unwrap();
        for c in &s.checkpoints {
            assert!(c.quantiles.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn mismatched_simulator_rejected() {
        let cfg = EnsembleConfig::new(Problem::OneMax, 10, 5, Budget::Steps(5), vec![5], 1).with_simulator("fast-leadingones");
        assert!(run_ensemble(&cfg).is_err());
    }

    #[test]
    fn survival_properties() {
        let s = run_ensemble(&lo(20, 2000, Budget::UntilOptimum, vec![], 11)).unwrap();
        let max_t = s.hitting_times.iter().filter_map(|h| h.hit()).max().unwrap() as usize;
        let curve = empirical_survival(&s, max_t + 5).unwrap();
        let p = curve.probs();
        assert!(p[0] > 0.99);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        assert!(p[max_t..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn censored_trials_survive_to_budget() {
        let s = run_ensemble(&lo(200, 50, Budget::Steps(100), vec![100], 2)).unwrap();
        assert_eq!(s.hitting_sample().censored_count, 50);
        let c = empirical_survival(&s, 101).unwrap();
        assert!(c.probs().iter().all(|&p| p == 1.0));
        assert!(empirical_survival(&s, 102).is_err());
    }

    #[test]
    fn fast_lo_mean_hitting_time() {
        let n = 50;
        let s = run_ensemble(&lo(n, 20_000, Budget::UntilOptimum, vec![], 2024)).unwrap();
        let (m, v) = s.hitting_sample().mean_variance();
        let se = (v / 20_000.0).sqrt();
        assert!((m - expected_opt_time_lo(n).unwrap()).abs() < 3.0 * se, "{m}");
    }
}
