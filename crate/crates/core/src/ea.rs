//! The (1+1) EA: standard bit mutation with rate 1/n and elitist selection
//! that accepts ties.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};
use crate::fitness::Fitness;

/// Standard bit mutation: every bit flips independently with probability 1/n.
///
/// Sampled as K ~ Bin(n, 1/n) followed by K distinct uniform positions, which
/// has the same law as n independent Bernoulli(1/n) flips.
#[derive(Debug, Clone)]
pub struct BitMutation {
    n: usize,
    count: Binomial,
}

impl BitMutation {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "bit strings have at least one bit");
        Self {
            n,
            count: Binomial::new(n as u64, 1.0 / n as f64).expect("1/n is a probability"),
        }
    }

    /// Writes the flipped positions into `out` (cleared first).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        let k = self.count.sample(rng) as usize;
        if k == 0 {
            return;
        }
        if k * 4 <= self.n {
            while out.len() < k {
                let i = rng.random_range(0..self.n);
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        } else {
            out.extend(rand::seq::index::sample(rng, self.n, k).iter());
        }
    }
}

/// Current search point of one EA run.
#[derive(Debug, Clone)]
pub struct EAState {
    pub x: BitString,
    pub fitness: u64,
    /// Number of offspring evaluated so far.
    pub iteration: u64,
    mutation: BitMutation,
    flips: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub flips: usize,
    pub accepted: bool,
}

impl EAState {
    pub fn new(x: BitString, fitness: &dyn Fitness) -> Self {
        let f = fitness.evaluate(&x);
        let mutation = BitMutation::new(x.len());
        Self {
            x,
            fitness: f,
            iteration: 0,
            mutation,
            flips: Vec::with_capacity(8),
        }
    }

    /// Initial point drawn uniformly from {0,1}^n.
    pub fn random<R: Rng + ?Sized>(n: usize, fitness: &dyn Fitness, rng: &mut R) -> Self {
        Self::new(BitString::random(n, rng), fitness)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// One iteration of the (1+1) EA.
pub fn ea_step<R: Rng + ?Sized>(state: &mut EAState, rng: &mut R, fitness: &dyn Fitness) -> StepOutcome {
    let mut flips = std::mem::take(&mut state.flips);
    state.mutation.sample_into(rng, &mut flips);
    let fy = fitness.evaluate_flipped(&state.x, state.fitness, &flips);
    let accepted = fy >= state.fitness;
    if accepted {
        for &i in &flips {
            state.x.flip(i);
        }
        state.fitness = fy;
    }
    state.iteration += 1;
    let outcome = StepOutcome {
        flips: flips.len(),
        accepted,
    };
    state.flips = flips;
    outcome
}

/// How long a trial may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Steps(u64),
    UntilOptimum,
}

impl Budget {
    pub fn limit(self) -> Option<u64> {
        match self {
            Budget::Steps(b) => Some(b),
            Budget::UntilOptimum => None,
        }
    }

    pub fn admits(self, t: u64) -> bool {
        self.limit().is_none_or(|b| t <= b)
    }
}

/// First iteration at which the optimum was held, or the budget at which the
/// trial stopped without reaching it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HittingTime {
    Hit(u64),
    Censored(u64),
}

impl HittingTime {
    pub fn hit(self) -> Option<u64> {
        match self {
            HittingTime::Hit(t) => Some(t),
            HittingTime::Censored(_) => None,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, HittingTime::Censored(_))
    }

    /// Whether the trial was certainly still running after `s` iterations,
    /// i.e. `s < T`. Censored trials count as running up to their budget.
    pub fn survives(self, s: u64) -> bool {
        match self {
            HittingTime::Hit(t) => s < t,
            HittingTime::Censored(b) => s <= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub initial_fitness: u64,
    pub checkpoints: Vec<u64>,
    pub fitness_at: Vec<u64>,
    pub hitting_time: HittingTime,
}

pub(crate) fn validate_checkpoints(checkpoints: &[u64], budget: Budget) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("checkpoints must be sorted".into()));
    }
    if let Some(&last) = checkpoints.last() {
        if !budget.admits(last) {
            return Err(Error::InvalidParameter(format!(
                "checkpoint {last} exceeds the budget"
            )));
        }
    }
    Ok(())
}

/// Runs the (1+1) EA from a uniform random point, recording the fitness after
/// each checkpoint's number of iterations.
pub fn run_trial<R: Rng + ?Sized>(
    n: usize,
    fitness: &dyn Fitness,
    budget: Budget,
    checkpoints: &[u64],
    rng: &mut R,
) -> Result<Trajectory> {
    validate_checkpoints(checkpoints, budget)?;
    let optimum = fitness.optimum(n);
    let mut state = EAState::random(n, fitness, rng);
    let initial_fitness = state.fitness;
    let mut fitness_at = Vec::with_capacity(checkpoints.len());
    let mut next = 0;

    let hitting_time = loop {
        while next < checkpoints.len() && checkpoints[next] == state.iteration {
            fitness_at.push(state.fitness);
            next += 1;
        }
        if state.fitness == optimum {
            break HittingTime::Hit(state.iteration);
        }
        if budget.limit() == Some(state.iteration) {
            break HittingTime::Censored(state.iteration);
        }
        ea_step(&mut state, rng, fitness);
    };
    // the optimum is absorbing for both benchmarks
    fitness_at.resize(checkpoints.len(), state.fitness);

    Ok(Trajectory {
        initial_fitness,
        checkpoints: checkpoints.to_vec(),
        fitness_at,
        hitting_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::{LeadingOnes, OneMax};
    use crate::rng::RngStream;
    use std::collections::HashMap;

    #[test]
    fn n1_single_step_reaches_optimum() {
        for seed in 0..50 {
            let mut rng = RngStream::new(seed, 0);
            let mut s = EAState::new("0".parse().unwrap(), &OneMax);
            ea_step(&mut s, &mut rng, &OneMax);
            assert_eq!(s.x.to_string(), "1");
            assert_eq!(s.iteration, 1);
        }
    }

    #[test]
    fn empty_mutation_keeps_state() {
        let mut rng = RngStream::new(11, 0);
        let mut s = EAState::new("1011001".parse().unwrap(), &LeadingOnes);
        for _ in 0..500 {
            let before = (s.x.clone(), s.fitness, s.iteration);
            let out = ea_step(&mut s, &mut rng, &LeadingOnes);
            assert_eq!(s.iteration, before.2 + 1);
            if out.flips == 0 {
                assert_eq!(s.x, before.0);
                assert_eq!(s.fitness, before.1);
            }
        }
    }

    #[test]
    fn n2_onemax_improves_with_probability_three_quarters() {
        // Exact: only the empty flip mask (probability 1/4) leaves 00 at fitness 0.
        let trials = 200_000u64;
        let mut hits = 0u64;
        for i in 0..trials {
            let mut rng = RngStream::new(5, i);
            let mut s = EAState::new("00".parse().unwrap(), &OneMax);
            ea_step(&mut s, &mut rng, &OneMax);
            hits += (s.fitness >= 1) as u64;
        }
        let p = hits as f64 / trials as f64;
        let se = (0.75f64 * 0.25 / trials as f64).sqrt();
        assert!((p - 0.75).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn binomial_sampler_matches_bernoulli_mask_law() {
        // Exact law of n independent Bernoulli(1/n) flips, enumerated per mask,
        // against sampled frequencies (chi-square, alpha = 0.001).
        for n in [1usize, 2, 3, 5, 8] {
            let m = BitMutation::new(n);
            let p = 1.0 / n as f64;
            let draws = 400_000u64;
            let mut rng = RngStream::new(99, n as u64);
            let mut counts: HashMap<u64, u64> = HashMap::new();
            let mut buf = Vec::new();
            for _ in 0..draws {
                m.sample_into(&mut rng, &mut buf);
                let mask = buf.iter().fold(0u64, |acc, &i| acc | (1 << i));
                *counts.entry(mask).or_default() += 1;
            }
            let mut stat = 0.0;
            let mut cells = 0;
            let mut pooled_obs = 0.0;
            let mut pooled_exp = 0.0;
            for mask in 0..(1u64 << n) {
                let k = mask.count_ones() as i32;
                let exact = p.powi(k) * (1.0 - p).powi(n as i32 - k);
                let expected = exact * draws as f64;
                let observed = *counts.get(&mask).unwrap_or(&0) as f64;
                if expected < 5.0 {
                    pooled_obs += observed;
                    pooled_exp += expected;
                    continue;
                }
                stat += (observed - expected).powi(2) / expected;
                cells += 1;
            }
            if pooled_exp >= 5.0 {
                stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
                cells += 1;
            }
            if cells > 1 {
                use statrs::distribution::{ChiSquared, ContinuousCDF};
                let crit = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.999);
                assert!(stat < crit, "n = {n}: chi2 {stat} >= {crit}");
            }
        }
    }

    #[test]
    fn mean_flip_count_is_one() {
        let n = 100;
        let m = BitMutation::new(n);
        let mut rng = RngStream::new(1, 1);
        let mut buf = Vec::new();
        let draws = 100_000;
        let mut total = 0usize;
        for _ in 0..draws {
            m.sample_into(&mut rng, &mut buf);
            let mut sorted = buf.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), buf.len());
            total += buf.len();
        }
        let mean = total as f64 / draws as f64;
        let var = n as f64 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64);
        let se = (var / draws as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean flips {mean}");
    }

    #[test]
    fn zero_budget_keeps_initial_fitness() {
        let mut rng = RngStream::new(3, 0);
        let tr = run_trial(20, &OneMax, Budget::Steps(0), &[0], &mut rng).unwrap();
        assert_eq!(tr.fitness_at, vec![tr.initial_fitness]);
    }

    #[test]
    fn n1_budget_one_always_optimal() {
        for i in 0..100 {
            let mut rng = RngStream::new(8, i);
            let tr = run_trial(1, &OneMax, Budget::Steps(1), &[1], &mut rng).unwrap();
            assert_eq!(tr.fitness_at, vec![1]);
            assert!(matches!(tr.hitting_time, HittingTime::Hit(t) if t <= 1));
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let cps = [0, 10, 100, 1000];
        let a = run_trial(30, &LeadingOnes, Budget::Steps(1000), &cps, &mut RngStream::new(42, 17)).unwrap();
        let b = run_trial(30, &LeadingOnes, Budget::Steps(1000), &cps, &mut RngStream::new(42, 17)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fitness_is_monotone_over_checkpoints() {
        let cps: Vec<u64> = (0..=400).step_by(4).collect();
        for i in 0..50 {
            for f in [&OneMax as &dyn Fitness, &LeadingOnes] {
                let tr = run_trial(25, f, Budget::Steps(400), &cps, &mut RngStream::new(2, i)).unwrap();
                assert!(tr.fitness_at.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn unsorted_or_oversized_checkpoints_rejected() {
        let mut rng = RngStream::new(0, 0);
        assert!(run_trial(5, &OneMax, Budget::Steps(10), &[5, 1], &mut rng).is_err());
        assert!(run_trial(5, &OneMax, Budget::Steps(10), &[11], &mut rng).is_err());
    }
}
