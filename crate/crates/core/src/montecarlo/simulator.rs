//! Trial engines: the bit-level (1+1) EA and a level-based LeadingOnes
//! simulator that only tracks fitness-distance levels.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Geometric};

use crate::drift::improvement_probability;
use crate::ea::{run_trial, validate_checkpoints, Budget, HittingTime, Trajectory};
use crate::error::{Error, Result};
use crate::fitness::Problem;
use crate::rng::RngStream;

pub trait TrialSimulator: Send + Sync {
    fn name(&self) -> &'static str;
    fn problem(&self) -> Problem;
    fn run(&self, n: usize, budget: Budget, checkpoints: &[u64], rng: &mut RngStream) -> Result<Trajectory>;
}

/// The (1+1) EA on bit strings for either benchmark.
pub struct BitLevel {
    problem: Problem,
}

impl BitLevel {
    pub fn new(problem: Problem) -> Self {
        Self { problem }
    }
}

impl TrialSimulator for BitLevel {
    fn name(&self) -> &'static str {
        match self.problem {
            Problem::OneMax => "bit-onemax",
            Problem::LeadingOnes => "bit-leadingones",
        }
    }

    fn problem(&self) -> Problem {
        self.problem
    }

    fn run(&self, n: usize, budget: Budget, checkpoints: &[u64], rng: &mut RngStream) -> Result<Trajectory> {
        run_trial(n, self.problem.fitness().as_ref(), budget, checkpoints, rng)
    }
}

/// Level-based LeadingOnes: geometric waiting times between improvements and
/// gains from the free-rider law.
pub struct FastLeadingOnes;

impl TrialSimulator for FastLeadingOnes {
    fn name(&self) -> &'static str {
        "fast-leadingones"
    }

    fn problem(&self) -> Problem {
        Problem::LeadingOnes
    }

    fn run(&self, n: usize, budget: Budget, checkpoints: &[u64], rng: &mut RngStream) -> Result<Trajectory> {
        fast_lo_trial(n, budget, checkpoints, rng)
    }
}

/// Number of leading ones among `len` fair coin flips.
fn leading_heads<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> usize {
    let mut count = 0;
    while count < len {
        let chunk = (len - count).min(64);
        let run = (rng.next_u64().trailing_ones() as usize).min(chunk);
        count += run;
        if run < chunk {
            break;
        }
    }
    count
}

/// Gain of an improving step at distance `x >= 1`: the flipped first zero
/// plus the leading ones among the `x - 1` uniformly random bits behind it.
/// Same law as [`crate::concentration::GainPmf::sample`], in O(x/64) time.
pub fn sample_gain<R: RngCore + ?Sized>(x: usize, rng: &mut R) -> usize {
    1 + leading_heads(x - 1, rng)
}

/// Simulates the (1+1) EA on LeadingOnes at the level of fitness values.
///
/// Distributionally equivalent to the bit-level run for the LeadingOnes
/// value: the initial value is the number of leading heads among `n` coin
/// flips; at distance `X` the waiting time to the next improvement is
/// geometric with the level's improvement probability; the gain follows the
/// free-rider law of Lemma 2.2(4). A final waiting period that would end past
/// the budget is truncated.
pub fn fast_lo_trial<R: Rng + ?Sized>(
    n: usize,
    budget: Budget,
    checkpoints: &[u64],
    rng: &mut R,
) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    validate_checkpoints(checkpoints, budget)?;
    let limit = budget.limit();
    let initial_fitness = leading_heads(n, rng) as u64;
    let mut value = initial_fitness;
    let mut iteration = 0u64;
    let mut fitness_at = Vec::with_capacity(checkpoints.len());
    let mut next = 0;

    let hitting_time = loop {
        if value == n as u64 {
            break HittingTime::Hit(iteration);
        }
        let x = n - value as usize;
        let p = improvement_probability(n, x);
        let waiting = if p >= 1.0 {
            0
        } else {
            Geometric::new(p)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(rng)
        };
        // iteration at which the improving offspring is evaluated
        let arrival = iteration.saturating_add(waiting).saturating_add(1);
        if let Some(b) = limit {
            if arrival > b {
                break HittingTime::Censored(b);
            }
        }
        while next < checkpoints.len() && checkpoints[next] < arrival {
            fitness_at.push(value);
            next += 1;
        }
        iteration = arrival;
        value += sample_gain(x, rng) as u64;
    };
    // absorbed at the optimum, or frozen at the budget
    fitness_at.resize(checkpoints.len(), value);

    Ok(Trajectory {
        initial_fitness,
        checkpoints: checkpoints.to_vec(),
        fitness_at,
        hitting_time,
    })
}

pub fn registry() -> BTreeMap<&'static str, Arc<dyn TrialSimulator>> {
    let all: Vec<Arc<dyn TrialSimulator>> = vec![
        Arc::new(BitLevel::new(Problem::OneMax)),
        Arc::new(BitLevel::new(Problem::LeadingOnes)),
        Arc::new(FastLeadingOnes),
    ];
    all.into_iter().map(|s| (s.name(), s)).collect()
}

pub fn lookup(name: &str) -> Result<Arc<dyn TrialSimulator>> {
    registry()
        .get(name)
        .cloned()
        .ok_or_else(|| Error::UnknownStrategy {
            family: "trial simulator",
            name: name.to_string(),
        })
}

/// The simulator used when a configuration names none.
pub fn default_for(problem: Problem) -> Arc<dyn TrialSimulator> {
    match problem {
        Problem::OneMax => Arc::new(BitLevel::new(Problem::OneMax)),
        Problem::LeadingOnes => Arc::new(FastLeadingOnes),
    }
}
