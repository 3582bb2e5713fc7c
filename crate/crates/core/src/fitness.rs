//! Benchmark fitness functions.
//!
//! Each function can be evaluated from scratch or incrementally, given the
//! current fitness and a set of flipped positions. The incremental path is what
//! the EA uses; it keeps a step at O(number of flips + gain) instead of O(n).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};

pub trait Fitness: Send + Sync {
    fn name(&self) -> &'static str;

    fn evaluate(&self, x: &BitString) -> u64;

    fn optimum(&self, n: usize) -> u64 {
        n as u64
    }

    /// Fitness of `x` with the bits at `flips` inverted. `flips` holds distinct
    /// positions; `current` must equal `self.evaluate(x)`.
    fn evaluate_flipped(&self, x: &BitString, current: u64, flips: &[usize]) -> u64 {
        let _ = current;
        let mut y = x.clone();
        for &i in flips {
            y.flip(i);
        }
        self.evaluate(&y)
    }
}

/// Number of one-bits.
pub fn one_max(x: &BitString) -> u64 {
    x.as_slice().iter().filter(|&&b| b).count() as u64
}

/// Number of leading one-bits before the first zero.
pub fn leading_ones(x: &BitString) -> u64 {
    x.as_slice().iter().take_while(|&&b| b).count() as u64
}

/// LeadingOnes with the all-ones string lifted to `n + 1`.
///
/// Only the drift and potential analysis use this; selection in the EA always
/// uses plain [`leading_ones`].
pub fn adjusted_lo(x: &BitString) -> u64 {
    let lo = leading_ones(x);
    if lo == x.len() as u64 {
        lo + 1
    } else {
        lo
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OneMax;

impl Fitness for OneMax {
    fn name(&self) -> &'static str {
        "onemax"
    }

    fn evaluate(&self, x: &BitString) -> u64 {
        one_max(x)
    }

    fn evaluate_flipped(&self, x: &BitString, current: u64, flips: &[usize]) -> u64 {
        let mut v = current as i64;
        for &i in flips {
            v += if x.get(i) { -1 } else { 1 };
        }
        v as u64
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LeadingOnes;

impl Fitness for LeadingOnes {
    fn name(&self) -> &'static str {
        "leadingones"
    }

    fn evaluate(&self, x: &BitString) -> u64 {
        leading_ones(x)
    }

    fn evaluate_flipped(&self, x: &BitString, current: u64, flips: &[usize]) -> u64 {
        let lo = current as usize;
        let Some(&first) = flips.iter().min() else {
            return current;
        };
        if first < lo {
            // a leading one became zero
            return first as u64;
        }
        if first > lo {
            return current;
        }
        // the first zero was flipped; extend over the (possibly flipped) suffix
        let flipped = |i: usize| flips.contains(&i);
        let mut k = lo + 1;
        while k < x.len() && (x.get(k) != flipped(k)) {
            k += 1;
        }
        k as u64
    }
}

/// The benchmark problems known to the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    OneMax,
    LeadingOnes,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::OneMax => "onemax",
            Problem::LeadingOnes => "leadingones",
        }
    }

    pub fn fitness(self) -> Arc<dyn Fitness> {
        match self {
            Problem::OneMax => Arc::new(OneMax),
            Problem::LeadingOnes => Arc::new(LeadingOnes),
        }
    }
}

impl std::str::FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onemax" => Ok(Problem::OneMax),
            "leadingones" => Ok(Problem::LeadingOnes),
            other => Err(Error::UnknownStrategy {
                family: "problem",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn registry() -> BTreeMap<&'static str, Arc<dyn Fitness>> {
    let mut map: BTreeMap<&'static str, Arc<dyn Fitness>> = BTreeMap::new();
    for f in [Problem::OneMax.fitness(), Problem::LeadingOnes.fitness()] {
        map.insert(f.name(), f);
    }
    map
}

pub fn lookup(name: &str) -> Result<Arc<dyn Fitness>> {
    registry()
        .remove(name)
        .ok_or_else(|| Error::UnknownStrategy {
            family: "fitness function",
            name: name.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn one_max_examples() {
        assert_eq!(one_max(&bs("11111")), 5);
        assert_eq!(one_max(&bs("00000")), 0);
        assert_eq!(one_max(&bs("10110")), 3);
    }

    #[test]
    fn leading_ones_examples() {
        assert_eq!(leading_ones(&bs("11011")), 2);
        assert_eq!(leading_ones(&bs("11111")), 5);
        assert_eq!(leading_ones(&bs("01111")), 0);
    }

    #[test]
    fn adjusted_lo_examples() {
        assert_eq!(adjusted_lo(&bs("1111")), 5);
        assert_eq!(adjusted_lo(&bs("1101")), 2);
        assert_eq!(adjusted_lo(&bs("0")), 0);
    }

    #[test]
    fn exhaustive_definitions_up_to_12_bits() {
        for n in 1..=12usize {
            for v in 0..(1u64 << n) {
                let x = BitString::from_index(n, v);
                let ones = (0..n).filter(|&i| x.get(i)).count() as u64;
                let mut lead = 0;
                while lead < n && x.get(lead) {
                    lead += 1;
                }
                assert_eq!(one_max(&x), ones);
                assert_eq!(leading_ones(&x), lead as u64);
            }
        }
    }

    #[test]
    fn incremental_matches_full_evaluation() {
        // every string and every flip mask for n = 6
        let n = 6;
        for f in registry().values() {
            for v in 0..(1u64 << n) {
                let x = BitString::from_index(n, v);
                let fx = f.evaluate(&x);
                for mask in 0..(1u64 << n) {
                    let flips: Vec<usize> = (0..n).filter(|&i| (mask >> i) & 1 == 1).collect();
                    let mut y = x.clone();
                    for &i in &flips {
                        y.flip(i);
                    }
                    assert_eq!(f.evaluate_flipped(&x, fx, &flips), f.evaluate(&y));
                }
            }
        }
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(lookup("onemax").unwrap().name(), "onemax");
        assert!(lookup("trap").is_err());
        assert_eq!("leadingones".parse::<Problem>().unwrap(), Problem::LeadingOnes);
    }
}
