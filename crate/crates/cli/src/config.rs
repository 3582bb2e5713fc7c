//! Experiment configuration: a TOML file with a fixed set of keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use fbdrift::ea::Budget;
use fbdrift::fitness::Problem;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// `budget` is a positive integer or the word `"optimum"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetSpec(pub Budget);

impl Serialize for BudgetSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Budget::Steps(b) => s.serialize_u64(b),
            Budget::UntilOptimum => s.serialize_str("optimum"),
        }
    }
}

impl<'de> Deserialize<'de> for BudgetSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Steps(u64),
            Word(String),
        }
        match Raw::deserialize(d) {
            Ok(Raw::Steps(b)) => Ok(BudgetSpec(Budget::Steps(b))),
            Ok(Raw::Word(w)) if w == "optimum" => Ok(BudgetSpec(Budget::UntilOptimum)),
            _ => Err(serde::de::Error::custom(
                "budget must be a non-negative integer or \"optimum\"",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub n: usize,
    pub trials: usize,
    pub budget: BudgetSpec,
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Trial engine; defaults to the bit-level EA for OneMax and the
    /// level-based simulator for LeadingOnes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulator: Option<String>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

/// A configuration error tied to a line of the source file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path, l, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of the first `key = ...` assignment, if present.
fn line_of_key(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates `src`; `origin` names the source in messages.
    pub fn parse(src: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| ConfigError {
            path: origin.to_string(),
            line: e.span().map(|s| line_of_offset(src, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| ConfigError {
            path: origin.to_string(),
            line: line_of_key(src, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&src, &path.display().to_string()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks the cross-field invariants; on failure returns the offending
    /// key and a message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.n == 0 {
            return Err(("n", "n must be positive".into()));
        }
        if self.trials == 0 {
            return Err(("trials", "trials must be positive".into()));
        }
        if self.budget.0 == Budget::Steps(0) {
            return Err(("budget", "budget must be positive".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(("checkpoints", "checkpoints must be strictly increasing".into()));
        }
        if let (Some(&last), Some(b)) = (self.checkpoints.last(), self.budget.0.limit()) {
            if last > b {
                return Err(("checkpoints", format!("checkpoint {last} exceeds the budget {b}")));
            }
        }
        if let Some(name) = &self.simulator {
            match fbdrift::montecarlo::lookup(name) {
                Ok(sim) if sim.problem() == self.problem => {}
                Ok(_) => {
                    return Err(("simulator", format!("simulator `{name}` does not run {}", self.problem)))
                }
                Err(e) => return Err(("simulator", e.to_string())),
            }
        }
        if let Some((k, v)) = self.constants.iter().find(|(_, v)| !v.is_finite()) {
            return Err(("constants", format!("constant `{k}` is not finite ({v})")));
        }
        Ok(())
    }
}
