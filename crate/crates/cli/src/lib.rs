//! Command-line driver for fixed-budget drift experiments: simulation,
//! bound tables, theorem verification, and the mgf calibration scan.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use config::{BudgetSpec, ConfigError, ExperimentConfig};
pub use error::CliError;

/// Every verdict passed.
pub const EXIT_PASS: u8 = 0;
/// At least one bound was violated.
pub const EXIT_VIOLATION: u8 = 1;
/// The configuration or arguments were invalid.
pub const EXIT_CONFIG: u8 = 2;
/// Reading or writing a file failed.
pub const EXIT_IO: u8 = 3;

/// Environment variable supplying the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "FBDRIFT_WORKERS";
