//! Fixed-budget drift analysis of the (1+1) EA on OneMax and LeadingOnes.
//!
//! The crate is organised around a handful of interchangeable strategy
//! families, each behind a trait and selectable by name at runtime:
//!
//! * [`fitness::Fitness`]: benchmark functions (`onemax`, `leadingones`).
//! * [`drift::DriftFunction`]: drift lower bounds `h` used by the iterated
//!   drift map and by potential construction.
//! * [`montecarlo::TrialSimulator`]: bit-level and level-based trial engines.
//! * [`predict::BoundPredictor`]: closed-form fixed-budget fitness predictions.
//!
//! Every family exposes a `registry()` returning the shipped implementations
//! keyed by name.

pub mod bitstring;
pub mod concentration;
pub mod drift;
pub mod ea;
pub mod error;
pub mod fitness;
pub mod montecarlo;
pub mod potential;
pub mod predict;
pub mod rng;

pub use bitstring::BitString;
pub use error::{Error, Result};
