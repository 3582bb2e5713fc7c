use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{what}: t = {t} outside validity window [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        t: f64,
        lo: f64,
        hi: f64,
    },

    #[error("drift function `{label}` is not positive at state {state} (h = {value})")]
    NonPositiveDrift {
        label: String,
        state: f64,
        value: f64,
    },

    #[error("drift function `{label}` decreases between {from} and {to}")]
    NonMonotoneDrift { label: String, from: f64, to: f64 },

    #[error("derivative of id - h at 0 is {0}, expected a value in (0, 1]")]
    TildeDerivative(f64),

    #[error("analytic derivative {analytic} and central difference {numeric} disagree")]
    DerivativeMismatch { analytic: f64, numeric: f64 },

    #[error("moment-generating function has a pole at eta = ln 2")]
    MgfPole,

    #[error("tail bound is silent for d = {d} below {threshold}")]
    TailBelowThreshold { d: f64, threshold: f64 },

    #[error("logarithm argument {0} is not positive")]
    LogArgument(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {family} `{name}`")]
    UnknownStrategy { family: &'static str, name: String },

    #[error("checkpoint {0} has no ensemble statistics")]
    CheckpointMismatch(u64),
}
