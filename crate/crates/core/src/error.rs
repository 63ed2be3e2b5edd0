use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radius must be strictly positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("step size underflow at r = {r} (h = {h:e})")]
    StepSizeUnderflow { r: f64, h: f64 },

    #[error("bracket scan exhausted after {steps} steps (last u0 = {last_u0:e}); enlarge r_max")]
    ScanExhausted { steps: usize, last_u0: f64 },

    #[error("inconsistent verdict at u0 = {u0:e}: {nodes} nodes, expected {expected}")]
    InconsistentVerdict { u0: f64, nodes: usize, expected: String },

    #[error("ladder failed at n = {n}: {source}")]
    Ladder {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("tail too short: {0} qualifying samples (need at least 10)")]
    TailTooShort(usize),

    #[error("profiles overlap on {0} samples (need at least 10)")]
    RangeMismatch(usize),

    #[error("bessel argument {0} outside (0, 60]")]
    OutOfRange(f64),

    #[error("sampled field has not decayed: tail/peak = {0:e}")]
    TailNotDecayed(f64),

    #[error("potential is not normalized: v(0) = {found}, Green's value {expected}")]
    UnnormalizedPotential { found: f64, expected: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
