use thiserror::Error;

/// Errors raised by the model, simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative time t = {0}; states are prepared at t = 0")]
    NegativeTime(f64),

    #[error("time must be strictly positive, got t = {0}")]
    NonPositiveTime(f64),

    #[error("lattice domain half-width {half_width} is smaller than the required {required} (8 sigma at the horizon)")]
    DomainTooSmall { half_width: f64, required: f64 },

    #[error("unstable lattice step: alpha = {alpha} exceeds 0.5 (t = {t}, dt = {dt})")]
    Unstable { alpha: f64, t: f64, dt: f64 },

    #[error("non-finite lattice value in cell {cell} at t = {t}")]
    NonFinite { cell: usize, t: f64 },

    #[error("cumulative distribution is not monotone at cell {cell} (t = {t})")]
    NonMonotoneCdf { cell: usize, t: f64 },

    #[error("horizon exceeded: requested t = {requested} but horizon is {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("degenerate statistics: {0}")]
    Degenerate(String),

    #[error("logarithm argument {value} is not positive at grid point {index}")]
    NonPositiveLog { index: usize, value: f64 },

    #[error("exponent overflow: A*t = {0} exceeds 700")]
    Overflow(f64),

    #[error("grid has {0} points; at least 3 are required")]
    GridTooCoarse(usize),

    #[error("rejection rate {rate} exceeds 1% ({rejected} of {total} samples)")]
    TooManyRejections {
        rejected: usize,
        total: usize,
        rate: f64,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(invalid("t", format!("must be finite, got {t}")));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}
