use thiserror::Error;

/// Errors raised by the analytic engine and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DmtError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("power exponent must be positive and finite, got {0}")]
    NonPositivePower(f64),

    #[error("multiplexing gain must be nonnegative and finite, got {0}")]
    InvalidGain(f64),

    #[error("multiplexing vector has {got} entries, configuration has {expected} users")]
    DimensionMismatch { expected: usize, got: usize },

    /// Some subset violates `sum r_i < min(|S| m, n)`. Users are 1-based.
    #[error(
        "infeasible multiplexing gains: users {users:?} sum to {sum}, limit is {limit} (strict)"
    )]
    Infeasible {
        users: Vec<usize>,
        sum: f64,
        limit: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("empty feasible range: {0}")]
    EmptyRange(String),

    #[error("too few reliable points for a slope fit: need 3, have {0}")]
    TooFewPoints(usize),
}

pub type Result<T> = std::result::Result<T, DmtError>;
