use thiserror::Error;

/// Errors produced by the finikey algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The divergence spectrum is +inf: the only mass beyond `eps` sits on
    /// outcomes with zero reference probability.
    #[error("divergence spectrum is unbounded")]
    UnboundedSpectrum,

    /// The optimal test has zero type-II error, so the divergence is +inf.
    #[error("hypothesis testing divergence is infinite")]
    InfiniteDivergence,

    #[error("alphabet of {0} outcomes is too large for exhaustive evaluation")]
    TooLarge(usize),

    #[error("infeasible degree distribution: {0}")]
    Infeasible(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cannot shorten {short} and puncture {punct} of {n_var} variables")]
    Capacity {
        short: usize,
        punct: usize,
        n_var: usize,
    },

    #[error("target block error rate {target} is unreachable (FER range [{lowest}, {highest}])")]
    UnreachableTarget {
        target: f64,
        lowest: f64,
        highest: f64,
    },

    #[error("rank-deficient design (condition number {0:e})")]
    RankDeficient(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}
