//! Error type shared across the crate.

/// Errors produced by step rules, geometry, problem generators and the
/// experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument violated its domain (sign, range or finiteness).
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    /// Polyak-type ratio with positive loss and a zero denominator.
    #[error("step size undefined: loss {loss} > 0 with zero gradient norm and no stabilizer")]
    DivisionUndefined { loss: f64 },

    /// Vector lengths disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Structural misuse of an operation (bad argument counts, impossible
    /// problem shapes, and similar).
    #[error("{0}")]
    InvalidArgument(String),

    /// Config-file parse or validation failure, with field-level detail.
    #[error("config error: {0}")]
    Config(String),

    /// A run hit non-finite or runaway values and was aborted.
    #[error("run diverged at iteration {t}: {reason}")]
    Diverged { t: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::Domain {
            name,
            requirement,
            value,
        }
    }
}
