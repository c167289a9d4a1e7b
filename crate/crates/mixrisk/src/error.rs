use thiserror::Error;

/// Unified error type for the whole engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's mathematical domain.
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    /// An iterative scheme exhausted its budget before reaching tolerance.
    #[error("{context}: no convergence within {budget} iterations")]
    NonConvergence {
        context: &'static str,
        budget: usize,
    },

    /// Model validation failed; lists every violated invariant, not just the first.
    #[error("model validation failed:\n  - {}", violations.join("\n  - "))]
    Validation { violations: Vec<String> },

    #[error("dimension mismatch: {message}")]
    DimensionMismatch { message: String },

    /// The model cannot lose enough for the requested confidence level.
    #[error(
        "confidence level alpha={alpha} is infeasible: the loss-tail probability at zero loss \
         is already at or below alpha"
    )]
    InfeasibleConfidence { alpha: f64 },

    /// Bracket expansion hit its cap without crossing alpha.
    #[error("alpha={alpha} too small for this generator family: tail still above alpha at q={cap:e}")]
    AlphaTooSmall { alpha: f64, cap: f64 },

    #[error("implied correlation {phi} lies outside [-1, 1]")]
    InvalidCorrelation { phi: f64 },

    #[error("tail sample too small: alpha*n = {effective}, need at least 100 tail draws")]
    TailSampleTooSmall { effective: f64 },

    /// delta lies in the null space of a component scale matrix.
    #[error("degenerate portfolio: zero variance along delta under component {component}")]
    DegeneratePortfolio { component: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two inputs that must describe the same computation disagree.
    #[error("inconsistent inputs in {context}: {message}")]
    Inconsistent {
        context: &'static str,
        message: String,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a [`Error::Domain`] with a static context label.
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}
