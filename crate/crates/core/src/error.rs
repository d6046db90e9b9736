use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps `Domain`/`Config`/`Json`/`Degenerate` to exit code 2
/// (validation) and `Convergence`/`Bracket` to exit code 3 (numeric
/// non-convergence).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A certified evaluation could not reach the requested tolerance.
    /// Carries the best value reached and the error bound that was certified.
    #[error("did not converge: {message} (best value {value:e}, certified bound {bound:e})")]
    Convergence {
        message: String,
        value: f64,
        bound: f64,
    },

    /// A bracketing root search found no sign change. The trace records the
    /// `(abscissa, residual)` pairs that were scanned.
    #[error("no sign change while bracketing: {message}")]
    Bracket {
        message: String,
        trace: Vec<(f64, f64)>,
    },

    #[error("degenerate step distribution: {0}")]
    Degenerate(String),

    #[error("invalid JSON at {path}: {message}")]
    Json { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
