use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A field violates its invariant. `line` is set when the value came from a file.
    #[error("{}{reason}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Validation {
        field: String,
        reason: String,
        line: Option<usize>,
    },

    #[error("probability {0} lies outside (0, 1)")]
    ProbabilityDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("success probability is zero; no finite number of attempts succeeds")]
    ZeroSuccess,

    #[error("profile has no success probability (computed to depth {depth} of {nodes})")]
    IncompleteProfile { depth: usize, nodes: usize },

    #[error("quadrature did not reach tolerance {tol:e} on [{a}, {b}]")]
    Quadrature { a: f64, b: f64, tol: f64 },

    #[error("no successful delivery within the cap of {cap} attempts")]
    NoSuccess { cap: u64 },

    #[error("optimizer did not converge after {iterations} iterations; final bracket [{lo}, {hi}]")]
    NonConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
            line: None,
        }
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::ProbabilityDomain(_)
                | Error::InvalidArgument(_)
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }
}
