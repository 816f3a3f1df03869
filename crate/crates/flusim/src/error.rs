//! Crate-wide error type.
//!
//! Errors split into two families: configuration problems (bad schema,
//! out-of-range values, inconsistent inputs) and runtime failures (I/O,
//! numerical blow-ups). The command-line entry point maps the first family
//! to exit code 1 and the second to exit code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration document or programmatically built config is invalid.
    /// `path` names the offending key, e.g. `strategies[0].coverage`.
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Two summaries cannot be compared pair-wise because they were not
    /// produced from the same seed list.
    #[error("summaries are not paired: {0}")]
    SeedMismatch(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    /// Numerical integration failed (non-finite state, usually a step size
    /// far too large for the given rates).
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Shorthand used throughout config validation.
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors that indicate bad user input rather than a failure
    /// while running; drives the process exit code.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::SeedMismatch(_))
    }
}
