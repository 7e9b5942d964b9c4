use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no isometry attempted: {0}")]
    NoIsometryAttempted(String),
    #[error("search exhausted: {what} (budget {budget})")]
    SearchExhausted { what: String, budget: u64 },
    #[error("construction invariant violated: {0}")]
    InvariantViolated(String),
}

impl Error {
    pub(crate) fn exhausted(what: impl Into<String>, budget: u64) -> Self {
        Error::SearchExhausted {
            what: what.into(),
            budget,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
