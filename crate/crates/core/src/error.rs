use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The three variants map onto distinct failure classes so that front ends
/// can report them differently: bad input, a refused computation that is too
/// large, and a broken precondition between two values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("resource limit: {what} ({detail})")]
    Resource { what: String, detail: String },
    #[error("contract violated: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Resource {
            what: what.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
