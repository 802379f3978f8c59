use crate::algebra::ParseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid center: {0}")]
    InvalidCenter(String),
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("center not admissible: {0}")]
    NotAdmissible(String),
    #[error("point not in cosupport: {0}")]
    NotInCosupport(String),
    #[error("no maximal contact hypersurface: {0}")]
    NoContact(String),
    #[error("cannot straighten: {0}")]
    Straighten(String),
    #[error("step limit of {limit} blow-ups reached")]
    StepLimit { limit: u32, partial: Box<crate::resolver::ResolutionTree> },
    #[error("{cause}")]
    Aborted { cause: Box<Error>, partial: Box<crate::resolver::ResolutionTree> },
    #[error("check failed: {0}")]
    Check(String),
    #[error("computation too large: {0}")]
    TooLarge(String),
    #[error("no stable value: {0}")]
    Unstable(String),
}

impl Error {
    /// Diagnostic failures of the algorithm, as opposed to bad input.
    pub fn is_diagnostic(&self) -> bool {
        match self {
            Error::Aborted { cause, .. } => cause.is_diagnostic(),
            _ => matches!(self, Error::StepLimit { .. } | Error::Straighten(_) | Error::NoContact(_) | Error::Check(_) | Error::TooLarge(_) | Error::Unstable(_)),
        }
    }
}

impl Error {
    /// The tree built before a diagnostic failure, if any.
    pub fn partial_tree(&self) -> Option<&crate::resolver::ResolutionTree> {
        match self {
            Error::StepLimit { partial, .. } | Error::Aborted { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
