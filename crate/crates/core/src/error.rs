use thiserror::Error;

/// Errors raised by the group layer, the signature scheme and the protocol roles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid {kind} encoding: {reason}")]
    InvalidElement { kind: &'static str, reason: String },

    #[error("unsupported security level {0} (supported: {1})")]
    UnsupportedParameter(u32, &'static str),

    #[error("identity has already been issued a partial key")]
    DuplicateIdentity,

    #[error("participant keys are incomplete: {0}")]
    IncompleteKeys(&'static str),

    #[error("participant has not completed registration")]
    IncompleteRegistration,

    #[error("issued key material failed its pairing check")]
    IssuanceCheckFailed,

    #[error("cannot aggregate an empty list of signatures")]
    EmptyInput,

    #[error("time slot has no accepted submissions")]
    EmptySlot,

    #[error("could not find a fresh pseudonym index")]
    IndexCollision,

    #[error("pseudonym index is not present in the ledger")]
    UnknownIndex,

    #[error("envelope authentication failed")]
    AuthFailure,

    #[error("participant count must be at least 1")]
    NonPositiveN,

    #[error("malformed {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidElement {
            kind,
            reason: reason.into(),
        }
    }
}
