//! Exit-code aware errors: 1 for protocol rejections, 2 for usage or config.

use std::fmt;

use mhcs_core::Error;

pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CliResult<T> = Result<T, Failure>;

pub fn usage(msg: impl fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow::anyhow!("{msg}"),
    }
}

pub fn rejected(msg: impl fmt::Display) -> Failure {
    Failure {
        code: EXIT_REJECTED,
        error: anyhow::anyhow!("{msg}"),
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            error,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnsupportedParameter(..)
            | Error::Malformed(_)
            | Error::NonPositiveN
            | Error::InvalidElement { .. } => EXIT_USAGE,
            _ => EXIT_REJECTED,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}
