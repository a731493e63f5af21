// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: quadrature did not converge (achieved error {achieved:.3e}, requested {requested:.3e})")]
    NonConvergence {
        context: &'static str,
        achieved: f64,
        requested: f64,
    },

    #[error("unsupported dispersion: {0}")]
    UnsupportedDispersion(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("insufficient samples: need at least {needed}, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("unsupported word: {0}")]
    UnsupportedWord(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for the numerical failures the command line maps to its own exit code.
    pub fn is_nonconvergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
