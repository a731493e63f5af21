// SPDX-License-Identifier: Apache-2.0

//! Configuration, dispatch and output for the `polaron-decay` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{emit_config, parse_config, Format, Mode, RunConfig};
pub use output::{Cell, Table};
pub use run::{config_hash, run};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub(crate) fn io(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }

    pub(crate) fn csv(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }

    /// Tags a library error with the module it came from.
    pub(crate) fn from_core(module: &'static str) -> impl Fn(polaron_decay::Error) -> CliError {
        use polaron_decay::Error;
        move |e| match e {
            Error::NonConvergence { .. } | Error::SingularInput(_) => {
                CliError::Numerical(format!("{module}: {e}"))
            }
            _ => CliError::Config(format!("{module}: {e}")),
        }
    }
}
