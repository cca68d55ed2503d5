//! Library surface of the experiment harness; the binary is a thin
//! wrapper so tests can drive experiments in-process.

pub mod experiment;

use serde::Serialize;

pub use experiment::{run_experiment, ExperimentFile, Mode, Overrides};

/// Exit codes: 0 ok, 1 validation, 2 runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Validation,
    Runtime,
}

#[derive(Debug, thiserror::Error, Serialize)]
#[error("{kind:?}: {message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        CliError {
            kind: ErrorKind::Validation,
            message,
        }
    }

    pub fn runtime(message: String) -> Self {
        CliError {
            kind: ErrorKind::Runtime,
            message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Runtime => 2,
        }
    }

    /// Machine-readable form emitted on stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            error: &'a CliError,
        }
        serde_json::to_string(&Wire { error: self }).expect("error serializes")
    }
}

impl From<plurality_core::Error> for CliError {
    fn from(err: plurality_core::Error) -> Self {
        use plurality_core::Error as E;
        let kind = match err {
            E::Validation(_) | E::Parameter(_) | E::Spec(_) | E::Analysis(_) => {
                ErrorKind::Validation
            }
            E::UndefinedMetric(_)
            | E::Capacity(_)
            | E::Numeric(_)
            | E::Generation(_)
            | E::MixingUndefined(_) => ErrorKind::Runtime,
        };
        CliError {
            kind,
            message: err.to_string(),
        }
    }
}
