use std::path::PathBuf;

use thiserror::Error;

use crate::integrators::NewtonReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The group element lies outside the region where the retraction is invertible.
    #[error("rotation angle {angle} rad is outside the injectivity domain of the {kind} retraction")]
    Domain { kind: &'static str, angle: f64 },

    #[error(
        "Newton solve did not converge: {} iterations, residual {:e}",
        .0.iterations,
        .0.final_residual
    )]
    NewtonFailed(NewtonReport),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NewtonFailed(_) | Error::Domain { .. } | Error::DegenerateFit(_) => true,
            Error::StepFailed { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
