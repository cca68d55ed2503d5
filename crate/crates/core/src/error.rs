use thiserror::Error;

/// Errors produced by configuration handling, samplers, the exact oracle
/// and the expander protocol.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible initial spec: {0}")]
    Spec(String),

    #[error("state space too large: {0}")]
    Capacity(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("mixing time undefined: {0}")]
    MixingUndefined(String),

    #[error("analysis error: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
