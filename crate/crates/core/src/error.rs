use thiserror::Error;

/// Errors raised by instance construction, policies, environments and the
/// experiment runner.
#[derive(Debug, Error)]
pub enum BanditError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("arm index {index} out of range for {arms} arms")]
    UnknownArm { index: usize, arms: usize },

    #[error("reward must be finite, got {0}")]
    NonFiniteReward(f64),

    #[error("optimal arm is not unique")]
    AmbiguousOptimum,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid experiment setup: {0}")]
    InvalidExperiment(String),

    #[error("unknown policy id `{0}` (expected tsg, tscg, utscg, ucb1 or tlp)")]
    UnknownPolicy(String),

    #[error("failed to parse instance file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BanditError> = std::result::Result<T, E>;
