use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty action-value row")]
    EmptyActionValues,

    #[error("action {action} out of range for {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },

    #[error("state {state} out of range for {num_states} states")]
    StateOutOfRange { state: usize, num_states: usize },

    #[error("episode already finished; call reset before step")]
    EpisodeFinished,

    #[error("environment has not been reset")]
    NotReset,

    #[error("operation requires a tabular environment, got {0}")]
    NotTabular(String),

    #[error("observation dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("observation kind mismatch: {0}")]
    ObservationKind(&'static str),

    #[error("weights diverged (non-finite) at episode {episode}, step {step}")]
    Diverged { episode: usize, step: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
