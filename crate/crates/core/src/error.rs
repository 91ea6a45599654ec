use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to load {path}: {reason}")]
    Load { path: PathBuf, reason: String },

    #[error("sequence {id} is invalid: {reason}")]
    Validation { id: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing joint {0}")]
    MissingJoint(String),

    #[error("no potentials for sub-event {subevent}, entity {entity}")]
    MissingPotential { subevent: u32, entity: String },

    #[error("label mismatch: expected {expected}, found {found}")]
    LabelMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
