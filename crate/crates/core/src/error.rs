use thiserror::Error;

use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::ink::InkError;
use crate::mlp::MlpError;

/// Errors surfaced by the pipeline, recognizer, and file-level stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ink(#[from] InkError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
    #[error("no model for cluster {0}")]
    NoModel(u8),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
