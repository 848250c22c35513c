//! Error type shared across the toolkit.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),

    #[error("invalid pose at frame {frame}: {detail}")]
    InvalidPose { frame: usize, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate orientation: camera forward is parallel to the up axis")]
    DegenerateOrientation,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("filter removed every frame; lower k")]
    EmptyFilterResult,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training diverged at iteration {iteration}: loss is not finite")]
    TrainingDiverged { iteration: usize },

    #[error("degenerate scene: no gaussians remain")]
    DegenerateScene,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
