use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed data in {path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] bjj_core::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SINGULARITY: i32 = 3;
    pub const INCONCLUSIVE: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        use bjj_core::Error as E;
        match self {
            LabError::UnknownPreset { .. } | LabError::Config(_) => exit::CONFIG,
            LabError::Io { .. } | LabError::Data { .. } => exit::IO,
            LabError::Model(e) => match e {
                E::InvalidParameter(_) | E::Precondition(_) => exit::CONFIG,
                E::Singularity { .. } | E::GuardedEstimate { .. } => exit::SINGULARITY,
                E::Inconclusive(_) | E::NoOscillation { .. } | E::TooFewExtrema { .. } => {
                    exit::INCONCLUSIVE
                }
                E::StepUnderflow { .. } | E::Domain(_) => exit::NUMERICAL,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}
