use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("config file {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Model(#[from] spinbath_core::Error),
    #[error("verification failed: max deviation {deviation:e} exceeds {tolerance:e}")]
    Verification { deviation: f64, tolerance: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn field(field: &'static str, reason: impl Into<String>) -> Self {
        Self::Field {
            field,
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Field { .. } | Self::ConfigFile { .. } | Self::Model(_) => 1,
            Self::Verification { .. } => 2,
            Self::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
