use std::path::{Path, PathBuf};

/// Failures of the command line layer, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(geosep_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: unsupported format: {reason}", path.display())]
    Unsupported { path: PathBuf, reason: String },
    #[error("{}: corrupt file: {reason}", path.display())]
    Corrupt { path: PathBuf, reason: String },
}

impl CliError {
    pub const EXIT_CONFIG: i32 = 2;
    pub const EXIT_NUMERIC: i32 = 3;
    pub const EXIT_IO: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Numeric(_) => Self::EXIT_NUMERIC,
            CliError::Io { .. } | CliError::Unsupported { .. } | CliError::Corrupt { .. } => Self::EXIT_IO,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<geosep_core::Error> for CliError {
    /// Bad parameters and inconsistent inputs are config errors; everything
    /// else the core reports is a numeric failure.
    fn from(e: geosep_core::Error) -> Self {
        use geosep_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::TooSmall { .. } | E::Dimension { .. } | E::SizeMismatch { .. } | E::Shear { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
