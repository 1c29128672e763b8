use std::path::PathBuf;

/// Everything the command-line layer can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("configuration key `{key}`: cannot parse `{value}` as {expected}")]
    Type {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("configuration key `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] tpi_core::Error),
}

impl CliError {
    /// 2 for file-system and file-format failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use tpi_core::Error as E;
        match self {
            CliError::Io { .. } => 2,
            CliError::Core(
                E::Io(_)
                | E::MalformedHeader(_)
                | E::TruncatedPayload { .. }
                | E::VersionMismatch { .. }
                | E::TrailingData(_)
                | E::ImageFormat { .. },
            ) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
