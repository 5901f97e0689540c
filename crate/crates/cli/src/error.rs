use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command run. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", ConfigDisplay(self))]
    Config {
        origin: PathBuf,
        line: Option<usize>,
        /// `section.key` of the offending entry.
        key: Option<String>,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numerical stage failed after the configuration was accepted.
    #[error(transparent)]
    Numerics(#[from] memheat_core::Error),
}

struct ConfigDisplay<'a>(&'a CliError);

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let CliError::Config { origin, line, key, message } = self.0 else {
            return Ok(());
        };
        write!(f, "config error in {}", origin.display())?;
        if let Some(line) = line {
            write!(f, " (line {line})")?;
        }
        if let Some(key) = key {
            write!(f, ": {key}")?;
        }
        write!(f, ": {message}")
    }
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    /// Exit code: 1 for configuration, usage and I/O problems, 3 when the
    /// numerics could not produce a result.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numerics(_) => 3,
            _ => 1,
        }
    }
}
