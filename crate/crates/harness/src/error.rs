use std::path::PathBuf;

use kvldp_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    /// Short category name printed with CLI errors.
    pub fn category(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io { .. } | Self::Core(CoreError::Io { .. }) => "io",
            Self::Core(CoreError::Parse { .. }) => "parse",
            Self::Core(_) => "domain",
        }
    }

    /// Process exit code: 2 config, 3 I/O, 4 parse, 5 domain.
    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "config" => 2,
            "io" => 3,
            "parse" => 4,
            _ => 5,
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
