use std::io;
use std::path::{Path, PathBuf};

use dualprec_render::RenderError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unknown names, invalid combinations.
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: dualprec::Error,
    },
    #[error(transparent)]
    Core(#[from] dualprec::Error),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn dataset(path: &Path) -> impl FnOnce(dualprec::Error) -> CliError + '_ {
        move |source| CliError::Dataset {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
