use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {msg}")]
    Format { file: String, line: usize, msg: String },
    #[error("{file}:{line}:{col}: {msg}")]
    Grammar { file: String, line: usize, col: usize, msg: String },
    #[error("domain configuration: {0}")]
    Domain(String),
    #[error("unknown semantic type `{0}`")]
    UnknownType(String),
    #[error("unknown value parser `{0}`")]
    UnknownParser(String),
    #[error("cannot backtrack {steps} atoms, initial segment has {atoms}")]
    Backtrack { steps: usize, atoms: usize },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("config: {0}")]
    Config(String),
    #[error("evaluation: {0}")]
    Eval(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
