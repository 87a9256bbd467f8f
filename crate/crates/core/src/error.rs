use crate::lang::LexError;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("empty training data")]
    EmptyData,
    #[error("no-op pair: source and target lines are identical")]
    NoOpPair,
    #[error("pair does not differ in exactly one line")]
    NotSingleLine,
    #[error("lex error on line {line}: {source}")]
    Lex {
        line: usize,
        #[source]
        source: LexError,
    },
    #[error("compiler bridge: {0}")]
    Bridge(#[from] crate::compiler::BridgeError),
    #[error("bundle: {0}")]
    Bundle(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
