//! Uniform diagnostic interface over the built-in mock and external compilers.

pub mod external;
pub mod mock;
pub mod patterns;

pub use external::ExternalCompiler;
pub use mock::MockCompiler;
pub use patterns::{PatternTable, E_UNK};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub error_id: String,
    /// 0-based line, clipped to the program.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("compiler command not found: {0}")]
    NotFound(String),
    #[error("compiler timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("compiler exited with {status} but reported no errors: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("bad compiler spec {0:?}")]
    BadSpec(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Compiler: Send + Sync {
    fn compile(&self, program: &[String]) -> Result<Vec<Diagnostic>, BridgeError>;

    fn error_count(&self, program: &[String]) -> Result<usize, BridgeError> {
        Ok(self.compile(program)?.len())
    }
}

/// Backend chosen on the command line: `mock` or `external:<command>`.
#[derive(Debug, Clone)]
pub enum Backend {
    Mock(MockCompiler),
    External(ExternalCompiler),
}

impl Backend {
    pub fn from_spec(spec: &str) -> Result<Self, BridgeError> {
        if spec == "mock" {
            Ok(Backend::Mock(MockCompiler::default()))
        } else if let Some(cmd) = spec.strip_prefix("external:") {
            Ok(Backend::External(ExternalCompiler::new(cmd)?))
        } else {
            Err(BridgeError::BadSpec(spec.to_string()))
        }
    }
}

impl Compiler for Backend {
    fn compile(&self, program: &[String]) -> Result<Vec<Diagnostic>, BridgeError> {
        match self {
            Backend::Mock(m) => m.compile(program),
            Backend::External(e) => e.compile(program),
        }
    }
}
