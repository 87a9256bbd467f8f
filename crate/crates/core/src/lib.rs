//! Learning-based repair of single-line compilation errors in small C programs.

pub mod compiler;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod eval;
pub mod features;
pub mod lang;
pub mod localizer;
pub mod mlkit;
pub mod model;
pub mod ranker;
pub mod synth;

pub use error::{Error, Result};
