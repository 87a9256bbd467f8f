//! Line-deletion baseline: blank every line the compiler complained about.

use crate::compiler::{BridgeError, Compiler, Diagnostic};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KaliOutcome {
    pub program: Vec<String>,
    pub deleted: BTreeSet<usize>,
    /// No errors remain.
    pub repaired: bool,
}

/// Deletes the lines named in `diagnostics` (they become empty so line
/// numbers stay put) and recompiles.
pub fn kali(
    program: &[String],
    diagnostics: &[Diagnostic],
    compiler: &dyn Compiler,
) -> Result<KaliOutcome, BridgeError> {
    let deleted: BTreeSet<usize> = diagnostics.iter().map(|d| d.line).filter(|&l| l < program.len()).collect();
    let mut out = program.to_vec();
    for &l in &deleted {
        out[l].clear();
    }
    let repaired = deleted.is_empty() && diagnostics.is_empty() || compiler.error_count(&out)? == 0;
    Ok(KaliOutcome { program: out, deleted, repaired })
}
