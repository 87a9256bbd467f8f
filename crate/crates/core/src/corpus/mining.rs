//! Repair classes and repair profiles mined from training pairs.

use super::diff::{diff_tokens, Diff};
use super::loader::TrainPair;
use crate::error::{Error, Result};
use crate::lang::{abstract_program_line, build_symbol_table, AbstractedLine, EOL};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

pub type Bigram = (String, String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepairKind {
    Insert,
    Delete,
    Replace,
    Misc,
}

impl fmt::Display for RepairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for RepairKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Insert" => RepairKind::Insert,
            "Delete" => RepairKind::Delete,
            "Replace" => RepairKind::Replace,
            "Misc" => RepairKind::Misc,
            other => return Err(Error::Invalid(format!("unknown repair kind {other}"))),
        })
    }
}

/// Identity of a repair class: errorID, ordered deletions, ordered
/// insertions, and the kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassKey {
    pub error_id: String,
    pub deletions: Vec<String>,
    pub insertions: Vec<String>,
    pub kind: RepairKind,
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: &[String]| if v.is_empty() { "∅".to_string() } else { v.join(" ") };
        write!(f, "<{} | {} | {}> {}", self.error_id, side(&self.deletions), side(&self.insertions), self.kind)
    }
}

/// Kind of an edit script. Replace needs every hunk to swap as many
/// tokens as it removes.
pub fn classify(diff: &Diff) -> RepairKind {
    match (diff.deletions.is_empty(), diff.insertions.is_empty()) {
        (true, false) => RepairKind::Insert,
        (false, true) => RepairKind::Delete,
        (false, false) if diff.hunks().iter().all(|(d, i)| d == i) => RepairKind::Replace,
        _ => RepairKind::Misc,
    }
}

/// Bigrams of a tag sequence with the end-of-line sentinel: bigram `p` is
/// `(t_p, t_{p+1})` with `t_n = EOL`. An empty line has none.
pub fn line_bigrams<S: AsRef<str>>(tags: &[S]) -> Vec<Bigram> {
    (0..tags.len())
        .map(|p| {
            let next = tags.get(p + 1).map(|t| t.as_ref()).unwrap_or(EOL);
            (tags[p].as_ref().to_string(), next.to_string())
        })
        .collect()
}

/// Bigram positions touched by an edit script: deleting token `i` touches
/// bigram `i`; inserting at point `p` touches bigram `p - 1` (bigram 0 when
/// `p == 0`).
pub fn touched_positions(diff: &Diff, len: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    if len == 0 {
        return out;
    }
    for (i, _) in &diff.deletions {
        out.insert(*i);
    }
    for (p, _) in &diff.insertions {
        out.insert(p.saturating_sub(1).min(len - 1));
    }
    out
}

/// The repair profile: bigram types touched by the edit script, each once.
pub fn profile_of<S: AsRef<str>>(tags: &[S], diff: &Diff) -> BTreeSet<Bigram> {
    let bigrams = line_bigrams(tags);
    touched_positions(diff, tags.len()).into_iter().map(|p| bigrams[p].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedPair {
    /// Index of the pair in the loaded corpus.
    pub pair: usize,
    pub line: usize,
    pub error_id: String,
    pub source: AbstractedLine,
    pub target: Vec<String>,
    pub diff: Diff,
    pub key: ClassKey,
    pub profile: BTreeSet<Bigram>,
}

impl MinedPair {
    pub fn source_tags(&self) -> Vec<String> {
        self.source.tags()
    }
}

/// Mines class and profile for one pair.
pub fn mine_pair(index: usize, pair: &TrainPair) -> Result<MinedPair> {
    let src_lines = pair.source_lines();
    let tgt_lines = pair.target_lines();
    let line = pair.differing_line().ok_or(Error::NotSingleLine)?;
    let src_table = build_symbol_table(&src_lines);
    let tgt_table = build_symbol_table(&tgt_lines);
    let source = abstract_program_line(&src_lines, &src_table, line).map_err(|source| Error::Lex { line, source })?;
    let target =
        abstract_program_line(&tgt_lines, &tgt_table, line).map_err(|source| Error::Lex { line, source })?.tags();
    mine_lines(index, &pair.error_id, source, target)
}

/// Mines from an already abstracted source line and target tag sequence.
pub fn mine_lines(index: usize, error_id: &str, source: AbstractedLine, target: Vec<String>) -> Result<MinedPair> {
    let src_tags = source.tags();
    let diff = diff_tokens(&src_tags, &target);
    if diff.is_empty() {
        return Err(Error::NoOpPair);
    }
    let key = ClassKey {
        error_id: error_id.to_string(),
        deletions: diff.deletions.iter().map(|d| d.1.clone()).collect(),
        insertions: diff.insertions.iter().map(|d| d.1.clone()).collect(),
        kind: classify(&diff),
    };
    let profile = profile_of(&src_tags, &diff);
    Ok(MinedPair { pair: index, line: source.line, error_id: error_id.to_string(), source, target, diff, key, profile })
}
