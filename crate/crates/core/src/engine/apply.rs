//! Mechanical application of a repair class at the flagged bigrams of an
//! abstract line.

use crate::corpus::{Bigram, ClassKey, RepairKind};
use crate::lang::{AbstractToken, EOL};
use std::collections::BTreeSet;

/// An edited abstract line. `partial` is set when some deletion or
/// replacement found no flagged occurrence to act on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub tokens: Vec<AbstractToken>,
    pub partial: bool,
}

impl Candidate {
    pub fn tags(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.tag.clone()).collect()
    }
}

fn tag_at(line: &[AbstractToken], p: usize) -> &str {
    line.get(p).map(|t| t.tag.as_str()).unwrap_or(EOL)
}

/// Positions `p` (bigram `(t_p, t_{p+1})`, `t_n = EOL`) whose bigram type is
/// flagged, left to right.
pub fn flagged_occurrences(line: &[AbstractToken], profile: &BTreeSet<Bigram>) -> Vec<usize> {
    (0..line.len()).filter(|&p| profile.iter().any(|(a, b)| a == tag_at(line, p) && b == tag_at(line, p + 1))).collect()
}

/// Insertion points offered by occurrence `p`: before, between, after.
fn insertion_points(p: usize, len: usize) -> [usize; 3] {
    [p, (p + 1).min(len), (p + 2).min(len)]
}

fn insert_at(line: &[AbstractToken], at: usize, ensemble: &[String]) -> Vec<AbstractToken> {
    let mut out = line[..at].to_vec();
    out.extend(ensemble.iter().map(AbstractToken::inserted));
    out.extend_from_slice(&line[at..]);
    out
}

/// Insert classes: the whole insertion ensemble tried at three points per
/// flagged occurrence, occurrences left to right.
pub fn apply_insert(line: &[AbstractToken], insertions: &[String], occurrences: &[usize]) -> Vec<Candidate> {
    occurrences
        .iter()
        .flat_map(|&p| insertion_points(p, line.len()))
        .map(|at| Candidate { tokens: insert_at(line, at, insertions), partial: false })
        .collect()
}

/// Finds the token to edit for `tok`: the rightmost unused occurrence whose
/// first token matches, else whose second token matches.
fn pick_target(
    line: &[AbstractToken],
    tok: &str,
    occurrences: &[usize],
    used: &[bool],
    edited: &[bool],
) -> Option<(usize, usize)> {
    for slot in 0..2 {
        for (k, &p) in occurrences.iter().enumerate().rev() {
            let i = p + slot;
            if !used[k] && i < line.len() && !edited[i] && line[i].tag == tok {
                return Some((k, i));
            }
        }
    }
    None
}

/// Shared right-to-left scan for deletions and replacements. Returns the
/// per-token replacement (`None` deletes) and whether a token found no target.
fn scan(
    line: &[AbstractToken],
    edits: &[(String, Option<String>)],
    occurrences: &[usize],
) -> (Vec<Option<Option<String>>>, bool) {
    let mut used = vec![false; occurrences.len()];
    let mut edited = vec![false; line.len()];
    let mut action: Vec<Option<Option<String>>> = vec![None; line.len()];
    let mut partial = false;
    for (tok, replacement) in edits.iter().rev() {
        match pick_target(line, tok, occurrences, &used, &edited) {
            Some((k, i)) => {
                used[k] = true;
                edited[i] = true;
                action[i] = Some(replacement.clone());
            }
            None => partial = true,
        }
    }
    (action, partial)
}

fn rebuild(line: &[AbstractToken], action: &[Option<Option<String>>]) -> Vec<AbstractToken> {
    line.iter()
        .zip(action)
        .filter_map(|(t, a)| match a {
            None => Some(t.clone()),
            Some(None) => None,
            Some(Some(tag)) if *tag == t.tag => Some(t.clone()),
            Some(Some(tag)) => Some(AbstractToken::inserted(tag.clone())),
        })
        .collect()
}

/// Delete classes: deletion tokens scanned right to left, each removed from
/// the rightmost flagged occurrence that still holds it.
pub fn apply_delete(line: &[AbstractToken], deletions: &[String], occurrences: &[usize]) -> Candidate {
    let edits: Vec<(String, Option<String>)> = deletions.iter().map(|d| (d.clone(), None)).collect();
    let (action, partial) = scan(line, &edits, occurrences);
    Candidate { tokens: rebuild(line, &action), partial }
}

/// Replace classes: (deleted, inserted) pairs scanned right to left, each
/// substituted in place.
pub fn apply_replace(
    line: &[AbstractToken],
    deletions: &[String],
    insertions: &[String],
    occurrences: &[usize],
) -> Candidate {
    let edits: Vec<(String, Option<String>)> =
        deletions.iter().zip(insertions).map(|(d, i)| (d.clone(), Some(i.clone()))).collect();
    let (action, partial) = scan(line, &edits, occurrences);
    Candidate { tokens: rebuild(line, &action), partial }
}

/// Misc classes: the delete phase, then the insertion ensemble at the
/// original flagged occurrences carried over to the shortened line.
pub fn apply_misc(
    line: &[AbstractToken],
    deletions: &[String],
    insertions: &[String],
    occurrences: &[usize],
) -> Vec<Candidate> {
    let edits: Vec<(String, Option<String>)> = deletions.iter().map(|d| (d.clone(), None)).collect();
    let (action, partial) = scan(line, &edits, occurrences);
    let shortened = rebuild(line, &action);
    if insertions.is_empty() {
        return vec![Candidate { tokens: shortened, partial }];
    }
    // survivors before each original point
    let mut survivors = vec![0usize; line.len() + 1];
    for i in 0..line.len() {
        survivors[i + 1] = survivors[i] + usize::from(action[i].is_none());
    }
    occurrences
        .iter()
        .flat_map(|&p| insertion_points(p, line.len()))
        .map(|at| Candidate { tokens: insert_at(&shortened, survivors[at], insertions), partial })
        .collect()
}

/// All candidates for a class at the flagged occurrences of `profile`, in
/// attempt order. Candidates identical to the input line are dropped.
pub fn apply_class(line: &[AbstractToken], key: &ClassKey, profile: &BTreeSet<Bigram>) -> Vec<Candidate> {
    let occ = flagged_occurrences(line, profile);
    if occ.is_empty() {
        return Vec::new();
    }
    let out = match key.kind {
        RepairKind::Insert => apply_insert(line, &key.insertions, &occ),
        RepairKind::Delete => vec![apply_delete(line, &key.deletions, &occ)],
        RepairKind::Replace => vec![apply_replace(line, &key.deletions, &key.insertions, &occ)],
        RepairKind::Misc => apply_misc(line, &key.deletions, &key.insertions, &occ),
    };
    let same = |c: &Candidate| c.tokens.len() == line.len() && c.tokens.iter().zip(line).all(|(a, b)| a.tag == b.tag);
    out.into_iter().filter(|c| !same(c)).collect()
}
