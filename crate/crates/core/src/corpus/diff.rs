//! Token-level LCS diff between an abstracted source line and its target.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edit {
    Keep {
        src: usize,
        tgt: usize,
    },
    Delete {
        src: usize,
    },
    /// Insert `tgt`'s token before source index `at`.
    Insert {
        at: usize,
        tgt: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diff {
    pub edits: Vec<Edit>,
    /// (source index, tag), left to right.
    pub deletions: Vec<(usize, String)>,
    /// (insertion point, tag), in target order.
    pub insertions: Vec<(usize, String)>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.deletions.is_empty() && self.insertions.is_empty()
    }

    pub fn cost(&self) -> usize {
        self.deletions.len() + self.insertions.len()
    }

    /// Maximal runs of non-keep edits, each as (deleted count, inserted count).
    pub fn hunks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut cur: Option<(usize, usize)> = None;
        for e in &self.edits {
            match e {
                Edit::Keep { .. } => {
                    if let Some(h) = cur.take() {
                        out.push(h);
                    }
                }
                Edit::Delete { .. } => cur.get_or_insert((0, 0)).0 += 1,
                Edit::Insert { .. } => cur.get_or_insert((0, 0)).1 += 1,
            }
        }
        out.extend(cur);
        out
    }
}

/// Minimal insert/delete edit script from `src` to `tgt` via LCS.
///
/// Walks a suffix LCS table from the left; equal tokens are matched as soon
/// as possible, and when deleting and inserting are equally good the
/// deletion comes first, so the script is deterministic.
pub fn diff_tokens<S: AsRef<str>, T: AsRef<str>>(src: &[S], tgt: &[T]) -> Diff {
    let (n, m) = (src.len(), tgt.len());
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if src[i].as_ref() == tgt[j].as_ref() {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut diff = Diff::default();
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && src[i].as_ref() == tgt[j].as_ref() {
            diff.edits.push(Edit::Keep { src: i, tgt: j });
            i += 1;
            j += 1;
        } else if i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1]) {
            diff.edits.push(Edit::Delete { src: i });
            diff.deletions.push((i, src[i].as_ref().to_string()));
            i += 1;
        } else {
            diff.edits.push(Edit::Insert { at: i, tgt: j });
            diff.insertions.push((i, tgt[j].as_ref().to_string()));
            j += 1;
        }
    }
    diff
}

/// Applies an edit script to `src`, producing the target sequence.
pub fn apply_edits<S: AsRef<str>>(src: &[S], diff: &Diff) -> Vec<String> {
    let mut out = Vec::new();
    let mut ins = diff.insertions.iter().peekable();
    let deleted: std::collections::HashSet<usize> = diff.deletions.iter().map(|d| d.0).collect();
    for (i, tok) in src.iter().enumerate() {
        while let Some((_, tag)) = ins.next_if(|(at, _)| *at <= i) {
            out.push(tag.clone());
        }
        if !deleted.contains(&i) {
            out.push(tok.as_ref().to_string());
        }
    }
    out.extend(ins.map(|(_, t)| t.clone()));
    out
}
