//! Reading (source, target) program pairs from JSONL or a directory tree.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainPair {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub source: String,
    pub target: String,
    pub error_id: String,
    pub error_line: usize,
}

pub fn split_lines(text: &str) -> Vec<String> {
    let mut lines: Vec<String> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect();
    if lines.last().is_some_and(|l| l.is_empty()) && text.ends_with('\n') {
        lines.pop();
    }
    lines
}

impl TrainPair {
    pub fn source_lines(&self) -> Vec<String> {
        split_lines(&self.source)
    }

    pub fn target_lines(&self) -> Vec<String> {
        split_lines(&self.target)
    }

    /// The one line where source and target differ, if there is exactly one
    /// and both programs have the same number of lines.
    pub fn differing_line(&self) -> Option<usize> {
        let (s, t) = (self.source_lines(), self.target_lines());
        if s.len() != t.len() {
            return None;
        }
        let mut diffs = s.iter().zip(&t).enumerate().filter(|(_, (a, b))| a != b);
        let first = diffs.next()?.0;
        diffs.next().is_none().then_some(first)
    }

    pub fn label(&self, index: usize) -> String {
        self.id.clone().unwrap_or_else(|| format!("{index}"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub pairs: Vec<TrainPair>,
    /// Records that could not be parsed.
    pub skipped: usize,
}

#[derive(Deserialize)]
struct Diag {
    error_id: String,
    error_line: usize,
}

/// Loads a corpus from a JSONL file or a directory of `NNN/source.c`,
/// `NNN/target.c`, `NNN/diag.json` entries (optionally under `pairs/`).
pub fn load_corpus(path: &Path) -> Result<LoadedCorpus> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        load_dir(path)
    } else {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_jsonl(BufReader::new(file), path)
    }
}

pub fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<LoadedCorpus> {
    let mut corpus = LoadedCorpus::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TrainPair>(&line) {
            Ok(pair) => corpus.pairs.push(pair),
            Err(e) => {
                log::warn!("{}:{}: skipping malformed record: {e}", path.display(), lineno + 1);
                corpus.skipped += 1;
            }
        }
    }
    Ok(corpus)
}

fn load_dir(path: &Path) -> Result<LoadedCorpus> {
    let root = if path.join("pairs").is_dir() { path.join("pairs") } else { path.to_path_buf() };
    let mut entries: Vec<_> = fs::read_dir(&root)
        .map_err(|e| Error::io(&root, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    let mut corpus = LoadedCorpus::default();
    for dir in entries {
        let read = |name: &str| fs::read_to_string(dir.join(name)).ok();
        let parsed = (|| {
            let source = read("source.c")?;
            let target = read("target.c")?;
            let diag: Diag = serde_json::from_str(&read("diag.json")?).ok()?;
            Some(TrainPair {
                id: dir.file_name().map(|n| n.to_string_lossy().into_owned()),
                source,
                target,
                error_id: diag.error_id,
                error_line: diag.error_line,
            })
        })();
        match parsed {
            Some(pair) => corpus.pairs.push(pair),
            None => {
                log::warn!("{}: skipping incomplete pair directory", dir.display());
                corpus.skipped += 1;
            }
        }
    }
    Ok(corpus)
}

pub fn write_jsonl(pairs: &[TrainPair], path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&serde_json::to_string(p)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"source":"int a\n","target":"int a;\n","error_id":"E1","error_line":0}"#;

    #[test]
    fn three_valid_records() {
        let text = format!("{GOOD}\n{GOOD}\n{GOOD}\n");
        let c = read_jsonl(text.as_bytes(), Path::new("x")).unwrap();
        assert_eq!(c.pairs.len(), 3);
        assert_eq!(c.skipped, 0);
    }

    #[test]
    fn malformed_record_is_counted() {
        let text = format!("{GOOD}\n{{\"source\": 3}}\n");
        let c = read_jsonl(text.as_bytes(), Path::new("x")).unwrap();
        assert_eq!(c.pairs.len(), 1);
        assert_eq!(c.skipped, 1);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("e.jsonl");
        fs::write(&f, "").unwrap();
        let c = load_corpus(&f).unwrap();
        assert!(c.pairs.is_empty());
    }

    #[test]
    fn missing_path_is_io_error() {
        assert!(matches!(load_corpus(Path::new("/nonexistent/x.jsonl")), Err(Error::Io { .. })));
    }

    #[test]
    fn directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        for (name, ok) in [("001", true), ("002", false), ("000", true)] {
            let d = dir.path().join("pairs").join(name);
            fs::create_dir_all(&d).unwrap();
            fs::write(d.join("source.c"), "int a\n").unwrap();
            fs::write(d.join("target.c"), "int a;\n").unwrap();
            if ok {
                fs::write(d.join("diag.json"), r#"{"error_id":"E1","error_line":0}"#).unwrap();
            }
        }
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.pairs.len(), 2);
        assert_eq!(c.skipped, 1);
        assert_eq!(c.pairs[0].id.as_deref(), Some("000"));
    }

    #[test]
    fn single_differing_line() {
        let p: TrainPair = serde_json::from_str(GOOD).unwrap();
        assert_eq!(p.differing_line(), Some(0));
        let mut q = p.clone();
        q.target = q.source.clone();
        assert_eq!(q.differing_line(), None);
    }
}
