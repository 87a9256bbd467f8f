//! Frozen vocabularies and the binary feature encoding of a diagnosed line.

use crate::corpus::{line_bigrams, Bigram, MinedPair};
use crate::error::{Error, Result};
use std::collections::{BTreeSet, HashMap};
use std::path::Path;

/// Sparse binary vector: sorted indices of the set bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub dim: usize,
    pub active: Vec<usize>,
}

impl FeatureVector {
    pub fn new(dim: usize, mut active: Vec<usize>) -> Self {
        active.sort_unstable();
        active.dedup();
        FeatureVector { dim, active }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &i in &self.active {
            v[i] = 1.0;
        }
        v
    }

    pub fn get(&self, i: usize) -> bool {
        self.active.binary_search(&i).is_ok()
    }

    pub fn popcount(&self) -> usize {
        self.active.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    errors: Vec<String>,
    unigrams: Vec<String>,
    bigrams: Vec<Bigram>,
    error_index: HashMap<String, usize>,
    unigram_index: HashMap<String, usize>,
    bigram_index: HashMap<Bigram, usize>,
}

impl Vocabulary {
    pub fn from_lists(errors: Vec<String>, unigrams: Vec<String>, bigrams: Vec<Bigram>) -> Self {
        let idx = |v: &[String]| v.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Vocabulary {
            error_index: idx(&errors),
            unigram_index: idx(&unigrams),
            bigram_index: bigrams.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect(),
            errors,
            unigrams,
            bigrams,
        }
    }

    /// Collects error ids, unigrams and bigrams from the abstracted source
    /// lines of the mined pairs. Target lines are never looked at.
    pub fn build(pairs: &[MinedPair]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let lines: Vec<(String, Vec<String>)> = pairs.iter().map(|p| (p.error_id.clone(), p.source.tags())).collect();
        Ok(Self::from_lines(&lines))
    }

    pub fn from_lines(lines: &[(String, Vec<String>)]) -> Self {
        let mut errors = BTreeSet::new();
        let mut unigrams = BTreeSet::new();
        let mut bigrams = BTreeSet::new();
        for (err, tags) in lines {
            errors.insert(err.clone());
            unigrams.extend(tags.iter().cloned());
            bigrams.extend(line_bigrams(tags));
        }
        Self::from_lists(errors.into_iter().collect(), unigrams.into_iter().collect(), bigrams.into_iter().collect())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.errors.len(), self.unigrams.len(), self.bigrams.len())
    }

    pub fn dim(&self) -> usize {
        self.errors.len() + self.unigrams.len() + self.bigrams.len()
    }

    pub fn errors(&self) -> &[String] {
        &self.errors
    }

    pub fn unigrams(&self) -> &[String] {
        &self.unigrams
    }

    pub fn bigrams(&self) -> &[Bigram] {
        &self.bigrams
    }

    pub fn error_id(&self, e: &str) -> Option<usize> {
        self.error_index.get(e).copied()
    }

    pub fn unigram_id(&self, t: &str) -> Option<usize> {
        self.unigram_index.get(t).copied()
    }

    pub fn bigram_id(&self, b: &Bigram) -> Option<usize> {
        self.bigram_index.get(b).copied()
    }

    /// Offset of bigram `i` inside a feature vector.
    pub fn bigram_feature(&self, i: usize) -> usize {
        self.errors.len() + self.unigrams.len() + i
    }

    /// Encodes a line: errorID one-hot, unigram presence, bigram presence.
    /// Unknown error ids and tokens contribute nothing.
    pub fn encode<S: AsRef<str>>(&self, tags: &[S], error_id: &str) -> FeatureVector {
        let mut active = Vec::new();
        if let Some(e) = self.error_id(error_id) {
            active.push(e);
        }
        let u0 = self.errors.len();
        for t in tags {
            if let Some(u) = self.unigram_id(t.as_ref()) {
                active.push(u0 + u);
            }
        }
        for b in line_bigrams(tags) {
            if let Some(i) = self.bigram_id(&b) {
                active.push(self.bigram_feature(i));
            }
        }
        FeatureVector::new(self.dim(), active)
    }

    /// Vocabulary indices of the distinct known bigrams in a line.
    pub fn line_bigram_ids<S: AsRef<str>>(&self, tags: &[S]) -> Vec<usize> {
        let mut ids: Vec<usize> = line_bigrams(tags).iter().filter_map(|b| self.bigram_id(b)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, lines: Vec<String>| {
            let path = dir.join(name);
            let mut text = lines.join("\n");
            text.push('\n');
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
        };
        write("errors.txt", self.errors.clone())?;
        write("unigrams.txt", self.unigrams.clone())?;
        write("bigrams.txt", self.bigrams.iter().map(|(a, b)| format!("{a} {b}")).collect())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<Vec<String>> {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Ok(text.lines().filter(|l| !l.is_empty()).map(str::to_string).collect())
        };
        let bigrams = read("bigrams.txt")?
            .into_iter()
            .map(|l| {
                l.split_once(' ')
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .ok_or_else(|| Error::Bundle(format!("bad bigram line {l:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_lists(read("errors.txt")?, read("unigrams.txt")?, bigrams))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::abstraction::tags_of;
    use crate::lang::EOL;
    use proptest::prelude::*;

    fn vocab(lines: &[(&str, &str)]) -> Vocabulary {
        let lines: Vec<_> = lines.iter().map(|(e, l)| (e.to_string(), tags_of(l))).collect();
        Vocabulary::from_lines(&lines)
    }

    #[test]
    fn single_line_vocabulary() {
        let v = vocab(&[("E1", "a = b ;")]);
        assert_eq!(v.dims(), (1, 4, 4));
        assert!(v.bigram_id(&(";".into(), EOL.into())).is_some());
    }

    #[test]
    fn duplicate_lines_do_not_grow() {
        assert_eq!(vocab(&[("E1", "a = b ;")]), vocab(&[("E1", "a = b ;"), ("E1", "a = b ;")]));
    }

    #[test]
    fn unseen_token_keeps_length() {
        let v = vocab(&[("E1", "a = b ;")]);
        let x = v.encode(&tags_of("a = zzz ;"), "E1");
        assert_eq!(x.dim, v.dim());
        // E1, a, =, ;, (a =), (; EOL)
        assert_eq!(x.popcount(), 6);
    }

    #[test]
    fn empty_line_sets_only_error_bit() {
        let v = vocab(&[("E1", "a = b ;")]);
        assert_eq!(v.encode::<&str>(&[], "E1").active, [0]);
    }

    #[test]
    fn full_line_encoding() {
        let v = vocab(&[("E1", "a = b ;"), ("E2", "x")]);
        let x = v.encode(&tags_of("a = b ;"), "E1");
        // sorted unigrams: ; = a b x ; sorted bigrams include (; EOL),(= b),(a =),(b ;),(x EOL)
        let (e, u, _) = v.dims();
        assert_eq!(x.popcount(), 1 + 4 + 4);
        assert!(x.get(v.error_id("E1").unwrap()));
        assert!(!x.get(e + v.unigram_id("x").unwrap()));
        assert_eq!(x.active.iter().filter(|&&i| i >= e && i < e + u).count(), 4);
    }

    #[test]
    fn unknown_error_zero_block() {
        let v = vocab(&[("E1", "a = b ;")]);
        let x = v.encode(&tags_of("a = b ;"), "E999");
        assert!(x.active.iter().all(|&i| i >= 1));
        assert_eq!(x.popcount(), 8);
    }

    #[test]
    fn save_load_round_trip() {
        let v = vocab(&[("E1", "a = b ;"), ("E3", "( x )")]);
        let dir = tempfile::tempdir().unwrap();
        v.save(dir.path()).unwrap();
        assert_eq!(Vocabulary::load(dir.path()).unwrap(), v);
    }

    fn line() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", ";", "(", ")"]).prop_map(String::from), 0..10)
    }

    proptest! {
        #[test]
        fn block_popcounts(lines in prop::collection::vec(line(), 1..5), probe in line()) {
            let mut all: Vec<(String, Vec<String>)> = lines.into_iter().map(|l| ("E1".to_string(), l)).collect();
            all.push(("E1".into(), probe.clone()));
            let v = Vocabulary::from_lines(&all);
            let x = v.encode(&probe, "E1");
            let (e, u, _) = v.dims();
            let uni = x.active.iter().filter(|&&i| i >= e && i < e + u).count();
            let bi = x.active.iter().filter(|&&i| i >= e + u).count();
            let distinct: BTreeSet<&String> = probe.iter().collect();
            let distinct_bi: BTreeSet<Bigram> = line_bigrams(&probe).into_iter().collect();
            prop_assert_eq!(uni, distinct.len());
            prop_assert_eq!(bi, distinct_bi.len());
            prop_assert_eq!(x.clone(), v.encode(&probe, "E1"));
        }
    }
}
