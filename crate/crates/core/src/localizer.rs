//! Per-class one-vs-rest bigram classifiers predicting repair profiles.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::mlkit::tree::TreeConfig;
use crate::mlkit::{DecisionTree, Input};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// A training example: features and the mined profile as bigram ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizerExample {
    pub x: FeatureVector,
    pub profile: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassLocalizer {
    /// One binary tree per bigram that was edited at least once.
    Trees(BTreeMap<usize, DecisionTree>),
    /// Too little data: the most frequent training profile.
    Prior(BTreeSet<usize>),
}

/// Classes with fewer points fall back to their most frequent profile.
pub const MIN_POINTS: usize = 2;

fn most_frequent(examples: &[LocalizerExample]) -> BTreeSet<usize> {
    let mut counts: Vec<(&BTreeSet<usize>, usize)> = Vec::new();
    for e in examples {
        match counts.iter_mut().find(|(p, _)| *p == &e.profile) {
            Some(c) => c.1 += 1,
            None => counts.push((&e.profile, 1)),
        }
    }
    // first seen wins ties
    let mut best: Option<(&BTreeSet<usize>, usize)> = None;
    for (p, c) in counts {
        if best.is_none_or(|b| c > b.1) {
            best = Some((p, c));
        }
    }
    best.map(|b| b.0.clone()).unwrap_or_default()
}

impl ClassLocalizer {
    pub fn train(examples: &[LocalizerExample], config: TreeConfig) -> Result<Self> {
        if examples.len() < MIN_POINTS {
            return Ok(ClassLocalizer::Prior(most_frequent(examples)));
        }
        let labels: BTreeSet<usize> = examples.iter().flat_map(|e| e.profile.iter().copied()).collect();
        let xs: Vec<Input> = examples.iter().map(|e| Input::from(&e.x)).collect();
        let mut trees = BTreeMap::new();
        for b in labels {
            let ys: Vec<usize> = examples.iter().map(|e| usize::from(e.profile.contains(&b))).collect();
            trees.insert(b, DecisionTree::train(&xs, &ys, 2, config)?);
        }
        Ok(ClassLocalizer::Trees(trees))
    }

    /// Flagged bigrams among those present in the line.
    pub fn localize(&self, x: &FeatureVector, line_bigrams: &[usize]) -> BTreeSet<usize> {
        let input = Input::from(x);
        line_bigrams
            .iter()
            .copied()
            .filter(|b| match self {
                ClassLocalizer::Prior(p) => p.contains(b),
                ClassLocalizer::Trees(t) => t.get(b).is_some_and(|tree| tree.predict(&input) == 1),
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        match self {
            ClassLocalizer::Prior(p) => {
                let ids: Vec<String> = p.iter().map(|b| b.to_string()).collect();
                format!("prior {}\n", ids.join(" "))
            }
            ClassLocalizer::Trees(t) => {
                let mut out = format!("trees {}\n", t.len());
                for (b, tree) in t {
                    out.push_str(&format!("bigram {b}\n"));
                    out.push_str(&tree.to_text());
                }
                out
            }
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Bundle(format!("localizer: {m}"));
        let lines: Vec<&str> = text.lines().collect();
        let head: Vec<&str> = lines.first().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
        match head.first() {
            Some(&"prior") => Ok(ClassLocalizer::Prior(
                head[1..].iter().map(|v| v.parse().map_err(|_| bad("prior id"))).collect::<Result<_>>()?,
            )),
            Some(&"trees") => {
                let n: usize = head.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("tree count"))?;
                let mut at = 1;
                let mut trees = BTreeMap::new();
                for _ in 0..n {
                    let b: usize = lines
                        .get(at)
                        .and_then(|l| l.strip_prefix("bigram "))
                        .and_then(|v| v.trim().parse().ok())
                        .ok_or_else(|| bad("bigram line"))?;
                    let nodes: usize = lines
                        .get(at + 1)
                        .and_then(|l| l.split_whitespace().nth(2))
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| bad("tree header"))?;
                    let end = at + 2 + nodes;
                    if end > lines.len() {
                        return Err(bad("truncated tree"));
                    }
                    trees.insert(b, DecisionTree::from_text(&lines[at + 1..end].join("\n"))?);
                    at = end;
                }
                Ok(ClassLocalizer::Trees(trees))
            }
            _ => Err(bad("unknown header")),
        }
    }
}

/// Localizers for every class id, indexed densely.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalizerSet {
    pub classes: Vec<ClassLocalizer>,
}

impl LocalizerSet {
    /// `groups[c]` holds the training examples of class `c`.
    pub fn train(groups: &[Vec<LocalizerExample>], config: TreeConfig) -> Result<Self> {
        let classes = groups.par_iter().map(|g| ClassLocalizer::train(g, config)).collect::<Result<Vec<_>>>()?;
        Ok(LocalizerSet { classes })
    }

    pub fn localize(&self, class: usize, x: &FeatureVector, line_bigrams: &[usize]) -> BTreeSet<usize> {
        self.classes.get(class).map(|l| l.localize(x, line_bigrams)).unwrap_or_default()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (c, l) in self.classes.iter().enumerate() {
            let path = dir.join(format!("class_{c}.txt"));
            std::fs::write(&path, l.to_text()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path, n_classes: usize) -> Result<Self> {
        let classes = (0..n_classes)
            .map(|c| {
                let path = dir.join(format!("class_{c}.txt"));
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                ClassLocalizer::from_text(&text)
            })
            .collect::<Result<_>>()?;
        Ok(LocalizerSet { classes })
    }
}

/// Size of the symmetric difference of two profiles.
pub fn hamming_loss<T: Ord>(predicted: &BTreeSet<T>, gold: &BTreeSet<T>) -> usize {
    predicted.symmetric_difference(gold).count()
}
