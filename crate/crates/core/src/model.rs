//! The trained model bundle: vocabulary, class catalog, ranking tree,
//! prototypes and localizers, stored together as one directory.

use crate::corpus::{Bigram, ClassCatalog, MinedPair};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Vocabulary};
use crate::localizer::{LocalizerExample, LocalizerSet};
use crate::mlkit::tree::TreeConfig;
use crate::mlkit::TrainConfig;
use crate::ranker::{rank, PrototypeBank, RankedClass, RankingTree};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Nodes below the root.
    pub linear: TrainConfig,
    /// The Replace-vs-Other root network.
    pub root: TrainConfig,
    pub tree: TreeConfig,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            linear: TrainConfig { hidden: Vec::new(), l2: 3e-4, ..TrainConfig::default() },
            root: TrainConfig::default(),
            tree: TreeConfig::default(),
            seed: 42,
        }
    }
}

impl ModelConfig {
    /// Every component seeded from `seed`.
    pub fn with_seed(seed: u64) -> Self {
        let d = ModelConfig::default();
        ModelConfig { linear: TrainConfig { seed, ..d.linear }, root: TrainConfig { seed, ..d.root }, seed, ..d }
    }
}

#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub vocab: Vocabulary,
    pub catalog: ClassCatalog,
    pub tree: RankingTree,
    pub prototypes: PrototypeBank,
    pub localizers: LocalizerSet,
    pub config: ModelConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainTimes {
    pub tree: Duration,
    pub prototypes: Duration,
    pub localizers: Duration,
    pub total: Duration,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    classes: usize,
    dims: (usize, usize, usize),
    config: ModelConfig,
    files: Vec<(String, String)>,
}

impl ModelBundle {
    pub fn train(pairs: &[MinedPair], config: &ModelConfig) -> Result<(Self, TrainTimes)> {
        let start = Instant::now();
        let vocab = Vocabulary::build(pairs)?;
        let catalog = ClassCatalog::build(pairs.iter().map(|p| &p.key));
        let xs: Vec<FeatureVector> = pairs.iter().map(|p| vocab.encode(&p.source.tags(), &p.error_id)).collect();
        let ys: Vec<usize> =
            pairs.iter().map(|p| catalog.id_of(&p.key).expect("catalog built from these keys")).collect();

        let t = Instant::now();
        let tree = RankingTree::build(&catalog, &xs, &ys, &config.linear, &config.root)?;
        let tree_time = t.elapsed();

        let t = Instant::now();
        let prototypes = PrototypeBank::build(catalog.len(), &xs, &ys, config.seed)?;
        let proto_time = t.elapsed();

        let t = Instant::now();
        let mut groups: Vec<Vec<LocalizerExample>> = vec![Vec::new(); catalog.len()];
        for ((p, x), &y) in pairs.iter().zip(&xs).zip(&ys) {
            let profile = p.profile.iter().filter_map(|b| vocab.bigram_id(b)).collect();
            groups[y].push(LocalizerExample { x: x.clone(), profile });
        }
        let localizers = LocalizerSet::train(&groups, config.tree)?;
        let loc_time = t.elapsed();

        let bundle = ModelBundle { vocab, catalog, tree, prototypes, localizers, config: config.clone() };
        let times =
            TrainTimes { tree: tree_time, prototypes: proto_time, localizers: loc_time, total: start.elapsed() };
        Ok((bundle, times))
    }

    pub fn features<S: AsRef<str>>(&self, tags: &[S], error_id: &str) -> FeatureVector {
        self.vocab.encode(tags, error_id)
    }

    pub fn rank(&self, x: &FeatureVector, rerank: bool) -> Vec<RankedClass> {
        rank(x, &self.tree, &self.prototypes, &self.catalog, rerank)
    }

    /// Predicted repair profile of `class` for a line, as bigram types.
    pub fn localize<S: AsRef<str>>(&self, class: usize, x: &FeatureVector, tags: &[S]) -> BTreeSet<Bigram> {
        let present = self.vocab.line_bigram_ids(tags);
        self.localizers.localize(class, x, &present).into_iter().map(|b| self.vocab.bigrams()[b].clone()).collect()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.vocab.save(&dir.join("vocab"))?;
        let cat = dir.join("catalog.json");
        std::fs::write(&cat, serde_json::to_string_pretty(&self.catalog)?).map_err(|e| Error::io(&cat, e))?;
        self.tree.save(&dir.join("ranker"))?;
        self.prototypes.save(&dir.join("prototypes"))?;
        self.localizers.save(&dir.join("localizers"))?;
        let manifest = Manifest {
            version: FORMAT_VERSION,
            classes: self.catalog.len(),
            dims: self.vocab.dims(),
            config: self.config.clone(),
            files: [
                ("vocabulary", "vocab/"),
                ("catalog", "catalog.json"),
                ("ranking tree", "ranker/tree.json"),
                ("prototypes", "prototypes/"),
                ("localizers", "localizers/"),
            ]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.version != FORMAT_VERSION {
            return Err(Error::Bundle(format!("unsupported bundle version {}", manifest.version)));
        }
        let vocab = Vocabulary::load(&dir.join("vocab"))?;
        let cat = dir.join("catalog.json");
        let catalog: ClassCatalog =
            serde_json::from_str(&std::fs::read_to_string(&cat).map_err(|e| Error::io(&cat, e))?)?;
        let catalog = catalog.reindex();
        if catalog.len() != manifest.classes || vocab.dims() != manifest.dims {
            return Err(Error::Bundle("manifest disagrees with stored vocabulary or catalog".into()));
        }
        let tree = RankingTree::load(&dir.join("ranker"))?;
        let prototypes = PrototypeBank::load(&dir.join("prototypes"))?;
        let localizers = LocalizerSet::load(&dir.join("localizers"), catalog.len())?;
        Ok(ModelBundle { vocab, catalog, tree, prototypes, localizers, config: manifest.config })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{mine_corpus, TrainPair};

    fn pair(src: &str, tgt: &str, e: &str) -> TrainPair {
        TrainPair { id: None, source: src.into(), target: tgt.into(), error_id: e.into(), error_line: 1 }
    }

    pub(crate) fn tiny_corpus() -> Vec<MinedPair> {
        let mut pairs = Vec::new();
        for v in ["a", "b", "c", "d"] {
            pairs.push(pair(
                &format!("int {v};\n{v} = 1\nreturn 0;\n"),
                &format!("int {v};\n{v} = 1;\nreturn 0;\n"),
                "E1",
            ));
            pairs.push(pair(
                &format!("int {v};\nif ({v} = 1) {v} = 2;\n"),
                &format!("int {v};\nif ({v} == 1) {v} = 2;\n"),
                "E45",
            ));
        }
        mine_corpus(&pairs).pairs
    }

    fn quick() -> ModelConfig {
        let mut c = ModelConfig::default();
        c.root.hidden = vec![16, 16];
        c
    }

    #[test]
    fn trains_and_ranks_seen_classes() {
        let mined = tiny_corpus();
        let (b, _) = ModelBundle::train(&mined, &quick()).unwrap();
        assert_eq!(b.catalog.len(), 2);
        for p in &mined {
            let x = b.features(&p.source.tags(), &p.error_id);
            assert_eq!(b.rank(&x, true)[0].class, b.catalog.id_of(&p.key).unwrap());
            assert_eq!(b.localize(b.catalog.id_of(&p.key).unwrap(), &x, &p.source.tags()), p.profile);
        }
    }

    #[test]
    fn save_load_preserves_predictions() {
        let mined = tiny_corpus();
        let (b, _) = ModelBundle::train(&mined, &quick()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        b.save(dir.path()).unwrap();
        let back = ModelBundle::load(dir.path()).unwrap();
        assert_eq!(back.catalog, b.catalog);
        for p in &mined {
            let x = b.features(&p.source.tags(), &p.error_id);
            let (r1, r2) = (b.rank(&x, true), back.rank(&x, true));
            for (a, c) in r1.iter().zip(&r2) {
                assert_eq!(a.class, c.class);
                assert!((a.score - c.score).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn missing_bundle_is_io_error() {
        assert!(matches!(ModelBundle::load(Path::new("/nonexistent/bundle")), Err(Error::Io { .. })));
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(ModelBundle::train(&[], &quick()), Err(Error::EmptyCorpus)));
    }
}
