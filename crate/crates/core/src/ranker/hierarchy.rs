//! Fixed label hierarchy: Replace vs Other, then errorID, then the deletion
//! tuple, then the insertion tuple. Leaf scores are chain products of the
//! conditional child probabilities along the root-to-leaf path.

use crate::corpus::{ClassCatalog, ClassKey, RepairKind};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::mlkit::{FeedForwardNet, Input, LinearClassifier, TrainConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Child {
    Node(usize),
    Leaf(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeModel {
    /// Single child: probability 1.
    Constant,
    /// Probabilities independent of the input.
    Fixed(Vec<f64>),
    Linear(LinearClassifier),
    Mlp(FeedForwardNet),
}

impl NodeModel {
    fn probabilities(&self, x: &Input, arity: usize) -> Vec<f64> {
        match self {
            NodeModel::Constant => vec![1.0 / arity as f64; arity],
            NodeModel::Fixed(p) => p.clone(),
            NodeModel::Linear(m) => m.predict_proba(x),
            NodeModel::Mlp(m) => m.predict_proba(x),
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            NodeModel::Constant => "constant",
            NodeModel::Fixed(_) => "fixed",
            NodeModel::Linear(_) => "linear",
            NodeModel::Mlp(_) => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// Grouping key of this node at its level, for inspection.
    pub label: String,
    pub children: Vec<Child>,
    pub model: NodeModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingTree {
    /// `nodes[0]` is the root.
    pub nodes: Vec<TreeNode>,
    pub n_classes: usize,
}

/// Path of grouping keys from the root to a class leaf.
pub fn class_path(key: &ClassKey) -> [String; 4] {
    let side = if key.kind == RepairKind::Replace { "Replace" } else { "Other" };
    [side.to_string(), key.error_id.clone(), key.deletions.join(" "), key.insertions.join(" ")]
}

#[derive(Default)]
struct Trie {
    children: BTreeMap<String, Trie>,
    leaf: Option<usize>,
}

impl RankingTree {
    /// Topology for the given classes; every node starts `Constant`.
    pub fn topology(catalog: &ClassCatalog, classes: &[usize]) -> Self {
        let mut trie = Trie::default();
        for &c in classes {
            let mut at = &mut trie;
            for k in class_path(&catalog.classes()[c].key) {
                at = at.children.entry(k).or_default();
            }
            at.leaf = Some(c);
        }
        let mut nodes = Vec::new();
        fn emit(t: &Trie, label: String, nodes: &mut Vec<TreeNode>) -> usize {
            let at = nodes.len();
            nodes.push(TreeNode { label, children: Vec::new(), model: NodeModel::Constant });
            let mut children = Vec::new();
            for (k, sub) in &t.children {
                match sub.leaf {
                    Some(c) => children.push(Child::Leaf(c)),
                    None => children.push(Child::Node(emit(sub, k.clone(), nodes))),
                }
            }
            nodes[at].children = children;
            at
        }
        emit(&trie, "root".into(), &mut nodes);
        RankingTree { nodes, n_classes: catalog.len() }
    }

    /// Classes under each child of every node.
    fn leaf_sets(&self) -> Vec<Vec<Vec<usize>>> {
        fn under(tree: &RankingTree, child: Child, out: &mut Vec<usize>) {
            match child {
                Child::Leaf(c) => out.push(c),
                Child::Node(n) => {
                    for &ch in &tree.nodes[n].children {
                        under(tree, ch, out);
                    }
                }
            }
        }
        self.nodes
            .iter()
            .map(|n| {
                n.children
                    .iter()
                    .map(|&ch| {
                        let mut v = Vec::new();
                        under(self, ch, &mut v);
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// Trains the hierarchy. Classes without training points are left out of
    /// the tree and always score 0.
    pub fn build(
        catalog: &ClassCatalog,
        xs: &[FeatureVector],
        ys: &[usize],
        linear: &TrainConfig,
        root: &TrainConfig,
    ) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::EmptyData);
        }
        if ys.iter().any(|&y| y >= catalog.len()) {
            return Err(Error::Invalid("training label outside the catalog".into()));
        }
        let mut seen = vec![false; catalog.len()];
        ys.iter().for_each(|&y| seen[y] = true);
        let present: Vec<usize> = (0..catalog.len()).filter(|&c| seen[c]).collect();
        let mut tree = Self::topology(catalog, &present);
        let sets = tree.leaf_sets();
        let inputs: Vec<Input> = xs.iter().map(Input::from).collect();

        let models: Vec<Result<NodeModel>> = (0..tree.nodes.len())
            .into_par_iter()
            .map(|n| {
                let children = &sets[n];
                if children.len() < 2 {
                    return Ok(NodeModel::Constant);
                }
                let mut owner = vec![usize::MAX; catalog.len()];
                for (i, set) in children.iter().enumerate() {
                    set.iter().for_each(|&c| owner[c] = i);
                }
                let (mut nx, mut ny) = (Vec::new(), Vec::new());
                for (x, &y) in inputs.iter().zip(ys) {
                    if owner[y] != usize::MAX {
                        nx.push(x.clone());
                        ny.push(owner[y]);
                    }
                }
                let config = if n == 0 { root } else { linear };
                Ok(if n == 0 {
                    NodeModel::Mlp(FeedForwardNet::train(&nx, &ny, children.len(), config)?.0)
                } else {
                    NodeModel::Linear(LinearClassifier::train(&nx, &ny, children.len(), config)?.0)
                })
            })
            .collect();
        for (node, model) in tree.nodes.iter_mut().zip(models) {
            node.model = model?;
        }
        Ok(tree)
    }

    /// Chain-rule leaf scores indexed by class id.
    pub fn scores(&self, x: &FeatureVector) -> Vec<f64> {
        let input = Input::from(x);
        let mut out = vec![0.0; self.n_classes];
        let mut stack = vec![(0usize, 1.0f64)];
        while let Some((n, mass)) = stack.pop() {
            let node = &self.nodes[n];
            let probs = node.model.probabilities(&input, node.children.len());
            for (&child, p) in node.children.iter().zip(probs) {
                match child {
                    Child::Leaf(c) => out[c] += mass * p,
                    Child::Node(m) => stack.push((m, mass * p)),
                }
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .nodes
            .iter()
            .flat_map(|n| n.children.iter())
            .filter_map(|c| match c {
                Child::Leaf(c) => Some(*c),
                Child::Node(_) => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let file = match &node.model {
                NodeModel::Linear(_) | NodeModel::Mlp(_) | NodeModel::Fixed(_) => {
                    let name = format!("node_{i}.txt");
                    let text = match &node.model {
                        NodeModel::Linear(m) => m.to_text(),
                        NodeModel::Mlp(m) => m.to_text(),
                        NodeModel::Fixed(p) => {
                            crate::mlkit::matrix::write_matrices(&[&crate::mlkit::Matrix::from_vec(
                                1,
                                p.len(),
                                p.clone(),
                            )])
                        }
                        NodeModel::Constant => unreachable!(),
                    };
                    let path = dir.join(&name);
                    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
                    Some(name)
                }
                NodeModel::Constant => None,
            };
            manifest.push(NodeEntry {
                label: node.label.clone(),
                children: node.children.clone(),
                model: node.model.tag().to_string(),
                file,
            });
        }
        let m = Manifest { n_classes: self.n_classes, nodes: manifest };
        let path = dir.join("tree.json");
        std::fs::write(&path, serde_json::to_string_pretty(&m)?).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("tree.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        let mut nodes = Vec::new();
        for entry in m.nodes {
            let read = || -> Result<String> {
                let name = entry
                    .file
                    .as_ref()
                    .ok_or_else(|| Error::Bundle(format!("node {} has no parameter file", entry.label)))?;
                let p = dir.join(name);
                std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
            };
            let model = match entry.model.as_str() {
                "constant" => NodeModel::Constant,
                "linear" => NodeModel::Linear(LinearClassifier::from_text(&read()?)?),
                "mlp" => NodeModel::Mlp(FeedForwardNet::from_text(&read()?)?),
                "fixed" => {
                    let ms = crate::mlkit::matrix::read_matrices(&read()?)?;
                    NodeModel::Fixed(ms.into_iter().next().map(|m| m.data).unwrap_or_default())
                }
                other => return Err(Error::Bundle(format!("unknown node model {other}"))),
            };
            nodes.push(TreeNode { label: entry.label, children: entry.children, model });
        }
        let n_nodes = nodes.len();
        let valid = n_nodes > 0
            && nodes.iter().all(|n| {
                n.children.iter().all(|c| match c {
                    Child::Node(i) => *i < n_nodes,
                    Child::Leaf(c) => *c < m.n_classes,
                })
            });
        if !valid {
            return Err(Error::Bundle("ranking tree references missing nodes".into()));
        }
        Ok(RankingTree { nodes, n_classes: m.n_classes })
    }
}

#[derive(Serialize, Deserialize)]
struct NodeEntry {
    label: String,
    children: Vec<Child>,
    model: String,
    file: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    n_classes: usize,
    nodes: Vec<NodeEntry>,
}
