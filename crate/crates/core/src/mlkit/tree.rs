//! CART classification tree grown on Gini impurity.

use super::Input;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        dist: Vec<f64>,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 20, min_leaf: 1 }
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Best {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

struct Grower<'a> {
    xs: &'a [Input],
    ys: &'a [usize],
    n_classes: usize,
    config: TreeConfig,
    sparse: bool,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.ys[i]] += 1;
        }
        c
    }

    fn weighted(&self, left: &[usize], nl: usize, total: &[usize], n: usize) -> f64 {
        let right: Vec<usize> = total.iter().zip(left).map(|(t, l)| t - l).collect();
        (nl as f64 * gini(left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64
    }

    /// Binary features: the only useful threshold is 0.5.
    fn best_sparse(&self, idx: &[usize], total: &[usize]) -> Option<Best> {
        let n = idx.len();
        let mut per_feature: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &i in idx {
            if let Input::Sparse { active, .. } = &self.xs[i] {
                for &f in active {
                    per_feature.entry(f).or_insert_with(|| vec![0; self.n_classes])[self.ys[i]] += 1;
                }
            }
        }
        let mut best: Option<Best> = None;
        for (f, ones) in per_feature {
            let n1: usize = ones.iter().sum();
            let n0 = n - n1;
            if n0 < self.config.min_leaf || n1 < self.config.min_leaf {
                continue;
            }
            let zeros: Vec<usize> = total.iter().zip(&ones).map(|(t, o)| t - o).collect();
            let imp = self.weighted(&zeros, n0, total, n);
            if best.as_ref().is_none_or(|b| imp < b.impurity) {
                best = Some(Best { feature: f, threshold: 0.5, impurity: imp });
            }
        }
        best
    }

    fn best_dense(&self, idx: &[usize], total: &[usize]) -> Option<Best> {
        let n = idx.len();
        let dim = self.xs[idx[0]].dim();
        let mut best: Option<Best> = None;
        for f in 0..dim {
            let mut vals: Vec<(f64, usize)> = idx.iter().map(|&i| (self.xs[i].value(f), self.ys[i])).collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0; self.n_classes];
            for k in 0..n - 1 {
                left[vals[k].1] += 1;
                if vals[k].0 == vals[k + 1].0 {
                    continue;
                }
                let nl = k + 1;
                if nl < self.config.min_leaf || n - nl < self.config.min_leaf {
                    continue;
                }
                let imp = self.weighted(&left, nl, total, n);
                if best.as_ref().is_none_or(|b| imp < b.impurity) {
                    let threshold = (vals[k].0 + vals[k + 1].0) / 2.0;
                    best = Some(Best { feature: f, threshold, impurity: imp });
                }
            }
        }
        best
    }

    fn leaf(&mut self, counts: &[usize], n: usize) -> usize {
        let dist = counts.iter().map(|&c| c as f64 / n as f64).collect();
        self.nodes.push(Node::Leaf { dist });
        self.nodes.len() - 1
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let n = idx.len();
        let impurity = gini(&counts, n);
        if depth >= self.config.max_depth || impurity <= 0.0 || n < 2 * self.config.min_leaf.max(1) {
            return self.leaf(&counts, n);
        }
        let best = if self.sparse { self.best_sparse(&idx, &counts) } else { self.best_dense(&idx, &counts) };
        let Some(best) = best.filter(|b| impurity - b.impurity > 1e-12) else {
            return self.leaf(&counts, n);
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.xs[i].value(best.feature) <= best.threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { dist: Vec::new() });
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        at
    }
}

impl DecisionTree {
    pub fn train(xs: &[Input], ys: &[usize], n_classes: usize, config: TreeConfig) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::EmptyData);
        }
        if let Some(&y) = ys.iter().find(|&&y| y >= n_classes) {
            return Err(Error::Invalid(format!("label {y} out of range for {n_classes} classes")));
        }
        let sparse = xs.iter().all(|x| matches!(x, Input::Sparse { .. }));
        let mut g = Grower { xs, ys, n_classes, config, sparse, nodes: Vec::new() };
        g.grow((0..xs.len()).collect(), 0);
        Ok(DecisionTree { nodes: g.nodes, n_classes })
    }

    fn leaf_of(&self, x: &Input) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { dist } => return dist,
                Node::Split { feature, threshold, left, right } => {
                    at = if x.value(*feature) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_proba(&self, x: &Input) -> Vec<f64> {
        self.leaf_of(x).to_vec()
    }

    pub fn predict(&self, x: &Input) -> usize {
        super::argmax(self.leaf_of(x))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("tree {} {}\n", self.n_classes, self.nodes.len());
        for node in &self.nodes {
            match node {
                Node::Leaf { dist } => {
                    out.push_str("leaf");
                    for p in dist {
                        out.push_str(&format!(" {p:e}"));
                    }
                    out.push('\n');
                }
                Node::Split { feature, threshold, left, right } => {
                    out.push_str(&format!("split {feature} {threshold:e} {left} {right}\n"));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Bundle(format!("tree: {m}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
        if header.len() != 3 || header[0] != "tree" {
            return Err(bad("bad header"));
        }
        let n_classes: usize = header[1].parse().map_err(|_| bad("class count"))?;
        let n_nodes: usize = header[2].parse().map_err(|_| bad("node count"))?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for line in lines.take(n_nodes) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let node = match parts.first() {
                Some(&"leaf") => Node::Leaf {
                    dist: parts[1..].iter().map(|v| v.parse().map_err(|_| bad("leaf value"))).collect::<Result<_>>()?,
                },
                Some(&"split") if parts.len() == 5 => Node::Split {
                    feature: parts[1].parse().map_err(|_| bad("feature"))?,
                    threshold: parts[2].parse().map_err(|_| bad("threshold"))?,
                    left: parts[3].parse().map_err(|_| bad("child"))?,
                    right: parts[4].parse().map_err(|_| bad("child"))?,
                },
                _ => return Err(bad("unknown node")),
            };
            nodes.push(node);
        }
        let children_ok = nodes.iter().all(|n| match n {
            Node::Split { left, right, .. } => *left < n_nodes && *right < n_nodes,
            Node::Leaf { dist } => dist.len() == n_classes,
        });
        if nodes.len() != n_nodes || n_nodes == 0 || !children_ok {
            return Err(bad("truncated or inconsistent"));
        }
        Ok(DecisionTree { nodes, n_classes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn acc(t: &DecisionTree, xs: &[Input], ys: &[usize]) -> f64 {
        xs.iter().zip(ys).filter(|(x, &y)| t.predict(x) == y).count() as f64 / xs.len() as f64
    }

    #[test]
    fn pure_labels_single_leaf() {
        let xs: Vec<Input> = (0..5).map(|i| Input::Dense(vec![i as f64])).collect();
        let t = DecisionTree::train(&xs, &[1; 5], 2, TreeConfig::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_proba(&xs[0]), vec![0.0, 1.0]);
    }

    #[test]
    fn one_perfect_binary_feature() {
        let xs = vec![
            Input::Sparse { dim: 3, active: vec![0, 2] },
            Input::Sparse { dim: 3, active: vec![2] },
            Input::Sparse { dim: 3, active: vec![0, 1] },
            Input::Sparse { dim: 3, active: vec![1] },
        ];
        let ys = [0, 0, 1, 1];
        let t = DecisionTree::train(&xs, &ys, 2, TreeConfig::default()).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(acc(&t, &xs, &ys), 1.0);
        assert!(matches!(t.nodes[0], Node::Split { feature: 1, .. }));
    }

    /// Best accuracy achievable by a single threshold on a single feature.
    fn best_stump(xs: &[Vec<f64>], ys: &[usize], n_classes: usize) -> f64 {
        let n = xs.len();
        let mut best = 0usize;
        for f in 0..xs[0].len() {
            let mut thresholds: Vec<f64> = xs.iter().map(|x| x[f]).collect();
            thresholds.push(f64::NEG_INFINITY);
            for &th in &thresholds {
                let mut side = vec![vec![0usize; n_classes]; 2];
                for (x, &y) in xs.iter().zip(ys) {
                    side[(x[f] > th) as usize][y] += 1;
                }
                let correct: usize = side.iter().map(|c| *c.iter().max().unwrap()).sum();
                best = best.max(correct);
            }
        }
        best as f64 / n as f64
    }

    #[test]
    fn beats_best_stump_on_random_sets() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.gen_range(0..5) as f64).collect()).collect();
            let ys: Vec<usize> = (0..20).map(|_| rng.gen_range(0..3)).collect();
            let xs: Vec<Input> = raw.iter().cloned().map(Input::Dense).collect();
            let t = DecisionTree::train(&xs, &ys, 3, TreeConfig::default()).unwrap();
            assert!(acc(&t, &xs, &ys) >= best_stump(&raw, &ys, 3), "seed {seed}");
        }
    }

    #[test]
    fn depth_limit_respected() {
        let xs: Vec<Input> = (0..16).map(|i| Input::Dense(vec![i as f64])).collect();
        let ys: Vec<usize> = (0..16).map(|i| i % 2).collect();
        let t = DecisionTree::train(&xs, &ys, 2, TreeConfig { max_depth: 2, min_leaf: 1 }).unwrap();
        assert!(t.depth() <= 2);
    }

    #[test]
    fn text_round_trip() {
        let xs: Vec<Input> = (0..8).map(|i| Input::Dense(vec![i as f64, (i % 3) as f64])).collect();
        let ys: Vec<usize> = (0..8).map(|i| (i / 3) % 2).collect();
        let t = DecisionTree::train(&xs, &ys, 2, TreeConfig::default()).unwrap();
        assert_eq!(DecisionTree::from_text(&t.to_text()).unwrap(), t);
        assert!(DecisionTree::from_text("tree 2 3\nleaf 1 0\n").is_err());
    }

    proptest! {
        #[test]
        fn training_point_gets_leaf_majority(
            data in prop::collection::vec((prop::collection::btree_set(0usize..6, 0..4), 0usize..3), 1..25),
            depth in 1usize..6,
        ) {
            let xs: Vec<Input> = data.iter().map(|(a, _)| Input::Sparse { dim: 6, active: a.iter().copied().collect() }).collect();
            let ys: Vec<usize> = data.iter().map(|d| d.1).collect();
            let t = DecisionTree::train(&xs, &ys, 3, TreeConfig { max_depth: depth, min_leaf: 1 }).unwrap();
            for x in &xs {
                let p = t.predict_proba(x);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                // recount the leaf's members directly
                let leaf = t.leaf_of(x) as *const [f64];
                let mut counts = [0usize; 3];
                for (z, &y) in xs.iter().zip(&ys) {
                    if std::ptr::eq(t.leaf_of(z), leaf) {
                        counts[y] += 1;
                    }
                }
                let majority = (0..3).fold(0, |b, c| if counts[c] > counts[b] { c } else { b });
                prop_assert_eq!(t.predict(x), majority);
            }
        }
    }
}
