//! Ranking repair classes: hierarchy scores blended with prototype scores.

pub mod hierarchy;
pub mod prototypes;

pub use hierarchy::{Child, NodeModel, RankingTree, TreeNode};
pub use prototypes::{prototype_count, ClassPrototypes, PrototypeBank};

use crate::corpus::ClassCatalog;
use crate::features::FeatureVector;
use serde::{Deserialize, Serialize};

pub const TREE_WEIGHT: f64 = 0.8;
pub const PROTOTYPE_WEIGHT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedClass {
    pub class: usize,
    pub score: f64,
    pub tree: f64,
    pub prototype: f64,
}

/// Combined score: with reranking off the tree score is used alone.
pub fn blend(tree: f64, prototype: f64, rerank: bool) -> f64 {
    if rerank {
        TREE_WEIGHT * tree + PROTOTYPE_WEIGHT * prototype
    } else {
        tree
    }
}

/// All catalog classes by descending combined score; ties go to the more
/// frequent class, then the lower id.
pub fn rank(
    x: &FeatureVector,
    tree: &RankingTree,
    bank: &PrototypeBank,
    catalog: &ClassCatalog,
    rerank: bool,
) -> Vec<RankedClass> {
    let tree_scores = tree.scores(x);
    let mut out: Vec<RankedClass> = catalog
        .classes()
        .iter()
        .map(|c| {
            let t = tree_scores.get(c.id).copied().unwrap_or(0.0);
            let p = if rerank { bank.score(x, c.id) } else { 0.0 };
            RankedClass { class: c.id, score: blend(t, p, rerank), tree: t, prototype: p }
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| catalog.classes()[b.class].count.cmp(&catalog.classes()[a.class].count))
            .then_with(|| a.class.cmp(&b.class))
    });
    out
}

/// 1-based rank of `gold` in a ranking, if present.
pub fn rank_of(ranked: &[RankedClass], gold: usize) -> Option<usize> {
    ranked.iter().position(|r| r.class == gold).map(|p| p + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ClassKey, RepairClass, RepairKind};

    fn catalog(counts: &[usize]) -> ClassCatalog {
        ClassCatalog::from_classes(
            counts
                .iter()
                .enumerate()
                .map(|(id, &count)| RepairClass {
                    id,
                    key: ClassKey {
                        error_id: format!("E{id}"),
                        deletions: vec![],
                        insertions: vec![";".into()],
                        kind: RepairKind::Insert,
                    },
                    count,
                })
                .collect(),
        )
    }

    fn fixed_tree(probs: Vec<f64>) -> RankingTree {
        let n = probs.len();
        RankingTree {
            nodes: vec![TreeNode {
                label: "root".into(),
                children: (0..n).map(Child::Leaf).collect(),
                model: NodeModel::Fixed(probs),
            }],
            n_classes: n,
        }
    }

    #[test]
    fn blend_arithmetic() {
        assert!((blend(0.5, 1.0, true) - 0.6).abs() < 1e-12);
        assert_eq!(blend(0.5, 1.0, false), 0.5);
    }

    #[test]
    fn reranking_off_matches_tree_order() {
        let tree = fixed_tree(vec![0.2, 0.5, 0.3]);
        let x = FeatureVector::new(2, vec![0]);
        let bank = PrototypeBank { classes: vec![Some(ClassPrototypes::new(vec![vec![1.0, 0.0]])), None, None] };
        let order: Vec<usize> = rank(&x, &tree, &bank, &catalog(&[5, 5, 5]), false).iter().map(|r| r.class).collect();
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn prototype_corrects_tree_mistake() {
        // the tree prefers class 0, but x sits on a class 1 prototype
        let tree = fixed_tree(vec![0.55, 0.45]);
        let x = FeatureVector::new(6, vec![0, 1, 2]);
        let bank = PrototypeBank {
            classes: vec![
                Some(ClassPrototypes::new(vec![vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]])),
                Some(ClassPrototypes::new(vec![x.to_dense()])),
            ],
        };
        let cat = catalog(&[9, 3]);
        assert_eq!(rank(&x, &tree, &bank, &cat, false)[0].class, 0);
        let ranked = rank(&x, &tree, &bank, &cat, true);
        assert_eq!(ranked[0].class, 1);
        assert_eq!(ranked[0].prototype, 1.0);
    }

    #[test]
    fn ties_by_count_then_id() {
        let tree = fixed_tree(vec![0.25; 4]);
        let x = FeatureVector::new(1, vec![]);
        let order: Vec<usize> =
            rank(&x, &tree, &PrototypeBank::default(), &catalog(&[1, 7, 7, 3]), true).iter().map(|r| r.class).collect();
        assert_eq!(order, vec![1, 2, 3, 0]);
        let ranked = rank(&x, &tree, &PrototypeBank::default(), &catalog(&[1, 7, 7, 3]), true);
        assert_eq!(rank_of(&ranked, 3), Some(3));
    }
}
