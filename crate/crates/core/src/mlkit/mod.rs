//! Learning primitives: softmax linear model, feed-forward net, decision
//! tree, k-means.

pub mod kmeans;
pub mod linear;
pub mod matrix;
pub mod mlp;
pub mod tree;

pub use kmeans::{kmeans, KMeansResult};
pub use linear::LinearClassifier;
pub use matrix::Matrix;
pub use mlp::FeedForwardNet;
pub use tree::DecisionTree;

use crate::features::FeatureVector;
use serde::{Deserialize, Serialize};

/// A model input: dense values or the set bits of a binary vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Dense(Vec<f64>),
    Sparse { dim: usize, active: Vec<usize> },
}

impl Input {
    pub fn dim(&self) -> usize {
        match self {
            Input::Dense(v) => v.len(),
            Input::Sparse { dim, .. } => *dim,
        }
    }

    /// Calls `f(index, value)` for every non-zero entry.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Input::Dense(v) => {
                for (i, &x) in v.iter().enumerate() {
                    if x != 0.0 {
                        f(i, x);
                    }
                }
            }
            Input::Sparse { active, .. } => {
                for &i in active {
                    f(i, 1.0);
                }
            }
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        match self {
            Input::Dense(v) => v[i],
            Input::Sparse { active, .. } => {
                if active.binary_search(&i).is_ok() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Input::Dense(v) => v.clone(),
            Input::Sparse { dim, active } => {
                let mut v = vec![0.0; *dim];
                for &i in active {
                    v[i] = 1.0;
                }
                v
            }
        }
    }
}

impl From<&FeatureVector> for Input {
    fn from(x: &FeatureVector) -> Self {
        Input::Sparse { dim: x.dim, active: x.active.clone() }
    }
}

impl From<Vec<f64>> for Input {
    fn from(v: Vec<f64>) -> Self {
        Input::Dense(v)
    }
}

pub fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub hidden: Vec<usize>,
    /// L2 penalty on the weights (not biases), added to the mean loss.
    #[serde(default)]
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 0.01,
            batch_size: 32,
            seed: 42,
            optimizer: Optimizer::Adam,
            hidden: vec![128, 128],
            l2: 0.0,
        }
    }
}

/// Parameter update rule shared by the gradient-trained models.
pub(crate) struct Stepper {
    kind: Optimizer,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Stepper {
    pub fn new(kind: Optimizer, lr: f64, n: usize) -> Self {
        let (m, v) = match kind {
            Optimizer::Adam => (vec![0.0; n], vec![0.0; n]),
            Optimizer::Sgd => (Vec::new(), Vec::new()),
        };
        Stepper { kind, lr, m, v, t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        match self.kind {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= self.lr * g;
                }
            }
            Optimizer::Adam => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                const EPS: f64 = 1e-8;
                self.t += 1;
                let c1 = 1.0 - B1.powi(self.t);
                let c2 = 1.0 - B2.powi(self.t);
                for i in 0..params.len() {
                    let g = grads[i];
                    self.m[i] = B1 * self.m[i] + (1.0 - B1) * g;
                    self.v[i] = B2 * self.v[i] + (1.0 - B2) * g * g;
                    params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + EPS);
                }
            }
        }
    }
}

/// Mini-batch index order for one epoch.
pub(crate) fn shuffled(n: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_is_simplex() {
        let mut z = vec![1000.0, -1000.0, 3.0];
        softmax_in_place(&mut z);
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(z.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let s = Input::Sparse { dim: 4, active: vec![1, 3] };
        assert_eq!(s.to_dense(), vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(s.value(3), 1.0);
        assert_eq!(s.value(0), 0.0);
    }
}
