//! Multinomial logistic regression trained on cross-entropy.

use super::matrix::{read_matrices, write_matrices, Matrix};
use super::{shuffled, softmax_in_place, Input, Stepper, TrainConfig};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    /// features x classes
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub trained: bool,
}

impl LinearClassifier {
    pub fn zeros(features: usize, classes: usize) -> Self {
        LinearClassifier { weights: Matrix::zeros(features, classes), bias: vec![0.0; classes], trained: false }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    fn logits(&self, x: &Input) -> Vec<f64> {
        let mut z = self.bias.clone();
        x.for_each_nonzero(|i, v| {
            for (zj, w) in z.iter_mut().zip(self.weights.row(i)) {
                *zj += v * w;
            }
        });
        z
    }

    pub fn predict_proba(&self, x: &Input) -> Vec<f64> {
        let mut z = self.logits(x);
        softmax_in_place(&mut z);
        z
    }

    pub fn predict(&self, x: &Input) -> usize {
        super::argmax(&self.predict_proba(x))
    }

    /// Mean cross-entropy over a data set.
    pub fn loss(&self, xs: &[Input], ys: &[usize]) -> f64 {
        xs.iter().zip(ys).map(|(x, &y)| -self.predict_proba(x)[y].max(1e-300).ln()).sum::<f64>()
            / xs.len().max(1) as f64
    }

    /// Trains with mini-batches; returns the model and the mean training
    /// loss of every epoch.
    pub fn train(xs: &[Input], ys: &[usize], n_classes: usize, config: &TrainConfig) -> Result<(Self, Vec<f64>)> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::EmptyData);
        }
        let dim = xs[0].dim();
        let mut model = LinearClassifier::zeros(dim, n_classes);
        let n_w = dim * n_classes;
        let mut params: Vec<f64> = vec![0.0; n_w + n_classes];
        let mut stepper = Stepper::new(config.optimizer, config.learning_rate, params.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut history = Vec::with_capacity(config.epochs);
        let mut grads = vec![0.0; params.len()];
        for _ in 0..config.epochs {
            let order = shuffled(xs.len(), &mut rng);
            let mut total = 0.0;
            for batch in order.chunks(config.batch_size.max(1)) {
                grads.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / batch.len() as f64;
                for &k in batch {
                    let mut p = model.logits(&xs[k]);
                    softmax_in_place(&mut p);
                    total += -p[ys[k]].max(1e-300).ln();
                    p[ys[k]] -= 1.0;
                    xs[k].for_each_nonzero(|i, v| {
                        for (j, pj) in p.iter().enumerate() {
                            grads[i * n_classes + j] += scale * v * pj;
                        }
                    });
                    for (j, pj) in p.iter().enumerate() {
                        grads[n_w + j] += scale * pj;
                    }
                }
                if config.l2 > 0.0 {
                    for (g, w) in grads[..n_w].iter_mut().zip(&params[..n_w]) {
                        *g += config.l2 * w;
                    }
                }
                stepper.step(&mut params, &grads);
                model.weights.data.copy_from_slice(&params[..n_w]);
                model.bias.copy_from_slice(&params[n_w..]);
            }
            history.push(total / xs.len() as f64);
        }
        model.trained = true;
        Ok((model, history))
    }

    pub fn to_text(&self) -> String {
        let bias = Matrix::from_vec(1, self.bias.len(), self.bias.clone());
        write_matrices(&[&self.weights, &bias])
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut ms = read_matrices(text)?;
        if ms.len() != 2 || ms[1].rows != 1 || ms[1].cols != ms[0].cols {
            return Err(Error::Bundle("linear model needs weights and bias".into()));
        }
        let bias = ms.pop().unwrap().data;
        Ok(LinearClassifier { weights: ms.pop().unwrap(), bias, trained: true })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(rows: &[&[f64]]) -> Vec<Input> {
        rows.iter().map(|r| Input::Dense(r.to_vec())).collect()
    }

    fn accuracy(m: &LinearClassifier, xs: &[Input], ys: &[usize]) -> f64 {
        xs.iter().zip(ys).filter(|(x, &y)| m.predict(x) == y).count() as f64 / xs.len() as f64
    }

    #[test]
    fn separable_toy_set() {
        let xs = dense(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[3.0, 3.0], &[3.0, 4.0], &[4.0, 3.0]]);
        let ys = [0, 0, 0, 1, 1, 1];
        let (m, hist) = LinearClassifier::train(&xs, &ys, 2, &TrainConfig::default()).unwrap();
        assert_eq!(accuracy(&m, &xs, &ys), 1.0);
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss went up: {hist:?}");
        }
    }

    #[test]
    fn single_class_is_constant() {
        let xs = dense(&[&[1.0, 2.0], &[3.0, -1.0]]);
        let (m, _) = LinearClassifier::train(&xs, &[0, 0], 1, &TrainConfig::default()).unwrap();
        assert_eq!(m.predict_proba(&Input::Dense(vec![9.0, 9.0])), vec![1.0]);
    }

    #[test]
    fn l2_shrinks_weights() {
        let xs = dense(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[3.0, 3.0], &[3.0, 4.0], &[4.0, 3.0]]);
        let ys = [0, 0, 0, 1, 1, 1];
        let norm = |l2: f64| {
            let cfg = TrainConfig { l2, ..TrainConfig::default() };
            let (m, _) = LinearClassifier::train(&xs, &ys, 2, &cfg).unwrap();
            m.weights.data.iter().map(|w| w * w).sum::<f64>()
        };
        assert!(norm(0.5) < norm(0.0));
    }

    #[test]
    fn empty_data_rejected() {
        assert!(LinearClassifier::train(&[], &[], 2, &TrainConfig::default()).is_err());
    }

    /// Every labelling of the XOR points that some line can produce,
    /// enumerated by sweeping directions and offsets finely.
    fn best_linear_xor_accuracy() -> f64 {
        let pts = [(0.0, 0.0, 0), (1.0, 1.0, 0), (0.0, 1.0, 1), (1.0, 0.0, 1)];
        let mut best: f64 = 0.0;
        for a in 0..360 {
            let t = (a as f64).to_radians();
            let (c, s) = (t.cos(), t.sin());
            for b in -30..=30 {
                let off = b as f64 * 0.05;
                let correct = pts.iter().filter(|(x, y, l)| ((c * x + s * y + off > 0.0) as usize) == *l).count();
                best = best.max(correct as f64 / 4.0);
            }
        }
        best
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let xs = dense(&[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let ys = [0, 0, 1, 1];
        let (m, _) = LinearClassifier::train(&xs, &ys, 2, &TrainConfig::default()).unwrap();
        let oracle = best_linear_xor_accuracy();
        assert_eq!(oracle, 0.75);
        assert!(accuracy(&m, &xs, &ys) <= oracle);
    }

    #[test]
    fn sparse_matches_dense() {
        let xs = vec![Input::Sparse { dim: 3, active: vec![0, 2] }, Input::Sparse { dim: 3, active: vec![1] }];
        let (m, _) = LinearClassifier::train(&xs, &[0, 1], 2, &TrainConfig::default()).unwrap();
        for x in &xs {
            let d = Input::Dense(x.to_dense());
            assert_eq!(m.predict_proba(x), m.predict_proba(&d));
        }
    }

    #[test]
    fn deterministic_and_serializable() {
        let xs = dense(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let ys = [0, 1, 2];
        let (a, _) = LinearClassifier::train(&xs, &ys, 3, &TrainConfig::default()).unwrap();
        let (b, _) = LinearClassifier::train(&xs, &ys, 3, &TrainConfig::default()).unwrap();
        assert_eq!(a, b);
        let back = LinearClassifier::from_text(&a.to_text()).unwrap();
        for x in &xs {
            for (p, q) in a.predict_proba(x).iter().zip(back.predict_proba(x)) {
                assert!((p - q).abs() < 1e-7);
            }
        }
    }

    proptest! {
        #[test]
        fn probabilities_on_simplex(w in prop::collection::vec(-50.0f64..50.0, 6), b in prop::collection::vec(-50.0f64..50.0, 3), x in prop::collection::vec(-10.0f64..10.0, 2)) {
            let m = LinearClassifier { weights: Matrix::from_vec(2, 3, w), bias: b, trained: true };
            let p = m.predict_proba(&Input::Dense(x));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}
