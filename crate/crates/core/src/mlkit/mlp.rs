//! Feed-forward network with ReLU hidden layers and a softmax output.

use super::matrix::{read_matrices, write_matrices, Matrix};
use super::{shuffled, softmax_in_place, Input, Stepper, TrainConfig};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Weights are stored input-major (`w[i * out + j]`) so that a sparse input
/// touches contiguous rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardNet {
    pub sizes: Vec<usize>,
    /// Flat parameters: for each layer, weights then biases.
    pub params: Vec<f64>,
}

struct Forward {
    /// Activations per layer; `acts[0]` is unused for the input.
    acts: Vec<Vec<f64>>,
}

impl FeedForwardNet {
    /// He-initialized network with the given layer sizes.
    pub fn init(sizes: &[usize], seed: u64) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let scale = (2.0 / fan_in.max(1) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                // sum of uniforms approximates a normal draw
                let g: f64 = (0..4).map(|_| rng.gen::<f64>()).sum::<f64>() - 2.0;
                params.push(g * (3.0f64).sqrt() * scale / 2.0f64.sqrt());
            }
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        FeedForwardNet { sizes: sizes.to_vec(), params }
    }

    pub fn n_classes(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for l in 0..self.sizes.len() - 1 {
            let w = self.sizes[l] * self.sizes[l + 1];
            out.push((off, off + w));
            off += w + self.sizes[l + 1];
        }
        out
    }

    fn forward(&self, x: &Input) -> Forward {
        let offsets = self.layer_offsets();
        let n_layers = offsets.len();
        let mut acts = vec![Vec::new()];
        for (l, &(w_off, b_off)) in offsets.iter().enumerate() {
            let out = self.sizes[l + 1];
            let mut z = self.params[b_off..b_off + out].to_vec();
            let w = &self.params[w_off..b_off];
            if l == 0 {
                x.for_each_nonzero(|i, v| {
                    for (zj, wij) in z.iter_mut().zip(&w[i * out..(i + 1) * out]) {
                        *zj += v * wij;
                    }
                });
            } else {
                for (i, &a) in acts[l].iter().enumerate() {
                    if a != 0.0 {
                        for (zj, wij) in z.iter_mut().zip(&w[i * out..(i + 1) * out]) {
                            *zj += a * wij;
                        }
                    }
                }
            }
            if l + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            } else {
                softmax_in_place(&mut z);
            }
            acts.push(z);
        }
        Forward { acts }
    }

    pub fn predict_proba(&self, x: &Input) -> Vec<f64> {
        self.forward(x).acts.pop().unwrap()
    }

    pub fn predict(&self, x: &Input) -> usize {
        super::argmax(&self.predict_proba(x))
    }

    /// Adds `scale *` the cross-entropy gradient for one example to `grads`
    /// and returns the example's loss.
    fn accumulate(&self, x: &Input, y: usize, scale: f64, grads: &mut [f64]) -> f64 {
        let fwd = self.forward(x);
        let offsets = self.layer_offsets();
        let last = offsets.len();
        let mut delta = fwd.acts[last].clone();
        let loss = -delta[y].max(1e-300).ln();
        delta[y] -= 1.0;
        for l in (0..last).rev() {
            let (w_off, b_off) = offsets[l];
            let out = self.sizes[l + 1];
            for (j, d) in delta.iter().enumerate() {
                grads[b_off + j] += scale * d;
            }
            if l == 0 {
                x.for_each_nonzero(|i, v| {
                    for (j, d) in delta.iter().enumerate() {
                        grads[w_off + i * out + j] += scale * v * d;
                    }
                });
                break;
            }
            let prev = &fwd.acts[l];
            let mut next_delta = vec![0.0; prev.len()];
            for (i, &a) in prev.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row = w_off + i * out;
                let mut back = 0.0;
                for (j, d) in delta.iter().enumerate() {
                    grads[row + j] += scale * a * d;
                    back += self.params[row + j] * d;
                }
                // ReLU derivative: active units only
                next_delta[i] = back;
            }
            delta = next_delta;
        }
        loss
    }

    /// Mean loss and its gradient over a data set.
    pub fn loss_and_gradient(&self, xs: &[Input], ys: &[usize]) -> (f64, Vec<f64>) {
        let mut grads = vec![0.0; self.params.len()];
        let scale = 1.0 / xs.len().max(1) as f64;
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            loss += self.accumulate(x, y, scale, &mut grads);
        }
        (loss * scale, grads)
    }

    pub fn loss(&self, xs: &[Input], ys: &[usize]) -> f64 {
        xs.iter().zip(ys).map(|(x, &y)| -self.predict_proba(x)[y].max(1e-300).ln()).sum::<f64>()
            / xs.len().max(1) as f64
    }

    /// Trains a `[input, hidden.., classes]` network; returns the model and
    /// per-epoch mean training loss.
    pub fn train(xs: &[Input], ys: &[usize], n_classes: usize, config: &TrainConfig) -> Result<(Self, Vec<f64>)> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::EmptyData);
        }
        let mut sizes = vec![xs[0].dim()];
        sizes.extend(&config.hidden);
        sizes.push(n_classes);
        let mut net = FeedForwardNet::init(&sizes, config.seed);
        let mut stepper = Stepper::new(config.optimizer, config.learning_rate, net.params.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
        let mut history = Vec::with_capacity(config.epochs);
        let mut grads = vec![0.0; net.params.len()];
        for _ in 0..config.epochs {
            let order = shuffled(xs.len(), &mut rng);
            let mut total = 0.0;
            for batch in order.chunks(config.batch_size.max(1)) {
                grads.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / batch.len() as f64;
                for &k in batch {
                    total += net.accumulate(&xs[k], ys[k], scale, &mut grads);
                }
                let mut params = std::mem::take(&mut net.params);
                stepper.step(&mut params, &grads);
                net.params = params;
            }
            history.push(total / xs.len() as f64);
        }
        Ok((net, history))
    }

    pub fn to_text(&self) -> String {
        let mut ms = Vec::new();
        for (l, (w_off, b_off)) in self.layer_offsets().into_iter().enumerate() {
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            ms.push(Matrix::from_vec(i, o, self.params[w_off..b_off].to_vec()));
            ms.push(Matrix::from_vec(1, o, self.params[b_off..b_off + o].to_vec()));
        }
        write_matrices(&ms.iter().collect::<Vec<_>>())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let ms = read_matrices(text)?;
        if ms.is_empty() || ms.len() % 2 != 0 {
            return Err(Error::Bundle("network needs weight/bias matrix pairs".into()));
        }
        let mut sizes = vec![ms[0].rows];
        let mut params = Vec::new();
        for pair in ms.chunks(2) {
            let (w, b) = (&pair[0], &pair[1]);
            if w.rows != *sizes.last().unwrap() || b.rows != 1 || b.cols != w.cols {
                return Err(Error::Bundle("network layer shapes disagree".into()));
            }
            sizes.push(w.cols);
            params.extend(&w.data);
            params.extend(&b.data);
        }
        Ok(FeedForwardNet { sizes, params })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn xor() -> (Vec<Input>, Vec<usize>) {
        let xs = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]].iter().map(|r| Input::Dense(r.to_vec())).collect();
        (xs, vec![0, 0, 1, 1])
    }

    #[test]
    fn learns_xor() {
        let (xs, ys) = xor();
        let cfg = TrainConfig { epochs: 300, batch_size: 4, ..TrainConfig::default() };
        let (net, _) = FeedForwardNet::train(&xs, &ys, 2, &cfg).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(net.predict(x), y);
        }
    }

    #[test]
    fn zero_epochs_is_initialization() {
        let (xs, ys) = xor();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let (net, hist) = FeedForwardNet::train(&xs, &ys, 2, &cfg).unwrap();
        assert!(hist.is_empty());
        assert_eq!(net, FeedForwardNet::init(&[2, 128, 128, 2], cfg.seed));
    }

    /// Central finite differences on randomly chosen parameters.
    fn max_relative_error(net: &FeedForwardNet, xs: &[Input], ys: &[usize], seed: u64) -> f64 {
        let (_, grads) = net.loss_and_gradient(xs, ys);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let k = rng.gen_range(0..net.params.len());
            let mut plus = net.clone();
            plus.params[k] += h;
            let mut minus = net.clone();
            minus.params[k] -= h;
            let numeric = (plus.loss(xs, ys) - minus.loss(xs, ys)) / (2.0 * h);
            let denom = numeric.abs().max(grads[k].abs()).max(1e-8);
            worst = worst.max((numeric - grads[k]).abs() / denom);
        }
        worst
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<Input> = (0..6).map(|_| Input::Dense((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect();
        let ys = vec![0, 1, 2, 0, 1, 2];
        let net = FeedForwardNet::init(&[5, 7, 6, 3], 3);
        assert!(max_relative_error(&net, &xs, &ys, 11) < 1e-4);
    }

    #[test]
    fn sparse_gradient_matches_finite_differences() {
        let xs = vec![
            Input::Sparse { dim: 6, active: vec![0, 3] },
            Input::Sparse { dim: 6, active: vec![1, 2, 5] },
            Input::Sparse { dim: 6, active: vec![4] },
        ];
        let net = FeedForwardNet::init(&[6, 8, 8, 2], 5);
        assert!(max_relative_error(&net, &xs, &[0, 1, 1], 13) < 1e-4);
    }

    #[test]
    fn text_round_trip() {
        let net = FeedForwardNet::init(&[3, 4, 2], 1);
        let back = FeedForwardNet::from_text(&net.to_text()).unwrap();
        assert_eq!(back.sizes, net.sizes);
        let x = Input::Dense(vec![0.3, -1.0, 2.0]);
        for (a, b) in net.predict_proba(&x).iter().zip(back.predict_proba(&x)) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn outputs_on_simplex(seed in 0u64..1000, x in prop::collection::vec(-100.0f64..100.0, 4)) {
            let net = FeedForwardNet::init(&[4, 5, 3], seed);
            let p = net.predict_proba(&Input::Dense(x));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}
