//! Lloyd's k-means with seeded farthest-point initialization.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult> {
    if points.is_empty() || k == 0 || k > points.len() {
        return Err(Error::Invalid(format!("k-means needs 1 <= k <= n, got k={k}, n={}", points.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..points.len());
    let mut chosen = vec![false; points.len()];
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| squared_distance(p, &points[first])).collect();
    while centroids.len() < k {
        let mut pick = None;
        for (i, &d) in dist.iter().enumerate() {
            if !chosen[i] && pick.is_none_or(|p: usize| d > dist[p]) {
                pick = Some(i);
            }
        }
        let i = pick.expect("k <= n leaves an unchosen point");
        chosen[i] = true;
        centroids.push(points[i].clone());
        for (j, p) in points.iter().enumerate() {
            dist[j] = dist[j].min(squared_distance(p, &points[i]));
        }
    }

    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut objective = Vec::new();
    for iter in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut total = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, &centroids);
            total += d;
            if assignments[i] != j {
                assignments[i] = j;
                changed = true;
            }
        }
        objective.push(total);
        if !changed || iter + 1 == MAX_ITERATIONS {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in points.iter().zip(&assignments) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    Ok(KMeansResult { centroids, assignments, objective })
}
