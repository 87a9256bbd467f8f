//! Per-class k-means prototypes and the nearest-prototype score.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::mlkit::kmeans::kmeans;
use crate::mlkit::matrix::{read_matrices, write_matrices};
use crate::mlkit::Matrix;
use rayon::prelude::*;
use std::path::Path;

/// Points per prototype.
pub const POINTS_PER_PROTOTYPE: usize = 25;

pub fn prototype_count(n: usize) -> usize {
    n.div_ceil(POINTS_PER_PROTOTYPE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassPrototypes {
    pub centroids: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl ClassPrototypes {
    pub fn new(centroids: Vec<Vec<f64>>) -> Self {
        let norms = centroids.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
        ClassPrototypes { centroids, norms }
    }

    /// max over centroids of exp(-||x - c||^2 / 2)
    pub fn score(&self, x: &FeatureVector) -> f64 {
        let ones = x.active.len() as f64;
        self.centroids
            .iter()
            .zip(&self.norms)
            .map(|(c, norm)| {
                let dot: f64 = x.active.iter().map(|&i| c[i]).sum();
                let d2 = (norm - 2.0 * dot + ones).max(0.0);
                (-0.5 * d2).exp()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrototypeBank {
    /// Indexed by class id; `None` for classes without training points.
    pub classes: Vec<Option<ClassPrototypes>>,
}

impl PrototypeBank {
    pub fn build(n_classes: usize, xs: &[FeatureVector], ys: &[usize], seed: u64) -> Result<Self> {
        let mut groups: Vec<Vec<Vec<f64>>> = vec![Vec::new(); n_classes];
        for (x, &y) in xs.iter().zip(ys) {
            groups.get_mut(y).ok_or_else(|| Error::Invalid(format!("class {y} outside catalog")))?.push(x.to_dense());
        }
        let classes = groups
            .into_par_iter()
            .enumerate()
            .map(|(c, pts)| {
                if pts.is_empty() {
                    return Ok(None);
                }
                let k = prototype_count(pts.len());
                let r = kmeans(&pts, k, seed.wrapping_add(c as u64))?;
                Ok(Some(ClassPrototypes::new(r.centroids)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PrototypeBank { classes })
    }

    /// 0 for classes absent from the bank.
    pub fn score(&self, x: &FeatureVector, class: usize) -> f64 {
        match self.classes.get(class) {
            Some(Some(p)) => p.score(x),
            _ => 0.0,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut index = String::new();
        for (c, p) in self.classes.iter().enumerate() {
            let Some(p) = p else { continue };
            let dim = p.centroids[0].len();
            let m = Matrix::from_vec(p.centroids.len(), dim, p.centroids.concat());
            let path = dir.join(format!("class_{c}.txt"));
            std::fs::write(&path, write_matrices(&[&m])).map_err(|e| Error::io(&path, e))?;
            index.push_str(&format!("{c}\n"));
        }
        let path = dir.join("index.txt");
        std::fs::write(&path, format!("{}\n{index}", self.classes.len())).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("index.txt");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = text.lines();
        let n: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::Bundle("prototype index header".into()))?;
        let mut classes = vec![None; n];
        for l in lines.filter(|l| !l.trim().is_empty()) {
            let c: usize = l.trim().parse().map_err(|_| Error::Bundle(format!("prototype index line {l:?}")))?;
            let p = dir.join(format!("class_{c}.txt"));
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let m = read_matrices(&text)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::Bundle(format!("empty prototype file for class {c}")))?;
            let centroids = (0..m.rows).map(|r| m.row(r).to_vec()).collect();
            *classes.get_mut(c).ok_or_else(|| Error::Bundle(format!("prototype class {c} out of range")))? =
                Some(ClassPrototypes::new(centroids));
        }
        Ok(PrototypeBank { classes })
    }
}
