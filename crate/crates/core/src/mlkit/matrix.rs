//! Dense row-major matrix and its plain-text serialization.

use crate::error::{Error, Result};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data does not match shape");
        Matrix { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Writes matrices as `matrix <rows> <cols>` headers followed by one line
/// per row, values in scientific notation with 9 significant digits.
pub fn write_matrices(ms: &[&Matrix]) -> String {
    let mut out = String::new();
    for m in ms {
        writeln!(out, "matrix {} {}", m.rows, m.cols).unwrap();
        for r in 0..m.rows {
            let row: Vec<String> = m.row(r).iter().map(|v| format!("{v:.8e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn read_matrices(text: &str) -> Result<Vec<Matrix>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut out = Vec::new();
    while let Some(header) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (rows, cols) = match parts.as_slice() {
            ["matrix", r, c] => (
                r.parse::<usize>().map_err(|e| Error::Bundle(e.to_string()))?,
                c.parse::<usize>().map_err(|e| Error::Bundle(e.to_string()))?,
            ),
            _ => return Err(Error::Bundle(format!("bad matrix header {header:?}"))),
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| Error::Bundle("truncated matrix".into()))?;
            for v in line.split_whitespace() {
                data.push(v.parse::<f64>().map_err(|e| Error::Bundle(e.to_string()))?);
            }
        }
        if data.len() != rows * cols {
            return Err(Error::Bundle(format!("matrix {rows}x{cols} has {} values", data.len())));
        }
        out.push(Matrix::from_vec(rows, cols, data));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_keeps_nine_digits() {
        let m = Matrix::from_vec(2, 3, vec![1.0, -2.5e-7, 1.234_567_891_234_5, 0.0, 1e10, -7.0]);
        let back = read_matrices(&write_matrices(&[&m, &m])).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in m.data.iter().zip(&back[0].data) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn empty_matrix() {
        let m = Matrix::zeros(0, 4);
        assert_eq!(read_matrices(&write_matrices(&[&m])).unwrap()[0], m);
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(read_matrices("matrix 2 2\n1 2\n").is_err());
        assert!(read_matrices("nonsense").is_err());
    }
}
