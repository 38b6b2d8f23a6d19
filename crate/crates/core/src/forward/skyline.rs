//! Envelope (skyline) storage and Cholesky factorization for symmetric
//! positive definite matrices.

use crate::error::{Error, Result};

/// Lower envelope of a symmetric matrix: row `i` stores columns
/// `first[i]..=i` contiguously.
#[derive(Clone, Debug)]
pub struct Skyline {
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl Skyline {
    /// `first[i]` is the leftmost structurally nonzero column in row `i`.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(first.len() + 1);
        offsets.push(0);
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "profile column beyond diagonal");
            offsets.push(offsets[i] + i - f + 1);
        }
        let len = *offsets.last().unwrap();
        Self {
            first,
            offsets,
            data: vec![0.0; len],
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored(&self) -> usize {
        self.data.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Add `value` at `(i, j)`; `j ≤ i` must lie inside the envelope.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(j >= self.first[i]);
        self.data[self.offsets[i] + j - self.first[i]] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if j < self.first[i] {
            0.0
        } else {
            self.data[self.offsets[i] + j - self.first[i]]
        }
    }

    /// In-place `A = L·Lᵀ`.
    pub fn factor(mut self) -> Result<CholeskyFactor> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let (head, tail) = self.data.split_at_mut(self.offsets[i]);
            let row_i = &mut tail[..i - fi + 1];
            for j in fi..i {
                let fj = self.first[j];
                let start = fi.max(fj);
                let row_j = &head[self.offsets[j]..self.offsets[j + 1]];
                let a = &row_i[start - fi..j - fi];
                let b = &row_j[start - fj..j - fj];
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let diag = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - dot) / diag;
            }
            let sq: f64 = row_i[..i - fi].iter().map(|x| x * x).sum();
            let pivot = row_i[i - fi] - sq;
            if !(pivot > 0.0) {
                return Err(Error::SingularSystem {
                    pivot: i,
                    value: pivot,
                });
            }
            row_i[i - fi] = pivot.sqrt();
        }
        Ok(CholeskyFactor { lower: self })
    }
}

#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    lower: Skyline,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let l = &self.lower;
        let n = l.dim();
        assert_eq!(x.len(), n);
        for i in 0..n {
            let fi = l.first[i];
            let row = l.row(i);
            let dot: f64 = row[..i - fi]
                .iter()
                .zip(&x[fi..i])
                .map(|(a, b)| a * b)
                .sum();
            x[i] = (x[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = l.first[i];
            let row = l.row(i);
            x[i] /= row[i - fi];
            let xi = x[i];
            for (xk, r) in x[fi..i].iter_mut().zip(&row[..i - fi]) {
                *xk -= r * xi;
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
