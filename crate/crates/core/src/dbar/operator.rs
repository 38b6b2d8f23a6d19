//! Matrix-free D-bar operator `A v = h² · G ⊛ (T_z ⊙ v̄)` on a periodic grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::KGrid;
use crate::error::{Error, Result};
use crate::scattering::ScatteringField;

/// `G(k) = 1/(πk)` sampled at periodic lattice offsets, `G(0) = 0`.
pub fn kernel_value(grid: &KGrid, dr: isize, dc: isize) -> Complex64 {
    if dr == 0 && dc == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let h = grid.spacing();
    1.0 / (PI * Complex64::new(dc as f64 * h, dr as f64 * h))
}

/// Signed representative of a periodic offset, in `[-n/2, n/2)`.
pub fn wrap_offset(d: isize, n: usize) -> isize {
    let n = n as isize;
    (d + n / 2).rem_euclid(n) - n / 2
}

/// DFT of the sampled kernel with `h²` and the inverse-transform
/// normalization folded in. Stored transposed, matching [`SpectralKernel::forward`].
pub struct SpectralKernel {
    grid: KGrid,
    spectrum: Vec<Complex64>,
    reflected: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralKernel {
    pub fn new(grid: &KGrid) -> Self {
        let n = grid.size();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let sample = |sign: isize| {
            let mut values = vec![Complex64::new(0.0, 0.0); n * n];
            for r in 0..n {
                for c in 0..n {
                    let dr = wrap_offset(sign * wrap_offset(r as isize, n), n);
                    let dc = wrap_offset(sign * wrap_offset(c as isize, n), n);
                    values[r * n + c] = kernel_value(grid, dr, dc);
                }
            }
            values
        };
        let mut kernel = Self {
            grid: *grid,
            spectrum: Vec::new(),
            reflected: Vec::new(),
            forward,
            inverse,
        };
        let mut scratch = kernel.scratch();
        let scale = grid.spacing().powi(2) / (n * n) as f64;
        let mut transformed = |mut values: Vec<Complex64>| {
            kernel.forward(&mut values, &mut scratch);
            values.iter_mut().for_each(|v| *v *= scale);
            values
        };
        let spectrum = transformed(sample(1));
        let reflected = transformed(sample(-1));
        kernel.spectrum = spectrum;
        kernel.reflected = reflected;
        kernel
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len]
    }

    // rows, transpose, rows: leaves the spectrum transposed
    fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.grid.size();
        self.forward.process_with_scratch(data, scratch);
        transpose(data, n);
        self.forward.process_with_scratch(data, scratch);
    }

    fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.grid.size();
        self.inverse.process_with_scratch(data, scratch);
        transpose(data, n);
        self.inverse.process_with_scratch(data, scratch);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in r + 1..n {
            data.swap(r * n + c, c * n + r);
        }
    }
}

/// `T_z(k) = t(k) e^{-i(kz + k̄z̄)} / (4π k̄)`, zero at the origin.
pub fn weighted_field(field: &ScatteringField, z: Complex64) -> Vec<Complex64> {
    let grid = &field.grid;
    let origin = grid.origin_index();
    field
        .values
        .iter()
        .enumerate()
        .map(|(idx, &t)| {
            if idx == origin || t == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let k = grid.point_at(idx);
            let phase = Complex64::from_polar(1.0, -2.0 * (k * z).re);
            t * phase / (4.0 * PI * k.conj())
        })
        .collect()
}

/// The operator for one `z`, with worker-local buffers.
pub struct DbarOperator<'a> {
    kernel: &'a SpectralKernel,
    weights: Vec<Complex64>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'a> DbarOperator<'a> {
    pub fn new(kernel: &'a SpectralKernel, field: &ScatteringField, z: Complex64) -> Result<Self> {
        if field.grid != kernel.grid {
            return Err(Error::GridMismatch(format!(
                "field grid {:?} vs kernel grid {:?}",
                field.grid, kernel.grid
            )));
        }
        Ok(Self {
            kernel,
            weights: weighted_field(field, z),
            buffer: vec![Complex64::new(0.0, 0.0); field.grid.len()],
            scratch: kernel.scratch(),
        })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `out = A v`.
    pub fn apply(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        for ((b, w), x) in self.buffer.iter_mut().zip(&self.weights).zip(v) {
            *b = w * x.conj();
        }
        self.kernel.forward(&mut self.buffer, &mut self.scratch);
        for (b, s) in self.buffer.iter_mut().zip(&self.kernel.spectrum) {
            *b *= s;
        }
        self.kernel.inverse(&mut self.buffer, &mut self.scratch);
        out.copy_from_slice(&self.buffer);
    }

    /// Real-linear adjoint with respect to `Re Σ x ȳ`:
    /// `A* w = T_z ⊙ (Ǧ ⊛ w̄)` with `Ǧ(d) = G(-d)`.
    pub fn apply_adjoint(&mut self, w: &[Complex64], out: &mut [Complex64]) {
        for (b, x) in self.buffer.iter_mut().zip(w) {
            *b = x.conj();
        }
        self.kernel.forward(&mut self.buffer, &mut self.scratch);
        for (b, s) in self.buffer.iter_mut().zip(&self.kernel.reflected) {
            *b *= s;
        }
        self.kernel.inverse(&mut self.buffer, &mut self.scratch);
        for ((o, b), t) in out.iter_mut().zip(&self.buffer).zip(&self.weights) {
            *o = t * b;
        }
    }

    /// Power-iteration estimate of the operator 2-norm.
    pub fn norm_estimate(&mut self, iterations: usize) -> f64 {
        let len = self.weights.len();
        let mut v: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 5) as f64 * 0.1))
            .collect();
        let mut av = vec![Complex64::new(0.0, 0.0); len];
        let mut estimate = 0.0;
        for _ in 0..iterations {
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            self.apply(&v, &mut av);
            estimate = av.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            self.apply_adjoint(&av, &mut v);
        }
        estimate
    }
}

pub fn apply_dbar_operator(
    z: Complex64,
    field: &ScatteringField,
    kernel: &SpectralKernel,
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    if v.len() != field.grid.len() {
        return Err(Error::GridMismatch(format!(
            "vector of {} for grid of {}",
            v.len(),
            field.grid.len()
        )));
    }
    let mut op = DbarOperator::new(kernel, field, z)?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    op.apply(v, &mut out);
    Ok(out)
}
