//! Faddeev Green's function `g_k` for `-Δ - 4ik∂̄` and its exponentially
//! modified companion `G_k(z) = e^{ikz} g_k(z)`.
//!
//! With `ζ = -iw`:
//! `G₁(w) = Re E₁(ζ) / 2π` (real valued), `g₁(w) = e^{-iw} G₁(w)`, and
//! `g_k(z) = g₁(kz)`. The remainder `H_k(w) = G_k(w) + log|w| / 2π` is smooth.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::expint::{scaled_exp1, EULER_GAMMA};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest admissible `|w|`.
pub const SINGULAR_RADIUS: f64 = 1e-9;

/// Exact `g₁(w)`.
pub fn faddeev_g1(w: Complex64) -> Result<Complex64> {
    if w.norm() <= SINGULAR_RADIUS {
        return Err(Error::SingularKernel(w.norm()));
    }
    Ok(g1_from_scaled(w, scaled_exp1(-I * w)))
}

// g₁ = [f(ζ) + e^{-2i Re w} conj f(ζ)] / 4π with f(ζ) = e^ζ E₁(ζ)
fn g1_from_scaled(w: Complex64, f: Complex64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -2.0 * w.re);
    (f + phase * f.conj()) / (2.0 * TAU)
}

fn big_g1_from_scaled(w: Complex64, f: Complex64) -> f64 {
    // e^{-ζ} f(ζ) = E₁(ζ), ζ = -iw
    ((I * w).exp() * f).re / TAU
}

/// Exact `G₁(w)`.
pub fn faddeev_big_g1(w: Complex64) -> Result<f64> {
    if w.norm() <= SINGULAR_RADIUS {
        return Err(Error::SingularKernel(w.norm()));
    }
    Ok(big_g1_from_scaled(w, scaled_exp1(-I * w)))
}

/// Polar lookup table of `f(ζ) = e^ζ E₁(ζ)` in `(log|ζ|, arg ζ)` with
/// bicubic Lagrange interpolation. The angular axis is not wrapped: the
/// branch cut of `E₁` sits on the table edge `arg ζ = ±π`.
pub struct FaddeevTable {
    log_min: f64,
    log_step: f64,
    rows: usize,
    angle_step: f64,
    cols: usize,
    data: Vec<Complex64>,
}

impl FaddeevTable {
    pub const MIN_RADIUS: f64 = 1e-3;
    pub const MAX_RADIUS: f64 = 30.0;

    pub fn build(log_step: f64, angle_step: f64) -> Self {
        let log_min = Self::MIN_RADIUS.ln() - 2.0 * log_step;
        let span = Self::MAX_RADIUS.ln() + 2.0 * log_step - log_min;
        let rows = (span / log_step).ceil() as usize + 1;
        let cols = (TAU / angle_step).ceil() as usize + 1;
        let angle_step = TAU / (cols - 1) as f64;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let rho = (log_min + r as f64 * log_step).exp();
            for c in 0..cols {
                let theta = -PI + c as f64 * angle_step;
                // pin the edges to the same side of the cut as the lookup
                let theta = theta.clamp(-PI + 1e-15, PI);
                data.push(scaled_exp1(Complex64::from_polar(rho, theta)));
            }
        }
        Self {
            log_min,
            log_step,
            rows,
            angle_step,
            cols,
            data,
        }
    }

    /// Table shared by the whole process, built on first use.
    pub fn global() -> &'static Self {
        static TABLE: OnceLock<FaddeevTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::build(0.02, 0.02))
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Interpolated `e^ζ E₁(ζ)`; exact evaluation outside the tabulated annulus.
    pub fn scaled_exp1(&self, zeta: Complex64) -> Complex64 {
        let r = zeta.norm();
        if !(Self::MIN_RADIUS..=Self::MAX_RADIUS).contains(&r) {
            return scaled_exp1(zeta);
        }
        let (ir, wr) = stencil((r.ln() - self.log_min) / self.log_step, self.rows);
        let (ic, wc) = stencil((zeta.arg() + PI) / self.angle_step, self.cols);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in wr.iter().enumerate() {
            let row = &self.data[(ir + a) * self.cols + ic..][..4];
            let inner = row[0] * wc[0] + row[1] * wc[1] + row[2] * wc[2] + row[3] * wc[3];
            acc += inner * *wa;
        }
        acc
    }

    pub fn g1(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() <= SINGULAR_RADIUS {
            return Err(Error::SingularKernel(w.norm()));
        }
        Ok(g1_from_scaled(w, self.scaled_exp1(-I * w)))
    }

    /// `G_k(w) = G₁(kw)`.
    pub fn big_g(&self, k: Complex64, w: Complex64) -> f64 {
        let kw = k * w;
        big_g1_from_scaled(kw, self.scaled_exp1(-I * kw))
    }

    /// `H_k(w) = G_k(w) + log|w| / 2π`; at `w = 0` the mean over eight
    /// directions at radius `1e-4`.
    pub fn remainder(&self, k: Complex64, w: Complex64) -> f64 {
        if w.norm() < SINGULAR_RADIUS {
            let probe = 1e-4;
            return (0..8)
                .map(|d| {
                    let w = Complex64::from_polar(probe, TAU * d as f64 / 8.0);
                    self.big_g(k, w) + probe.ln() / TAU
                })
                .sum::<f64>()
                / 8.0;
        }
        self.big_g(k, w) + w.norm().ln() / TAU
    }
}

/// Analytic limit `H_k(0) = -(γ + log|k|) / 2π`.
pub fn remainder_at_origin(k: Complex64) -> f64 {
    -(EULER_GAMMA + k.norm().ln()) / TAU
}

// leftmost node and Lagrange weights of a 4-point stencil around `x`
fn stencil(x: f64, nodes: usize) -> (usize, [f64; 4]) {
    let start = (x.floor() as isize - 1).clamp(0, nodes as isize - 4) as usize;
    let t = x - start as f64;
    let w = [
        -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        -t * (t - 1.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    ];
    (start, w)
}
