//! Boundary integral equation for the traces of complex geometrical optics
//! solutions.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::faddeev::FaddeevTable;
use crate::error::{invalid, Error, Result};
use crate::forward::{trig_pattern, DtnMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CgoMode {
    Full,
    Born,
}

impl std::str::FromStr for CgoMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "born" => Ok(Self::Born),
            other => Err(invalid(format!("unknown CGO mode `{other}`"))),
        }
    }
}

/// `ψ(z_j, k)` at `z_j = e^{2πij/M}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CgoTrace {
    pub k: Complex64,
    pub values: Vec<Complex64>,
}

pub const BIE_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Smallest power of two with at least twice as many points as basis
/// functions.
pub fn default_boundary_points(patterns: usize) -> usize {
    (2 * (2 * patterns + 1)).next_power_of_two()
}

/// Per-DtN-pair data shared by every `k`: the point/coefficient transforms
/// and `ΔΛ = Λ_σ − Λ_1` in the trigonometric basis.
pub struct BoundaryOperator {
    points: usize,
    patterns: usize,
    /// `M × (2N+1)` synthesis, `P[j][p] = φ_{p-N}(θ_j)`
    synthesis: DMatrix<f64>,
    /// `ΔΛ · Pᵀ Δθ`
    difference: DMatrix<f64>,
    zero: bool,
}

impl BoundaryOperator {
    pub fn new(l_sigma: &DtnMatrix, l_one: &DtnMatrix, points: usize) -> Result<Self> {
        if l_sigma.patterns != l_one.patterns {
            return Err(invalid("DtN pattern counts differ"));
        }
        let patterns = l_sigma.patterns;
        let dim = 2 * patterns + 1;
        if !points.is_power_of_two() || points < 2 * dim {
            return Err(invalid(format!(
                "boundary points must be a power of two ≥ {}, got {points}",
                2 * dim
            )));
        }
        let dtheta = TAU / points as f64;
        let synthesis = DMatrix::from_fn(points, dim, |j, p| {
            trig_pattern(p as i32 - patterns as i32, dtheta * j as f64)
        });
        let delta = &l_sigma.values - &l_one.values;
        let zero = delta.iter().all(|&v| v == 0.0);
        let difference = &delta * synthesis.transpose() * dtheta;
        Ok(Self {
            points,
            patterns,
            synthesis,
            difference,
            zero,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn patterns(&self) -> usize {
        self.patterns
    }

    pub fn boundary_point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, TAU * j as f64 / self.points as f64)
    }

    fn plane_wave(&self, k: Complex64) -> Vec<Complex64> {
        (0..self.points)
            .map(|j| (Complex64::i() * k * self.boundary_point(j)).exp())
            .collect()
    }

    /// Solves `(I + S_k ΔΛ) ψ = e^{ikz}` on the boundary points.
    pub fn solve(&self, k: Complex64, mode: CgoMode) -> Result<CgoTrace> {
        if k.norm() < 1e-12 {
            return Err(invalid("CGO traces need k ≠ 0"));
        }
        let rhs = self.plane_wave(k);
        if mode == CgoMode::Born || self.zero {
            return Ok(CgoTrace { k, values: rhs });
        }

        let m = self.points;
        let dim = 2 * self.patterns + 1;
        let dtheta = TAU / m as f64;
        let table = FaddeevTable::global();

        // single layer applied to the synthesis columns:
        // U = P·diag(1/2|n|) + Δθ·H·P, H_ij = H_k(z_i - z_j)
        let zs: Vec<Complex64> = (0..m).map(|j| self.boundary_point(j)).collect();
        let diag = table.remainder(k, Complex64::new(0.0, 0.0));
        let mut kernel = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                kernel[(i, j)] = if i == j {
                    diag
                } else {
                    table.remainder(k, zs[i] - zs[j])
                };
            }
        }
        let mut single = kernel * &self.synthesis * dtheta;
        for p in 0..dim {
            let n = (p as i32 - self.patterns as i32).unsigned_abs();
            if n > 0 {
                let mult = 0.5 / n as f64;
                for j in 0..m {
                    single[(j, p)] += mult * self.synthesis[(j, p)];
                }
            }
        }

        // (I + V U) a = V rhs, ψ = rhs − U a, V = ΔΛ Pᵀ Δθ
        let reduced = DMatrix::<f64>::identity(dim, dim) + &self.difference * &single;
        let lu = reduced.lu();
        let rhs_re = nalgebra::DVector::from_iterator(m, rhs.iter().map(|c| c.re));
        let rhs_im = nalgebra::DVector::from_iterator(m, rhs.iter().map(|c| c.im));
        let solve = |v: &nalgebra::DVector<f64>| -> Result<nalgebra::DVector<f64>> {
            lu.solve(&(&self.difference * v))
                .ok_or(Error::IllConditionedBie {
                    k_abs: k.norm(),
                    residual: f64::INFINITY,
                })
        };
        let a_re = solve(&rhs_re)?;
        let a_im = solve(&rhs_im)?;
        let psi_re = &rhs_re - &single * &a_re;
        let psi_im = &rhs_im - &single * &a_im;

        // residual of the full M-point system
        let res_re = &psi_re + &single * (&self.difference * &psi_re) - &rhs_re;
        let res_im = &psi_im + &single * (&self.difference * &psi_im) - &rhs_im;
        let residual = (res_re.norm_squared() + res_im.norm_squared()).sqrt();
        let scale = (rhs_re.norm_squared() + rhs_im.norm_squared()).sqrt();
        if !(residual <= BIE_RESIDUAL_TOLERANCE * scale) {
            return Err(Error::IllConditionedBie {
                k_abs: k.norm(),
                residual: residual / scale,
            });
        }
        let values = psi_re
            .iter()
            .zip(psi_im.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Ok(CgoTrace { k, values })
    }

    /// `∮ e^{i k̄ z̄} (ΔΛ ψ)(z) ds` by the trapezoid rule.
    pub fn transform(&self, trace: &CgoTrace) -> Result<Complex64> {
        if trace.values.len() != self.points {
            return Err(invalid(
                "trace resolution does not match the boundary operator",
            ));
        }
        if self.zero {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let dtheta = TAU / self.points as f64;
        let kbar = trace.k.conj();
        let dim = self.synthesis.ncols();
        let coeffs: Vec<Complex64> = (0..dim)
            .map(|p| {
                trace
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, psi)| psi * self.difference[(p, j)])
                    .sum()
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..self.points {
            let applied: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(p, c)| c * self.synthesis[(i, p)])
                .sum();
            let weight = (Complex64::i() * kbar * self.boundary_point(i).conj()).exp();
            total += weight * applied;
        }
        Ok(total * dtheta)
    }
}

pub fn solve_cgo_trace(
    l_sigma: &DtnMatrix,
    l_one: &DtnMatrix,
    k: Complex64,
    points: usize,
    mode: CgoMode,
) -> Result<CgoTrace> {
    BoundaryOperator::new(l_sigma, l_one, points)?.solve(k, mode)
}
