//! Regularized D-bar equation: matrix-free Richardson iteration, a dense
//! real-linear reference solver, and conductivity recovery `σ = m(z, 0)²`.

pub mod grid;
pub mod operator;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use grid::{build_kgrid, KGrid, DEFAULT_EXTENT_FACTOR, DEFAULT_LEVEL};
pub use operator::{apply_dbar_operator, kernel_value, wrap_offset, DbarOperator, SpectralKernel};

use crate::error::{invalid, Error, Result};
use crate::image::{ConductivityImage, Image};
use crate::scattering::ScatteringField;

pub const DEFAULT_ITERATIONS: usize = 5;
pub const MAX_DIRECT_LEVEL: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Richardson,
    Direct,
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "richardson" => Ok(Self::Richardson),
            "direct" => Ok(Self::Direct),
            other => Err(invalid(format!("unknown solver `{other}`"))),
        }
    }
}

fn ones(len: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0, 0.0); len]
}

fn check_finite(m: &[Complex64], iteration: usize) -> Result<()> {
    if m.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged { iteration })
    }
}

/// `m⁽ⁿ⁺¹⁾ = 1 + A m⁽ⁿ⁾` from `m⁽⁰⁾ = 1`, stopping after `iterations` steps.
pub fn richardson_with(op: &mut DbarOperator<'_>, iterations: usize) -> Result<Vec<Complex64>> {
    if iterations == 0 {
        return Err(invalid("Richardson needs at least one iteration"));
    }
    let len = op.weights().len();
    let mut m = ones(len);
    let mut am = vec![Complex64::new(0.0, 0.0); len];
    for it in 1..=iterations {
        op.apply(&m, &mut am);
        for (x, a) in m.iter_mut().zip(&am) {
            *x = 1.0 + a;
        }
        check_finite(&m, it)?;
    }
    Ok(m)
}

pub fn richardson_solve(
    z: Complex64,
    field: &ScatteringField,
    kernel: &SpectralKernel,
    iterations: usize,
) -> Result<Vec<Complex64>> {
    let mut op = DbarOperator::new(kernel, field, z)?;
    richardson_with(&mut op, iterations)
}

/// `‖m − 1 − A m‖₂`.
pub fn residual(op: &mut DbarOperator<'_>, m: &[Complex64]) -> f64 {
    let mut am = vec![Complex64::new(0.0, 0.0); m.len()];
    op.apply(m, &mut am);
    m.iter()
        .zip(&am)
        .map(|(x, a)| (x - 1.0 - a).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Dense real-linear solve of `m − A m̄ = 1`.
///
/// `A` only reads `m` where `T_z ≠ 0`, so the system is solved on that
/// support and `m` is then extended to the grid by one application of `A`.
pub fn direct_solve_oracle(z: Complex64, field: &ScatteringField) -> Result<Vec<Complex64>> {
    let grid = field.grid;
    if grid.level > MAX_DIRECT_LEVEL {
        return Err(Error::ResourceGuard(grid.level));
    }
    let n = grid.size();
    let weights = operator::weighted_field(field, z);
    let support: Vec<usize> = (0..weights.len())
        .filter(|&i| weights[i] != Complex64::new(0.0, 0.0))
        .collect();
    if support.is_empty() {
        return Ok(ones(grid.len()));
    }
    let h2 = grid.spacing().powi(2);
    let coupling = |a: usize, b: usize| {
        let dr = wrap_offset((a / n) as isize - (b / n) as isize, n);
        let dc = wrap_offset((a % n) as isize - (b % n) as isize, n);
        kernel_value(&grid, dr, dc) * weights[b] * h2
    };

    let s = support.len();
    // c·m̄ = (c_r m_r + c_i m_i) + i(c_i m_r − c_r m_i)
    let mut system = DMatrix::<f64>::identity(2 * s, 2 * s);
    for (p, &a) in support.iter().enumerate() {
        for (q, &b) in support.iter().enumerate() {
            let c = coupling(a, b);
            system[(2 * p, 2 * q)] -= c.re;
            system[(2 * p, 2 * q + 1)] -= c.im;
            system[(2 * p + 1, 2 * q)] -= c.im;
            system[(2 * p + 1, 2 * q + 1)] += c.re;
        }
    }
    let rhs = DVector::from_fn(2 * s, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    let solution = system.lu().solve(&rhs).ok_or(Error::SingularDbar)?;
    let on_support: Vec<Complex64> = (0..s)
        .map(|p| Complex64::new(solution[2 * p], solution[2 * p + 1]))
        .collect();

    let mut m = ones(grid.len());
    for (idx, out) in m.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, &b) in support.iter().enumerate() {
            acc += coupling(idx, b) * on_support[q].conj();
        }
        *out += acc;
    }
    check_finite(&m, 0)?;
    Ok(m)
}

/// `σ_R` and the diagnostic `|Im m(z,0)²|` on a pixel grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub conductivity: ConductivityImage,
    pub imaginary: Image,
}

/// `m(z, 0)²` at each `z`.
pub fn reconstruct_points(
    field: &ScatteringField,
    z_points: &[Complex64],
    iterations: usize,
    solver: Solver,
) -> Result<Vec<Complex64>> {
    let origin = field.grid.origin_index();
    match solver {
        Solver::Richardson => {
            let kernel = SpectralKernel::new(&field.grid);
            z_points
                .par_iter()
                .map(|&z| {
                    let m = richardson_solve(z, field, &kernel, iterations)?;
                    Ok(m[origin] * m[origin])
                })
                .collect()
        }
        Solver::Direct => {
            if field.grid.level > MAX_DIRECT_LEVEL {
                return Err(Error::ResourceGuard(field.grid.level));
            }
            z_points
                .par_iter()
                .map(|&z| {
                    let m = direct_solve_oracle(z, field)?;
                    Ok(m[origin] * m[origin])
                })
                .collect()
        }
    }
}

/// Reconstruction on a `width × width` pixel grid over `[-1, 1]²`; pixels
/// with `|z| ≥ 1` are set to 1.
pub fn reconstruct(
    field: &ScatteringField,
    width: usize,
    iterations: usize,
    solver: Solver,
) -> Result<Reconstruction> {
    if width == 0 {
        return Err(invalid("reconstruction width must be positive"));
    }
    let template = Image::constant(width, width, 1.0, 1.0);
    let mut inside = Vec::new();
    let mut z_points = Vec::new();
    for row in 0..width {
        for col in 0..width {
            let (x, y) = template.pixel_center(col, row);
            if x * x + y * y < 1.0 {
                inside.push(row * width + col);
                z_points.push(Complex64::new(x, y));
            }
        }
    }
    let squared = reconstruct_points(field, &z_points, iterations, solver)?;
    let mut sigma = vec![1.0; width * width];
    let mut imag = vec![0.0; width * width];
    for (&idx, v) in inside.iter().zip(&squared) {
        sigma[idx] = v.re;
        imag[idx] = v.im.abs();
    }
    Ok(Reconstruction {
        conductivity: Image::new(width, width, 1.0, sigma)?,
        imaginary: Image::new(width, width, 1.0, imag)?,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random field supported in `|k| ≤ R`, rescaled so that the operator at
    /// `z` has the requested norm.
    pub(crate) fn random_field(
        grid: KGrid,
        seed: u64,
        z: Complex64,
        norm: Option<f64>,
    ) -> ScatteringField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = ScatteringField::zeros(grid);
        for (idx, v) in field.values.iter_mut().enumerate() {
            if grid.point_at(idx).norm() <= grid.radius {
                *v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 20.0;
            }
        }
        match norm {
            None => field,
            Some(target) => {
                let kernel = SpectralKernel::new(&grid);
                let current = DbarOperator::new(&kernel, &field, z)
                    .unwrap()
                    .norm_estimate(200);
                field.scaled(target / current)
            }
        }
    }

    fn random_vector(len: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn zero_field_gives_ones() {
        let grid = build_kgrid(4.0, 2.1, 5).unwrap();
        let field = ScatteringField::zeros(grid);
        let kernel = SpectralKernel::new(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_vector(grid.len(), &mut rng);
        let av = apply_dbar_operator(Complex64::new(0.3, 0.1), &field, &kernel, &v).unwrap();
        assert!(av.iter().all(|x| *x == Complex64::new(0.0, 0.0)));
        let m = richardson_solve(Complex64::new(0.3, 0.1), &field, &kernel, 1).unwrap();
        assert!(m.iter().all(|x| *x == Complex64::new(1.0, 0.0)));
        let m = direct_solve_oracle(Complex64::new(0.3, 0.1), &field).unwrap();
        assert!(m.iter().all(|x| *x == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn operator_is_real_linear_only() {
        let grid = build_kgrid(3.0, 2.1, 5).unwrap();
        let z = Complex64::new(0.2, -0.4);
        let field = random_field(grid, 2, z, None);
        let kernel = SpectralKernel::new(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v1 = random_vector(grid.len(), &mut rng);
        let v2 = random_vector(grid.len(), &mut rng);
        let apply = |v: &[Complex64]| apply_dbar_operator(z, &field, &kernel, v).unwrap();
        let sum: Vec<Complex64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
        let lhs = apply(&sum);
        let rhs: Vec<Complex64> = apply(&v1)
            .iter()
            .zip(apply(&v2))
            .map(|(a, b)| a + b)
            .collect();
        assert!(rel_diff(&lhs, &rhs) < 1e-12);
        let scaled: Vec<Complex64> = v1.iter().map(|x| x * 2.5).collect();
        let expect: Vec<Complex64> = apply(&v1).iter().map(|x| x * 2.5).collect();
        assert!(rel_diff(&apply(&scaled), &expect) < 1e-12);
        let rotated: Vec<Complex64> = v1.iter().map(|x| x * Complex64::i()).collect();
        let naive: Vec<Complex64> = apply(&v1).iter().map(|x| x * Complex64::i()).collect();
        assert!(rel_diff(&apply(&rotated), &naive) > 0.1);
    }

    #[test]
    fn fft_operator_matches_dense_sum() {
        let grid = build_kgrid(2.0, 2.1, 4).unwrap();
        let kernel = SpectralKernel::new(&grid);
        let n = grid.size();
        let h2 = grid.spacing().powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let z = Complex64::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            ) * 0.7;
            let field = random_field(grid, 100 + trial, z, None);
            let v = random_vector(grid.len(), &mut rng);
            let fast = apply_dbar_operator(z, &field, &kernel, &v).unwrap();
            let weights = operator::weighted_field(&field, z);
            let mut dense = vec![Complex64::new(0.0, 0.0); grid.len()];
            for a in 0..grid.len() {
                for b in 0..grid.len() {
                    let dr = wrap_offset((a / n) as isize - (b / n) as isize, n);
                    let dc = wrap_offset((a % n) as isize - (b % n) as isize, n);
                    dense[a] += kernel_value(&grid, dr, dc) * weights[b] * v[b].conj() * h2;
                }
            }
            let scale = dense.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let err = fast
                .iter()
                .zip(&dense)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10 * scale.max(1.0), "trial {trial}: {err}");
        }
    }

    #[test]
    fn adjoint_is_consistent() {
        let grid = build_kgrid(2.0, 2.1, 4).unwrap();
        let z = Complex64::new(0.1, 0.5);
        let field = random_field(grid, 8, z, None);
        let kernel = SpectralKernel::new(&grid);
        let mut op = DbarOperator::new(&kernel, &field, z).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_vector(grid.len(), &mut rng);
        let w = random_vector(grid.len(), &mut rng);
        let mut av = vec![Complex64::new(0.0, 0.0); v.len()];
        let mut aw = vec![Complex64::new(0.0, 0.0); v.len()];
        op.apply(&v, &mut av);
        op.apply_adjoint(&w, &mut aw);
        let lhs: f64 = av.iter().zip(&w).map(|(a, b)| (a * b.conj()).re).sum();
        let rhs: f64 = v.iter().zip(&aw).map(|(a, b)| (a * b.conj()).re).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn direct_solution_has_small_residual() {
        let grid = build_kgrid(4.0, 2.1, 5).unwrap();
        let z = Complex64::new(-0.3, 0.2);
        let field = random_field(grid, 11, z, Some(0.8));
        let kernel = SpectralKernel::new(&grid);
        let m = direct_solve_oracle(z, &field).unwrap();
        let am = apply_dbar_operator(z, &field, &kernel, &m).unwrap();
        let worst = m
            .iter()
            .zip(&am)
            .map(|(x, a)| (x - 1.0 - a).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn richardson_agrees_with_direct() {
        let grid = build_kgrid(4.0, 2.1, 5).unwrap();
        let kernel = SpectralKernel::new(&grid);
        for (seed, z) in [
            (21, Complex64::new(0.1, 0.2)),
            (22, Complex64::new(-0.6, 0.3)),
        ] {
            let field = random_field(grid, seed, z, Some(0.25));
            let exact = direct_solve_oracle(z, &field).unwrap();
            let mut op = DbarOperator::new(&kernel, &field, z).unwrap();
            let mut previous = f64::INFINITY;
            for n in 1..=5 {
                let m = richardson_with(&mut op, n).unwrap();
                let r = residual(&mut op, &m);
                assert!(r < previous);
                previous = r;
            }
            let m = richardson_with(&mut op, 5).unwrap();
            assert!(rel_diff(&m, &exact) < 1e-3, "{}", rel_diff(&m, &exact));
        }
    }

    #[test]
    fn direct_solver_guard() {
        let grid = build_kgrid(4.0, 2.1, 7).unwrap();
        let field = ScatteringField::zeros(grid);
        assert!(matches!(
            direct_solve_oracle(Complex64::new(0.0, 0.0), &field),
            Err(Error::ResourceGuard(7))
        ));
        assert!(matches!(
            reconstruct(&field, 8, 5, Solver::Direct),
            Err(Error::ResourceGuard(7))
        ));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = build_kgrid(4.0, 2.1, 5).unwrap();
        let b = build_kgrid(5.0, 2.1, 5).unwrap();
        let kernel = SpectralKernel::new(&a);
        let field = ScatteringField::zeros(b);
        let v = ones(b.len());
        assert!(matches!(
            apply_dbar_operator(Complex64::new(0.0, 0.0), &field, &kernel, &v),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn zero_field_reconstructs_ones() {
        let grid = build_kgrid(4.0, 2.1, 6).unwrap();
        let rec = reconstruct(&ScatteringField::zeros(grid), 16, 5, Solver::Richardson).unwrap();
        assert!(rec.conductivity.values().iter().all(|&v| v == 1.0));
        assert!(rec.imaginary.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_is_reported() {
        let grid = build_kgrid(4.0, 2.1, 4).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let mut field = random_field(grid, 3, z, None);
        field.values[5 * 16 + 5] = Complex64::new(f64::NAN, 0.0);
        field.values[7 * 16 + 7] = Complex64::new(1.0, 0.0);
        let kernel = SpectralKernel::new(&grid);
        assert!(matches!(
            richardson_solve(z, &field, &kernel, 3),
            Err(Error::Diverged { iteration: 1 })
        ));
    }
}
