//! Finite-element forward model on the unit disk: Neumann-to-Dirichlet
//! matrices under trigonometric current patterns, measurement noise, and
//! Dirichlet-to-Neumann assembly.

pub mod mesh;
pub mod skyline;

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub use mesh::Mesh;
use skyline::{CholeskyFactor, Skyline};

use crate::error::{invalid, Error, Result};
use crate::phantom::Conductivity;

pub const DEFAULT_PATTERNS: usize = 16;
pub const DEFAULT_MESH_LEVEL: u32 = 3;

/// Orthonormal trigonometric basis on the circle: `sin(nθ)/√π` for `n < 0`,
/// `cos(nθ)/√π` for `n > 0`, `1/√(2π)` for `n = 0`.
pub fn trig_pattern(n: i32, theta: f64) -> f64 {
    let nf = n as f64;
    match n.signum() {
        -1 => (nf * theta).sin() / PI.sqrt(),
        1 => (nf * theta).cos() / PI.sqrt(),
        _ => 1.0 / TAU.sqrt(),
    }
}

/// Pattern indices `-N, …, -1, 1, …, N`.
pub fn pattern_indices(patterns: usize) -> Vec<i32> {
    let n = patterns as i32;
    (-n..=n).filter(|&k| k != 0).collect()
}

/// Neumann-to-Dirichlet map in the trigonometric basis; entry `(m, n)` is
/// `⟨R φ_n, φ_m⟩`, ordered as [`pattern_indices`].
#[derive(Clone, Debug, PartialEq)]
pub struct NtdMatrix {
    pub patterns: usize,
    pub values: DMatrix<f64>,
}

/// Dirichlet-to-Neumann map, indices `-N, …, 0, …, N` with a zero middle row
/// and column.
#[derive(Clone, Debug, PartialEq)]
pub struct DtnMatrix {
    pub patterns: usize,
    pub values: DMatrix<f64>,
}

impl NtdMatrix {
    pub fn dim(&self) -> usize {
        2 * self.patterns
    }

    /// Trace of column `col` sampled at `samples` equispaced angles.
    pub fn synthesize_column(&self, col: usize, samples: usize) -> Vec<f64> {
        let idx = pattern_indices(self.patterns);
        (0..samples)
            .map(|s| {
                let theta = TAU * s as f64 / samples as f64;
                idx.iter()
                    .enumerate()
                    .map(|(m, &n)| self.values[(m, col)] * trig_pattern(n, theta))
                    .sum()
            })
            .collect()
    }
}

impl DtnMatrix {
    pub fn dim(&self) -> usize {
        2 * self.patterns + 1
    }

    /// Pattern index `n` of row/column `p`.
    pub fn index_of(&self, p: usize) -> i32 {
        p as i32 - self.patterns as i32
    }

    /// `measured − reference + homogeneous`: swaps the discretization of the
    /// unit-conductivity map for the exact one, cancelling the shared FEM
    /// error.
    pub fn reference_corrected(measured: &DtnMatrix, reference: &DtnMatrix) -> Result<DtnMatrix> {
        if measured.patterns != reference.patterns {
            return Err(invalid("DtN pattern counts differ"));
        }
        let exact = homogeneous_dtn(measured.patterns)?;
        Ok(DtnMatrix {
            patterns: measured.patterns,
            values: &measured.values - &reference.values + exact.values,
        })
    }
}

/// P1 stiffness system for one conductivity, factored once and reused for
/// every current pattern.
pub struct NeumannSolver<'m> {
    mesh: &'m Mesh,
    factor: CholeskyFactor,
}

impl<'m> NeumannSolver<'m> {
    pub fn new<C: Conductivity + Sync + ?Sized>(mesh: &'m Mesh, sigma: &C) -> Result<Self> {
        let nv = mesh.vertices.len();
        let nb = mesh.boundary_count();
        let b0 = mesh.boundary[0];
        let dtheta = TAU / nb as f64;

        let mut first: Vec<usize> = (0..nv).collect();
        for t in &mesh.triangles {
            for &a in t {
                for &b in t {
                    if b < first[a] {
                        first[a] = b;
                    }
                }
            }
        }
        for &b in &mesh.boundary {
            first[b] = first[b].min(b0);
        }
        let mut system = Skyline::with_profile(first);

        for (ti, t) in mesh.triangles.iter().enumerate() {
            let [cx, cy] = mesh.centroid(ti);
            let s = sigma.conductivity(cx, cy);
            if !(s > 0.0) {
                return Err(Error::NonPositiveConductivity {
                    value: s,
                    x: cx,
                    y: cy,
                });
            }
            let p = t.map(|i| mesh.vertices[i]);
            let area = mesh.triangle_area(ti);
            let bx: [f64; 3] = std::array::from_fn(|i| p[(i + 1) % 3][1] - p[(i + 2) % 3][1]);
            let by: [f64; 3] = std::array::from_fn(|i| p[(i + 2) % 3][0] - p[(i + 1) % 3][0]);
            for i in 0..3 {
                for j in 0..=i {
                    let k = s * (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area);
                    if i == j {
                        system.add(t[i], t[i], k);
                    } else {
                        system.add(t[i], t[j], k);
                    }
                }
            }
        }
        // rank-one term c·cᵀ with c the boundary mean functional
        for (a, &i) in mesh.boundary.iter().enumerate() {
            for &j in &mesh.boundary[..=a] {
                system.add(i, j, dtheta * dtheta);
            }
        }

        Ok(Self {
            mesh,
            factor: system.factor()?,
        })
    }

    /// Boundary trace of the zero-mean solution with current density `φ_n`.
    pub fn trace(&self, n: i32) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(invalid("pattern index 0 carries no net-zero current"));
        }
        let nb = self.mesh.boundary_count();
        let dtheta = TAU / nb as f64;
        let half = 0.5 * n as f64 * dtheta;
        let sinc2 = (half.sin() / half).powi(2);
        let mut rhs = vec![0.0; self.mesh.vertices.len()];
        for (j, &v) in self.mesh.boundary.iter().enumerate() {
            rhs[v] = trig_pattern(n, dtheta * j as f64) * dtheta * sinc2;
        }
        self.factor.solve_in_place(&mut rhs);
        let trace: Vec<f64> = self.mesh.boundary.iter().map(|&v| rhs[v]).collect();
        if trace.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                pivot: 0,
                value: f64::NAN,
            });
        }
        Ok(trace)
    }
}

pub fn solve_neumann<C: Conductivity + Sync + ?Sized>(
    mesh: &Mesh,
    sigma: &C,
    n: i32,
) -> Result<Vec<f64>> {
    NeumannSolver::new(mesh, sigma)?.trace(n)
}

/// Trapezoid projection of boundary values onto `φ_m`.
pub fn project_trace(trace: &[f64], m: i32) -> f64 {
    let dtheta = TAU / trace.len() as f64;
    trace
        .iter()
        .enumerate()
        .map(|(j, u)| u * trig_pattern(m, dtheta * j as f64))
        .sum::<f64>()
        * dtheta
}

pub fn compute_ntd<C: Conductivity + Sync + ?Sized>(
    mesh: &Mesh,
    sigma: &C,
    patterns: usize,
) -> Result<NtdMatrix> {
    if patterns == 0 {
        return Err(invalid("at least one current pattern is required"));
    }
    let solver = NeumannSolver::new(mesh, sigma)?;
    let idx = pattern_indices(patterns);
    let columns: Vec<Vec<f64>> = idx
        .par_iter()
        .map(|&n| {
            let trace = solver.trace(n)?;
            Ok(idx.iter().map(|&m| project_trace(&trace, m)).collect())
        })
        .collect::<Result<_>>()?;
    let dim = idx.len();
    Ok(NtdMatrix {
        patterns,
        values: DMatrix::from_fn(dim, dim, |m, n| columns[n][m]),
    })
}

const NOISE_SAMPLES: usize = 256;

/// Adds `δ·𝒩_n·‖R φ_n‖_∞` to the boundary voltage of every pattern, sampled
/// at `NOISE_SAMPLES` equispaced angles, and projects the noisy voltage back
/// onto the patterns. One standard Gaussian vector per pattern, drawn in
/// column order.
pub fn perturb_ntd(ntd: &NtdMatrix, delta: f64, seed: u64) -> Result<NtdMatrix> {
    if !(delta >= 0.0) {
        return Err(invalid(format!(
            "noise level must be non-negative, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(ntd.clone());
    }
    let idx = pattern_indices(ntd.patterns);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ntd.clone();
    for col in 0..ntd.dim() {
        let trace = ntd.synthesize_column(col, NOISE_SAMPLES);
        let scale = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let noise: Vec<f64> = (0..NOISE_SAMPLES)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                delta * scale * g
            })
            .collect();
        for (row, &m) in idx.iter().enumerate() {
            out.values[(row, col)] += project_trace(&noise, m);
        }
    }
    Ok(out)
}

pub const MAX_NTD_CONDITION: f64 = 1e12;

pub fn ntd_to_dtn(ntd: &NtdMatrix) -> Result<DtnMatrix> {
    let sv = ntd.values.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition < MAX_NTD_CONDITION) {
        return Err(Error::SingularNtd { condition });
    }
    let inv = ntd
        .values
        .clone()
        .try_inverse()
        .ok_or(Error::SingularNtd { condition })?;
    let n = ntd.patterns;
    let embed = |p: usize| if p < n { p } else { p + 1 };
    let mut values = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    for r in 0..2 * n {
        for c in 0..2 * n {
            values[(embed(r), embed(c))] = inv[(r, c)];
        }
    }
    Ok(DtnMatrix {
        patterns: n,
        values,
    })
}

pub fn homogeneous_dtn(patterns: usize) -> Result<DtnMatrix> {
    if patterns == 0 {
        return Err(invalid("at least one current pattern is required"));
    }
    let n = patterns as i32;
    let diag: Vec<f64> = (-n..=n).map(|k| k.abs() as f64).collect();
    Ok(DtnMatrix {
        patterns,
        values: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
    })
}

/// Noise-free DtN map of `σ ≡ 1` on the given mesh.
pub fn fem_reference_dtn(mesh: &Mesh, patterns: usize) -> Result<DtnMatrix> {
    let unit = |_: f64, _: f64| 1.0;
    ntd_to_dtn(&compute_ntd(mesh, &unit, patterns)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{Inclusion, Phantom, Shape, Style};
    use rand::Rng;
    use std::sync::OnceLock;

    fn mesh3() -> &'static Mesh {
        static MESH: OnceLock<Mesh> = OnceLock::new();
        MESH.get_or_init(|| Mesh::disk(3))
    }

    fn unit(_: f64, _: f64) -> f64 {
        1.0
    }

    fn blob(value: f64) -> Phantom {
        let mut p = Phantom::empty(Style::Kit4);
        p.inclusions = vec![
            Inclusion {
                shape: Shape::Circle {
                    center: [0.3, -0.2],
                    radius: 0.25,
                },
                value,
            },
            Inclusion {
                shape: Shape::Ellipse {
                    center: [-0.35, 0.3],
                    radii: [0.2, 0.1],
                    angle: 0.4,
                },
                value: value.sqrt(),
            },
        ];
        p
    }

    #[test]
    fn patterns_are_orthonormal() {
        let m = 200;
        let idx: Vec<i32> = (-4..=4).collect();
        for &a in &idx {
            let mean: f64 = (0..m)
                .map(|j| trig_pattern(a, TAU * j as f64 / m as f64))
                .sum::<f64>();
            if a != 0 {
                assert!(mean.abs() < 1e-12);
            }
            for &b in &idx {
                let ip: f64 = (0..m)
                    .map(|j| {
                        let t = TAU * j as f64 / m as f64;
                        trig_pattern(a, t) * trig_pattern(b, t)
                    })
                    .sum::<f64>()
                    * TAU
                    / m as f64;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_traces_match_separation_of_variables() {
        let solver = NeumannSolver::new(mesh3(), &unit).unwrap();
        for n in [1, -3] {
            let trace = solver.trace(n).unwrap();
            let dtheta = TAU / trace.len() as f64;
            let worst = trace
                .iter()
                .enumerate()
                .map(|(j, u)| (u - trig_pattern(n, dtheta * j as f64) / n.abs() as f64).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "n={n}: {worst}");
        }
    }

    #[test]
    fn traces_have_zero_mean() {
        let p = blob(2.0);
        let solver = NeumannSolver::new(mesh3(), &p).unwrap();
        for n in [1, -2, 7] {
            let sum: f64 = solver.trace(n).unwrap().iter().sum::<f64>() * TAU / 512.0;
            assert!(sum.abs() < 1e-10, "{sum}");
        }
        assert!(solver.trace(0).is_err());
    }

    #[test]
    fn unit_ntd_is_diagonal() {
        let r = compute_ntd(mesh3(), &unit, 16).unwrap();
        let idx = pattern_indices(16);
        for (m, &a) in idx.iter().enumerate() {
            for (n, &b) in idx.iter().enumerate() {
                let expect = if m == n { 1.0 / a.abs() as f64 } else { 0.0 };
                let scale = 1.0 / b.abs() as f64;
                assert!(
                    (r.values[(m, n)] - expect).abs() <= 1e-2 * scale,
                    "({a},{b})"
                );
            }
        }
        assert!(r
            .values
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .all(|&e| e > 0.0));
    }

    #[test]
    fn unit_ntd_spectrum() {
        let r = compute_ntd(mesh3(), &unit, 16).unwrap();
        let mut eig: Vec<f64> = r.values.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // each 1/k appears twice
        for (i, e) in eig.iter().enumerate() {
            let k = (i / 2 + 1) as f64;
            assert!((e * k - 1.0).abs() < 0.02, "eigenvalue {i}: {e}");
        }
    }

    #[test]
    fn ntd_is_symmetric() {
        let r = compute_ntd(mesh3(), &blob(2.3), 16).unwrap();
        let asym = (&r.values - r.values.transpose()).norm() / r.values.norm();
        assert!(asym < 1e-4, "{asym}");
    }

    #[test]
    fn ntd_decreases_with_conductivity() {
        let r1 = compute_ntd(mesh3(), &unit, 16).unwrap();
        let r = compute_ntd(mesh3(), &blob(2.0), 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = nalgebra::DVector::from_fn(32, |_, _| rng.random::<f64>() - 0.5);
            let a = (x.transpose() * &r.values * &x)[0];
            let b = (x.transpose() * &r1.values * &x)[0];
            assert!(a <= b);
        }
    }

    #[test]
    fn refinement_converges() {
        let p = blob(2.0);
        let rs: Vec<NtdMatrix> = (0..4)
            .map(|l| compute_ntd(&Mesh::disk(l), &p, 8).unwrap())
            .collect();
        let diffs: Vec<f64> = rs
            .windows(2)
            .map(|w| (&w[1].values - &w[0].values).norm())
            .collect();
        for w in diffs.windows(2) {
            assert!(w[1] < w[0], "{diffs:?}");
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let r = compute_ntd(&Mesh::disk(1), &blob(2.0), 4).unwrap();
        assert_eq!(perturb_ntd(&r, 0.0, 1).unwrap(), r);
        assert!(perturb_ntd(&r, -1e-3, 1).is_err());
    }

    #[test]
    fn noise_scales_with_column_norm() {
        let r = compute_ntd(mesh3(), &blob(1.7), 16).unwrap();
        let delta = 0.0075;
        for seed in 0..20 {
            let noisy = perturb_ntd(&r, delta, seed).unwrap();
            assert_eq!(noisy, perturb_ntd(&r, delta, seed).unwrap());
            for col in 0..r.dim() {
                let trace_norm = r
                    .synthesize_column(col, 256)
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                let change = (0..r.dim())
                    .map(|row| (noisy.values[(row, col)] - r.values[(row, col)]).abs())
                    .fold(0.0, f64::max);
                assert!(change / (delta * trace_norm) <= 5.0);
            }
        }
    }

    #[test]
    fn dtn_of_diagonal_ntd() {
        let n = 16;
        let idx = pattern_indices(n);
        let diag: Vec<f64> = idx.iter().map(|k| 1.0 / k.abs() as f64).collect();
        let ntd = NtdMatrix {
            patterns: n,
            values: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        };
        let l = ntd_to_dtn(&ntd).unwrap();
        assert_eq!(l.values.shape(), (33, 33));
        let exact = homogeneous_dtn(n).unwrap();
        assert!((&l.values - &exact.values).amax() < 1e-12);
        for p in 0..33 {
            assert_eq!(l.values[(16, p)], 0.0);
            assert_eq!(l.values[(p, 16)], 0.0);
        }
    }

    #[test]
    fn dtn_inverts_ntd() {
        let r = compute_ntd(&Mesh::disk(2), &blob(0.5), 16).unwrap();
        let l = ntd_to_dtn(&r).unwrap();
        let keep: Vec<usize> = (0..33).filter(|&p| p != 16).collect();
        let block = l.values.select_rows(&keep).select_columns(&keep);
        let prod = block * &r.values;
        assert!((prod - DMatrix::<f64>::identity(32, 32)).amax() < 1e-10);
    }

    #[test]
    fn singular_ntd_is_rejected() {
        let ntd = NtdMatrix {
            patterns: 2,
            values: DMatrix::from_element(4, 4, 1.0),
        };
        assert!(matches!(ntd_to_dtn(&ntd), Err(Error::SingularNtd { .. })));
    }

    #[test]
    fn homogeneous_small() {
        let l = homogeneous_dtn(2).unwrap();
        let d: Vec<f64> = l.values.diagonal().iter().copied().collect();
        assert_eq!(d, vec![2.0, 1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn fem_unit_dtn_matches_analytic() {
        let l = fem_reference_dtn(mesh3(), 16).unwrap();
        let exact = homogeneous_dtn(16).unwrap();
        for p in 0..33 {
            let scale = exact.values[(p, p)].max(1.0);
            for q in 0..33 {
                assert!((l.values[(p, q)] - exact.values[(p, q)]).abs() <= 1e-2 * scale);
            }
        }
    }
}
