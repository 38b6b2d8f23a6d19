use num_complex::Complex64;
use rayon::prelude::*;

use super::cgo::{BoundaryOperator, CgoMode, CgoTrace};
use super::kpoints::KPointSet;
use crate::error::Result;
use crate::forward::DtnMatrix;
use crate::phantom::PotentialImage;

/// Scattering values on a k-point set, in lattice order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringValues {
    pub kpoints: KPointSet,
    pub values: Vec<Complex64>,
}

/// `t(k) = ∮ e^{i k̄ z̄} (Λ_σ − Λ_1) ψ(·, k) ds` from a solved trace.
pub fn t_exp(l_sigma: &DtnMatrix, l_one: &DtnMatrix, trace: &CgoTrace) -> Result<Complex64> {
    BoundaryOperator::new(l_sigma, l_one, trace.values.len())?.transform(trace)
}

/// Boundary-data transform at every k-point, one CGO solve per point.
pub fn scattering_from_dtn(
    l_sigma: &DtnMatrix,
    l_one: &DtnMatrix,
    kpoints: &KPointSet,
    boundary_points: usize,
    mode: CgoMode,
) -> Result<ScatteringValues> {
    let op = BoundaryOperator::new(l_sigma, l_one, boundary_points)?;
    let values = (0..kpoints.len())
        .into_par_iter()
        .map(|i| {
            let trace = op.solve(kpoints.point(i), mode)?;
            op.transform(&trace)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScatteringValues {
        kpoints: kpoints.clone(),
        values,
    })
}

// cos/sin of ±a computed from |a| so negated arguments conjugate exactly
fn cis(a: f64) -> Complex64 {
    let (s, c) = a.abs().sin_cos();
    Complex64::new(c, s.copysign(a))
}

/// Precomputed support of `q` for repeated Riemann sums.
pub struct PotentialSum<'q> {
    q: &'q PotentialImage,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
}

impl<'q> PotentialSum<'q> {
    pub fn new(q: &'q PotentialImage) -> Self {
        let n = q.nodes;
        let mut lo = n;
        let mut hi = 0;
        let mut clo = n;
        let mut chi = 0;
        for r in 0..n {
            for c in 0..n {
                if q.get(c, r) != 0.0 {
                    lo = lo.min(r);
                    hi = hi.max(r + 1);
                    clo = clo.min(c);
                    chi = chi.max(c + 1);
                }
            }
        }
        if lo >= hi {
            lo = 0;
            hi = 0;
            clo = 0;
            chi = 0;
        }
        Self {
            q,
            rows: lo..hi,
            cols: clo..chi,
        }
    }

    /// `Σ q(z) e^{i(k̄z̄ + kz)} h²`; the phase `2(k_x x − k_y y)` splits into
    /// a column and a row factor.
    pub fn evaluate(&self, k: Complex64) -> Complex64 {
        let h = self.q.spacing();
        let n = self.q.nodes;
        let col_phase: Vec<Complex64> = self
            .cols
            .clone()
            .map(|c| cis(2.0 * k.re * self.q.coordinate(c)))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for r in self.rows.clone() {
            let row = &self.q.values[r * n + self.cols.start..r * n + self.cols.end];
            let mut acc = Complex64::new(0.0, 0.0);
            for (v, ph) in row.iter().zip(&col_phase) {
                acc += ph * *v;
            }
            total += acc * cis(-2.0 * k.im * self.q.coordinate(r));
        }
        total * (h * h)
    }
}

pub fn t_asymptotic(q: &PotentialImage, k: Complex64) -> Complex64 {
    PotentialSum::new(q).evaluate(k)
}

pub fn scattering_from_potential(q: &PotentialImage, kpoints: &KPointSet) -> ScatteringValues {
    let sum = PotentialSum::new(q);
    let values = (0..kpoints.len())
        .into_par_iter()
        .map(|i| sum.evaluate(kpoints.point(i)))
        .collect();
    ScatteringValues {
        kpoints: kpoints.clone(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{generate_kit4, potential_q, Kit4Config, DEFAULT_SMOOTHING};
    use crate::scattering::kpoints::{kpoints, Region};
    use std::f64::consts::PI;

    #[test]
    fn zero_potential() {
        let q = PotentialImage::from_potential(269, 2.1, |_, _| 0.0);
        let set = kpoints(Region::Disk { radius: 2.0 }, 0.2).unwrap();
        let t = scattering_from_potential(&q, &set);
        assert!(t.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn exact_conjugate_symmetry() {
        let p = generate_kit4(12, &Kit4Config::default()).unwrap();
        let q = potential_q(&p, DEFAULT_SMOOTHING).unwrap();
        let set = kpoints(
            Region::Annulus {
                inner: 2.0,
                outer: 5.0,
            },
            0.2,
        )
        .unwrap();
        let t = scattering_from_potential(&q, &set);
        for (idx, &(i, j)) in set.lattice.iter().enumerate() {
            let mirror = set.lattice.iter().position(|&p| p == (-i, -j)).unwrap();
            assert_eq!(t.values[mirror], t.values[idx].conj());
        }
    }

    #[test]
    fn gaussian_transform_is_analytic() {
        // ∫ e^{-|z|²/a} e^{2i Re(kz)} dz = π a e^{-a|k|²}
        let a = 0.05;
        let q = PotentialImage::from_potential(269, 2.1, |x, y| (-(x * x + y * y) / a).exp());
        for k in [
            Complex64::new(0.3, 0.0),
            Complex64::new(1.0, -2.0),
            Complex64::new(-3.5, 2.5),
            Complex64::new(0.0, 7.0),
        ] {
            let expect = PI * a * (-a * k.norm_sqr()).exp();
            let got = t_asymptotic(&q, k);
            assert!((got - expect).norm() < 1e-4, "{k}: {got} vs {expect}");
        }
    }
}
