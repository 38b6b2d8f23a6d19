//! Scattering transforms from boundary data and from the potential, and
//! their truncation onto the D-bar k-grid.

pub mod cgo;
pub mod expint;
pub mod faddeev;
pub mod field;
pub mod kpoints;
pub mod transform;

pub use cgo::{default_boundary_points, solve_cgo_trace, BoundaryOperator, CgoMode, CgoTrace};
pub use faddeev::{faddeev_g1, FaddeevTable};
pub use field::{assemble_t_field, ScatteringField};
pub use kpoints::{kpoints, KPointSet, Region, DEFAULT_K_SPACING};
pub use transform::{
    scattering_from_dtn, scattering_from_potential, t_asymptotic, t_exp, PotentialSum,
    ScatteringValues,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{
        compute_ntd, fem_reference_dtn, homogeneous_dtn, ntd_to_dtn, perturb_ntd, DtnMatrix, Mesh,
    };
    use crate::phantom::{Conductivity, Inclusion, Phantom, RadialBump, Shape, Style};
    use crate::Complex64;
    use std::f64::consts::TAU;
    use std::sync::OnceLock;

    fn mesh() -> &'static Mesh {
        static MESH: OnceLock<Mesh> = OnceLock::new();
        MESH.get_or_init(|| Mesh::disk(3))
    }

    fn reference() -> &'static DtnMatrix {
        static REF: OnceLock<DtnMatrix> = OnceLock::new();
        REF.get_or_init(|| fem_reference_dtn(mesh(), 16).unwrap())
    }

    fn corrected<C: Conductivity + Sync>(sigma: &C, noise: Option<(f64, u64)>) -> DtnMatrix {
        let mut ntd = compute_ntd(mesh(), sigma, 16).unwrap();
        if let Some((delta, seed)) = noise {
            ntd = perturb_ntd(&ntd, delta, seed).unwrap();
        }
        DtnMatrix::reference_corrected(&ntd_to_dtn(&ntd).unwrap(), reference()).unwrap()
    }

    fn inclusions() -> Phantom {
        let mut p = Phantom::empty(Style::Kit4);
        p.inclusions = vec![
            Inclusion {
                shape: Shape::Circle {
                    center: [0.3, 0.2],
                    radius: 0.2,
                },
                value: 1.8,
            },
            Inclusion {
                shape: Shape::Ellipse {
                    center: [-0.3, -0.25],
                    radii: [0.25, 0.12],
                    angle: 0.7,
                },
                value: 0.6,
            },
        ];
        p
    }

    #[test]
    fn identical_maps_give_plane_wave() {
        let l1 = homogeneous_dtn(16).unwrap();
        let op = BoundaryOperator::new(&l1, &l1, 128).unwrap();
        for k in [Complex64::new(0.7, -0.2), Complex64::new(-3.0, 2.0)] {
            for mode in [CgoMode::Full, CgoMode::Born] {
                let trace = op.solve(k, mode).unwrap();
                for (j, v) in trace.values.iter().enumerate() {
                    assert_eq!(*v, (Complex64::i() * k * op.boundary_point(j)).exp());
                }
                assert_eq!(op.transform(&trace).unwrap(), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn born_mode_is_plane_wave() {
        let l = corrected(&inclusions(), None);
        let l1 = homogeneous_dtn(16).unwrap();
        let k = Complex64::new(1.0, 1.0);
        let trace = solve_cgo_trace(&l, &l1, k, 128, CgoMode::Born).unwrap();
        let op = BoundaryOperator::new(&l, &l1, 128).unwrap();
        for (j, v) in trace.values.iter().enumerate() {
            assert_eq!(*v, (Complex64::i() * k * op.boundary_point(j)).exp());
        }
    }

    #[test]
    fn boundary_resolution_converges() {
        let l = corrected(&inclusions(), None);
        let l1 = homogeneous_dtn(16).unwrap();
        assert_eq!(default_boundary_points(16), 128);
        let k = Complex64::from_polar(0.5, 0.9);
        let coarse = solve_cgo_trace(&l, &l1, k, 128, CgoMode::Full).unwrap();
        let fine = solve_cgo_trace(&l, &l1, k, 512, CgoMode::Full).unwrap();
        let num: f64 = (0..128)
            .map(|j| (coarse.values[j] - fine.values[4 * j]).norm_sqr())
            .sum();
        let den: f64 = coarse.values.iter().map(|v| v.norm_sqr()).sum();
        assert!((num / den).sqrt() < 1e-4, "{}", (num / den).sqrt());
    }

    #[test]
    fn radial_phantom_is_rotation_invariant() {
        let l = corrected(
            &RadialBump {
                peak: 1.5,
                radius: 0.6,
            },
            None,
        );
        let l1 = homogeneous_dtn(16).unwrap();
        let op = BoundaryOperator::new(&l, &l1, 128).unwrap();
        for radius in [1.0, 2.5] {
            let values: Vec<Complex64> = (0..16)
                .map(|d| {
                    let k = Complex64::from_polar(radius, TAU * d as f64 / 16.0 + 0.05);
                    op.transform(&op.solve(k, CgoMode::Full).unwrap()).unwrap()
                })
                .collect();
            let mean = values.iter().sum::<Complex64>() / 16.0;
            let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
            assert!(
                spread < 0.02 * mean.norm(),
                "|k|={radius}: {spread} vs {}",
                mean.norm()
            );
        }
    }

    #[test]
    fn boundary_transform_is_conjugate_symmetric() {
        let l = corrected(&inclusions(), None);
        let l1 = homogeneous_dtn(16).unwrap();
        let set = kpoints(Region::Disk { radius: 2.0 }, 0.4).unwrap();
        let t = scattering_from_dtn(&l, &l1, &set, 128, CgoMode::Full).unwrap();
        for (idx, &(i, j)) in set.lattice.iter().enumerate() {
            let mirror = set.lattice.iter().position(|&p| p == (-i, -j)).unwrap();
            let (a, b) = (t.values[idx], t.values[mirror].conj());
            assert!(
                (a - b).norm() <= 0.01 * a.norm().max(1e-3),
                "{:?}: {a} vs {b}",
                (i, j)
            );
        }
    }

    #[test]
    fn noise_inflates_high_frequencies() {
        let sigma = inclusions();
        let clean = corrected(&sigma, None);
        let noisy = corrected(&sigma, Some((0.0075, 2024)));
        let l1 = homogeneous_dtn(16).unwrap();
        let mean_abs = |l: &DtnMatrix| {
            let op = BoundaryOperator::new(l, &l1, 128).unwrap();
            (0..16)
                .map(|d| {
                    let k = Complex64::from_polar(5.0, TAU * d as f64 / 16.0);
                    op.transform(&op.solve(k, CgoMode::Full).unwrap())
                        .unwrap()
                        .norm()
                })
                .sum::<f64>()
                / 16.0
        };
        let (a, b) = (mean_abs(&clean), mean_abs(&noisy));
        assert!(b >= 2.0 * a, "noiseless {a}, noisy {b}");
    }
}
