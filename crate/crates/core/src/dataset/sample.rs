//! One dataset record: ground truth, low-pass and frequency-enhanced D-bar
//! reconstructions of the same phantom.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dbar::{
    build_kgrid, reconstruct, Solver, DEFAULT_EXTENT_FACTOR, DEFAULT_ITERATIONS, DEFAULT_LEVEL,
};
use crate::error::{invalid, Result};
use crate::forward::{
    compute_ntd, fem_reference_dtn, homogeneous_dtn, ntd_to_dtn, perturb_ntd, DtnMatrix, Mesh,
    DEFAULT_MESH_LEVEL, DEFAULT_PATTERNS,
};
use crate::image::ConductivityImage;
use crate::phantom::{potential_q, rasterize, Conductivity, Style, DEFAULT_SMOOTHING};
use crate::scattering::{
    assemble_t_field, default_boundary_points, kpoints, scattering_from_dtn,
    scattering_from_potential, CgoMode, KPointSet, Region, ScatteringValues, DEFAULT_K_SPACING,
};

pub const SAMPLE_VERSION: u32 = 1;

/// Noise level and the matching low-pass radius.
pub const DEFAULT_PAIRING: [(f64, f64); 3] = [(0.0, 6.0), (0.001, 5.0), (0.0075, 4.0)];
pub const DEFAULT_RADII: [f64; 3] = [6.0, 7.0, 8.0];
pub const DEFAULT_WIDTH: usize = 128;

/// Numerical settings shared by every sample of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mesh_level: u32,
    pub patterns: usize,
    pub k_spacing: f64,
    pub boundary_points: usize,
    pub cgo_mode: CgoMode,
    pub smoothing: f64,
    pub iterations: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mesh_level: DEFAULT_MESH_LEVEL,
            patterns: DEFAULT_PATTERNS,
            k_spacing: DEFAULT_K_SPACING,
            boundary_points: default_boundary_points(DEFAULT_PATTERNS),
            cgo_mode: CgoMode::Full,
            smoothing: DEFAULT_SMOOTHING,
            iterations: DEFAULT_ITERATIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub style: Style,
    pub delta: f64,
    pub r_delta: f64,
    pub radii: Vec<f64>,
    pub level: u32,
    pub extent_factor: f64,
    pub width: usize,
    pub height: usize,
    pub version: u32,
}

impl SampleMeta {
    /// Metadata with `(delta, r_delta)` drawn uniformly from `pairing`.
    pub fn draw(
        seed: u64,
        style: Style,
        pairing: &[(f64, f64)],
        radii: &[f64],
        level: u32,
        width: usize,
    ) -> Result<Self> {
        if pairing.is_empty() {
            return Err(invalid("noise pairing list is empty"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_da7a);
        let (delta, r_delta) = pairing[rng.random_range(0..pairing.len())];
        let meta = Self {
            seed,
            style,
            delta,
            r_delta,
            radii: radii.to_vec(),
            level,
            extent_factor: DEFAULT_EXTENT_FACTOR,
            width,
            height: width,
            version: SAMPLE_VERSION,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn with_defaults(seed: u64, style: Style) -> Result<Self> {
        Self::draw(
            seed,
            style,
            &DEFAULT_PAIRING,
            &DEFAULT_RADII,
            DEFAULT_LEVEL,
            DEFAULT_WIDTH,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) || !(self.r_delta > 0.0) {
            return Err(invalid("need δ ≥ 0 and R^δ > 0"));
        }
        if self.radii.is_empty() {
            return Err(invalid("at least one enhancement radius is required"));
        }
        if self.radii[0] < self.r_delta || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(format!(
                "radii {:?} must be ascending and start at or above R^δ = {}",
                self.radii, self.r_delta
            )));
        }
        if self.width != self.height || self.width < 8 {
            return Err(invalid(
                "images must be square with at least 8 pixels per side",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub ground_truth: ConductivityImage,
    pub low_pass: ConductivityImage,
    pub enhanced: Vec<ConductivityImage>,
    pub meta: SampleMeta,
}

fn reference_dtn(level: u32, patterns: usize) -> Result<Arc<DtnMatrix>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<DtnMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(level, patterns)) {
        return Ok(hit.clone());
    }
    let computed = Arc::new(fem_reference_dtn(&Mesh::disk(level), patterns)?);
    cache
        .lock()
        .unwrap()
        .insert((level, patterns), computed.clone());
    Ok(computed)
}

/// FEM DtN map of the phantom with noise, after swapping the unit-conductivity
/// FEM map for the exact one.
pub fn measured_dtn<C: Conductivity + Sync + ?Sized>(
    phantom: &C,
    delta: f64,
    noise_seed: u64,
    config: &PipelineConfig,
) -> Result<DtnMatrix> {
    let mesh = Mesh::disk(config.mesh_level);
    let ntd = compute_ntd(&mesh, phantom, config.patterns).map_err(|e| e.in_stage("forward"))?;
    let noisy = perturb_ntd(&ntd, delta, noise_seed).map_err(|e| e.in_stage("noise"))?;
    let dtn = ntd_to_dtn(&noisy).map_err(|e| e.in_stage("dtn"))?;
    let reference =
        reference_dtn(config.mesh_level, config.patterns).map_err(|e| e.in_stage("forward"))?;
    DtnMatrix::reference_corrected(&dtn, &reference)
}

/// Restriction of asymptotic values to `|k| ≤ radius`.
fn restrict(values: &ScatteringValues, radius: f64) -> ScatteringValues {
    let region = match values.kpoints.region {
        Region::Annulus { inner, .. } => Region::Annulus {
            inner,
            outer: radius,
        },
        Region::Disk { .. } => Region::Disk { radius },
    };
    let keep: Vec<usize> = (0..values.kpoints.len())
        .filter(|&i| region.contains(values.kpoints.point(i)))
        .collect();
    ScatteringValues {
        kpoints: KPointSet {
            spacing: values.kpoints.spacing,
            region,
            lattice: keep.iter().map(|&i| values.kpoints.lattice[i]).collect(),
        },
        values: keep.iter().map(|&i| values.values[i]).collect(),
    }
}

/// Low-pass and enhanced reconstructions from a measured DtN map and the
/// phantom's potential.
pub fn reconstruct_sequence<C: Conductivity + Sync + ?Sized>(
    dtn: &DtnMatrix,
    phantom: &C,
    meta: &SampleMeta,
    config: &PipelineConfig,
) -> Result<(ConductivityImage, Vec<ConductivityImage>)> {
    meta.validate()?;
    let l_one = homogeneous_dtn(config.patterns)?;
    let disk = kpoints(
        Region::Disk {
            radius: meta.r_delta,
        },
        config.k_spacing,
    )?;
    let texp = scattering_from_dtn(dtn, &l_one, &disk, config.boundary_points, config.cgo_mode)
        .map_err(|e| e.in_stage("scattering"))?;

    let run = |radius: f64, tasym: Option<&ScatteringValues>| -> Result<ConductivityImage> {
        let grid = build_kgrid(radius, meta.extent_factor, meta.level)?;
        let field = assemble_t_field(&texp, tasym, meta.r_delta, radius, &grid)
            .map_err(|e| e.in_stage("assemble"))?;
        let rec = reconstruct(&field, meta.width, config.iterations, Solver::Richardson)
            .map_err(|e| e.in_stage("reconstruct"))?;
        Ok(rec.conductivity)
    };
    let low_pass = run(meta.r_delta, None)?;

    let outer = *meta.radii.last().unwrap();
    let tasym = if outer > meta.r_delta {
        let q = potential_q(phantom, config.smoothing).map_err(|e| e.in_stage("potential"))?;
        let annulus = kpoints(
            Region::Annulus {
                inner: meta.r_delta,
                outer,
            },
            config.k_spacing,
        )?;
        Some(scattering_from_potential(&q, &annulus))
    } else {
        None
    };
    let mut enhanced = Vec::with_capacity(meta.radii.len());
    for &radius in &meta.radii {
        let image = if radius > meta.r_delta {
            let part = restrict(tasym.as_ref().unwrap(), radius);
            run(radius, Some(&part))?
        } else {
            run(radius, None)?
        };
        enhanced.push(image);
    }
    Ok((low_pass, enhanced))
}

/// Full record for one phantom; deterministic in `meta.seed`.
pub fn make_sample<C: Conductivity + Sync + ?Sized>(
    phantom: &C,
    meta: &SampleMeta,
    config: &PipelineConfig,
) -> Result<Sample> {
    meta.validate()?;
    let ground_truth =
        rasterize(phantom, meta.width, meta.height, 1.0).map_err(|e| e.in_stage("rasterize"))?;
    let dtn = measured_dtn(
        phantom,
        meta.delta,
        meta.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        config,
    )?;
    let (low_pass, enhanced) = reconstruct_sequence(&dtn, phantom, meta, config)?;
    Ok(Sample {
        ground_truth,
        low_pass,
        enhanced,
        meta: meta.clone(),
    })
}
