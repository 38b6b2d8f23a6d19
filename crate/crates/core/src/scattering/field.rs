use std::collections::HashMap;

use num_complex::Complex64;

use super::transform::ScatteringValues;
use crate::dbar::KGrid;
use crate::error::{invalid, Error, Result};

/// Truncated scattering data sampled on a D-bar k-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringField {
    pub grid: KGrid,
    pub values: Vec<Complex64>,
}

impl ScatteringField {
    pub fn zeros(grid: KGrid) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

// grid points that sit on the lattice up to rounding count as nodes
fn snap(f: f64) -> f64 {
    let r = f.round();
    if (f - r).abs() < 1e-9 {
        r
    } else {
        f
    }
}

/// Truncated field: bilinear interpolation of the boundary-data transform
/// inside `|k| ≤ r_delta`, of the asymptotic transform on
/// `r_delta < |k| ≤ r`, zero beyond `r` and at the origin.
///
/// Both lattices form one interpolation table, so stencils straddling
/// `|k| = r_delta` mix the two transforms. Missing corners (the origin,
/// points past the outer radius) are dropped and the remaining weights
/// renormalized.
pub fn assemble_t_field(
    texp: &ScatteringValues,
    tasym: Option<&ScatteringValues>,
    r_delta: f64,
    r: f64,
    grid: &KGrid,
) -> Result<ScatteringField> {
    if !(r >= r_delta) || !(r_delta > 0.0) {
        return Err(invalid(format!("need 0 < R^δ ≤ R, got {r_delta}, {r}")));
    }
    if r > grid.half_width() {
        return Err(invalid("truncation radius exceeds the k-grid"));
    }
    let spacing = texp.kpoints.spacing;
    let mut table: HashMap<(i32, i32), Complex64> = HashMap::new();
    for set in std::iter::once(texp).chain(tasym) {
        if (set.kpoints.spacing - spacing).abs() > 1e-12 * spacing {
            return Err(invalid("transform lattices use different spacings"));
        }
        if set.values.len() != set.kpoints.len() {
            return Err(invalid("value count does not match the k-point count"));
        }
        for (&key, &v) in set.kpoints.lattice.iter().zip(&set.values) {
            table.insert(key, v);
        }
    }

    let origin = grid.origin_index();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (idx, out) in values.iter_mut().enumerate() {
        let k = grid.point_at(idx);
        if idx == origin || k.norm() > r * (1.0 + 1e-12) {
            continue;
        }
        let (fx, fy) = (snap(k.re / spacing), snap(k.im / spacing));
        let (i0, j0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - i0, fy - j0);
        let (i0, j0) = (i0 as i32, j0 as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut weight = 0.0;
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if w == 0.0 {
                continue;
            }
            if let Some(v) = table.get(&(i0 + di, j0 + dj)) {
                acc += v * w;
                weight += w;
            }
        }
        if weight == 0.0 {
            return Err(Error::StencilOutside { re: k.re, im: k.im });
        }
        *out = acc / weight;
    }
    Ok(ScatteringField {
        grid: *grid,
        values,
    })
}
