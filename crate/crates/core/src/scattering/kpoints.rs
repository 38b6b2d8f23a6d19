use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_K_SPACING: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    /// `0 < |k| ≤ radius`
    Disk { radius: f64 },
    /// `inner < |k| ≤ outer`
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Region::Disk { radius } => (0.0, radius),
            Region::Annulus { inner, outer } => (inner, outer),
        }
    }

    pub fn contains(&self, k: Complex64) -> bool {
        let (lo, hi) = self.bounds();
        let r = k.norm();
        r > lo * (1.0 + 1e-12) && r <= hi * (1.0 + 1e-12) && r > 1e-9
    }
}

/// Points of the lattice `hℤ²` inside a region, with their integer indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KPointSet {
    pub spacing: f64,
    pub region: Region,
    pub lattice: Vec<(i32, i32)>,
}

impl KPointSet {
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        let (i, j) = self.lattice[idx];
        Complex64::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

pub fn kpoints(region: Region, spacing: f64) -> Result<KPointSet> {
    let (lo, hi) = region.bounds();
    if !(spacing > 0.0) || !(hi > lo) || lo < 0.0 {
        return Err(invalid(format!(
            "bad k region {region:?} with spacing {spacing}"
        )));
    }
    let reach = (hi / spacing).floor() as i32 + 1;
    let mut lattice = Vec::new();
    for j in -reach..=reach {
        for i in -reach..=reach {
            if (i, j) == (0, 0) {
                continue;
            }
            let k = Complex64::new(i as f64 * spacing, j as f64 * spacing);
            if region.contains(k) {
                lattice.push((i, j));
            }
        }
    }
    if lattice.is_empty() {
        return Err(Error::EmptyKPoints(format!(
            "{region:?} with spacing {spacing}"
        )));
    }
    Ok(KPointSet {
        spacing,
        region,
        lattice,
    })
}
