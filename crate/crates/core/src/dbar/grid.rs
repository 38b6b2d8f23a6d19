use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_EXTENT_FACTOR: f64 = 2.1;
pub const DEFAULT_LEVEL: u32 = 7;

/// Square k-grid of `2^l × 2^l` points on `[-sR, sR)²`, row-major with the
/// row index following `Im k`. The origin is the point `(2^{l-1}, 2^{l-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub level: u32,
    pub extent_factor: f64,
    pub radius: f64,
}

impl KGrid {
    pub fn new(radius: f64, extent_factor: f64, level: u32) -> Result<Self> {
        if !(4..=12).contains(&level) {
            return Err(invalid(format!(
                "grid exponent must lie in [4, 12], got {level}"
            )));
        }
        if !(radius > 0.0) || !(extent_factor >= 2.0) {
            return Err(invalid(format!(
                "need R > 0 and s ≥ 2, got R = {radius}, s = {extent_factor}"
            )));
        }
        Ok(Self {
            level,
            extent_factor,
            radius,
        })
    }

    pub fn size(&self) -> usize {
        1 << self.level
    }

    pub fn len(&self) -> usize {
        self.size() * self.size()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.extent_factor * self.radius
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width() / self.size() as f64
    }

    pub fn origin_index(&self) -> usize {
        let c = self.size() / 2;
        c * self.size() + c
    }

    pub fn point(&self, row: usize, col: usize) -> Complex64 {
        let h = self.spacing();
        let a = self.half_width();
        Complex64::new(-a + col as f64 * h, -a + row as f64 * h)
    }

    pub fn point_at(&self, idx: usize) -> Complex64 {
        self.point(idx / self.size(), idx % self.size())
    }
}

pub fn build_kgrid(radius: f64, extent_factor: f64, level: u32) -> Result<KGrid> {
    KGrid::new(radius, extent_factor, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configuration() {
        let g = build_kgrid(4.0, 2.1, 9).unwrap();
        assert_eq!(g.size(), 512);
        assert!((g.half_width() - 8.4).abs() < 1e-12);
        assert!((g.spacing() - 8.4 / 256.0).abs() < 1e-15);
        assert_eq!(g.spacing() * 512.0, 2.0 * g.half_width());
    }

    #[test]
    fn small_grid_contains_origin() {
        let g = build_kgrid(1.0, 2.1, 4).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.point_at(g.origin_index()), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn out_of_range() {
        assert!(build_kgrid(1.0, 2.1, 3).is_err());
        assert!(build_kgrid(1.0, 2.1, 13).is_err());
        assert!(build_kgrid(1.0, 1.5, 6).is_err());
    }
}
