//! Pixel grids over the square `[-a, a)²`.

use crate::error::{invalid, Result};

/// Real-valued image sampled at pixel centers of a `width × height` grid
/// covering `[-a, a)²`. Row `r` holds the pixels with
/// `y = -a + (r + 1/2)·2a/height`; values are stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    half_width: f64,
    values: Vec<f64>,
}

/// Conductivity images share the pixel layout of [`Image`].
pub type ConductivityImage = Image;

impl Image {
    pub fn new(width: usize, height: usize, half_width: f64, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        if values.len() != width * height {
            return Err(invalid(format!(
                "image buffer holds {} values, expected {}",
                values.len(),
                width * height
            )));
        }
        if !(half_width > 0.0) {
            return Err(invalid("image half-width must be positive"));
        }
        Ok(Self {
            width,
            height,
            half_width,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, half_width: f64, value: f64) -> Self {
        Self {
            width,
            height,
            half_width,
            values: vec![value; width * height],
        }
    }

    /// Samples `f(x, y)` at every pixel center.
    pub fn from_fn(
        width: usize,
        height: usize,
        half_width: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(width * height);
        let dx = 2.0 * half_width / width as f64;
        let dy = 2.0 * half_width / height as f64;
        for r in 0..height {
            let y = -half_width + (r as f64 + 0.5) * dy;
            for c in 0..width {
                let x = -half_width + (c as f64 + 0.5) * dx;
                values.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            half_width,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Physical coordinates of the center of pixel `(col, row)`.
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        let dx = 2.0 * self.half_width / self.width as f64;
        let dy = 2.0 * self.half_width / self.height as f64;
        (
            -self.half_width + (col as f64 + 0.5) * dx,
            -self.half_width + (row as f64 + 0.5) * dy,
        )
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}
