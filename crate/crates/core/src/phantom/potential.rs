//! Schrödinger potential `q = Δ√σ / √σ` sampled on the scattering-transform
//! quadrature grid.

use serde::{Deserialize, Serialize};

use super::Conductivity;
use crate::error::{invalid, Error, Result};

/// Default Gaussian smoothing width (standard deviation) in disk units.
pub const DEFAULT_SMOOTHING: f64 = 0.05;

/// Node values of `q` on an `n × n` grid `x_i = -s + i·h`, `h = 2s/n`,
/// row-major with row index following `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialImage {
    pub nodes: usize,
    pub half_width: f64,
    pub values: Vec<f64>,
    /// Smoothed `√σ` on the same grid when `q` came from a conductivity.
    pub sqrt_sigma: Option<Vec<f64>>,
}

impl PotentialImage {
    pub const DEFAULT_NODES: usize = 269;
    pub const DEFAULT_HALF_WIDTH: f64 = 2.1;

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nodes as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.nodes + col]
    }

    /// Sample a potential given directly; zero for `|z| ≥ 1`.
    pub fn from_potential(nodes: usize, half_width: f64, q: impl Fn(f64, f64) -> f64) -> Self {
        let h = 2.0 * half_width / nodes as f64;
        let mut values = vec![0.0; nodes * nodes];
        for r in 0..nodes {
            for c in 0..nodes {
                let (x, y) = (-half_width + c as f64 * h, -half_width + r as f64 * h);
                if x * x + y * y < 1.0 {
                    values[r * nodes + c] = q(x, y);
                }
            }
        }
        Self {
            nodes,
            half_width,
            values,
            sqrt_sigma: None,
        }
    }

    /// Evaluate `q` on an arbitrary grid. With `smoothing = None` the
    /// conductivity is differenced as sampled.
    pub fn from_fn<C: Conductivity + ?Sized>(
        sigma: &C,
        nodes: usize,
        half_width: f64,
        smoothing: Option<f64>,
    ) -> Result<Self> {
        if nodes < 8 || !(half_width > 1.0) {
            return Err(invalid("potential grid needs ≥ 8 nodes and half-width > 1"));
        }
        let h = 2.0 * half_width / nodes as f64;
        let coord = |i: usize| -half_width + i as f64 * h;

        // smoothing acts on σ - 1 so that the far field stays exactly 1
        let mut excess = vec![0.0; nodes * nodes];
        for r in 0..nodes {
            for c in 0..nodes {
                excess[r * nodes + c] = sigma.conductivity(coord(c), coord(r)) - 1.0;
            }
        }
        if let Some(width) = smoothing {
            if !(width > 0.0) {
                return Err(invalid("smoothing width must be positive"));
            }
            let weights = gaussian_weights(width, h);
            excess = convolve_separable(&excess, nodes, &weights);
        }

        let mut root = vec![0.0; nodes * nodes];
        for r in 0..nodes {
            for c in 0..nodes {
                let s = 1.0 + excess[r * nodes + c];
                if !(s > 0.0) {
                    return Err(Error::NonPositiveConductivity {
                        value: s,
                        x: coord(c),
                        y: coord(r),
                    });
                }
                root[r * nodes + c] = s.sqrt();
            }
        }

        let mut values = vec![0.0; nodes * nodes];
        let inv_h2 = 1.0 / (h * h);
        for r in 1..nodes - 1 {
            for c in 1..nodes - 1 {
                let (x, y) = (coord(c), coord(r));
                if x * x + y * y >= 1.0 {
                    continue;
                }
                let k = r * nodes + c;
                let lap = (root[k - 1] + root[k + 1] + root[k - nodes] + root[k + nodes]
                    - 4.0 * root[k])
                    * inv_h2;
                values[k] = lap / root[k];
            }
        }
        Ok(Self {
            nodes,
            half_width,
            values,
            sqrt_sigma: Some(root),
        })
    }
}

fn gaussian_weights(width: f64, h: f64) -> Vec<f64> {
    let reach = (4.0 * width / h).ceil() as isize;
    let mut w: Vec<f64> = (-reach..=reach)
        .map(|i| {
            let x = i as f64 * h;
            (-0.5 * (x / width).powi(2)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

// zero padding of the excess is padding σ with 1
fn convolve_separable(data: &[f64], n: usize, weights: &[f64]) -> Vec<f64> {
    let reach = (weights.len() / 2) as isize;
    let pass = |src: &[f64], along_rows: bool| {
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for (t, w) in weights.iter().enumerate() {
                    let off = t as isize - reach;
                    let (rr, cc) = if along_rows {
                        (r as isize, c as isize + off)
                    } else {
                        (r as isize + off, c as isize)
                    };
                    if rr >= 0 && cc >= 0 && (rr as usize) < n && (cc as usize) < n {
                        acc += w * src[rr as usize * n + cc as usize];
                    }
                }
                out[r * n + c] = acc;
            }
        }
        out
    };
    let tmp = pass(data, true);
    pass(&tmp, false)
}

/// `q` for a conductivity on the default 269×269 grid over `[-2.1, 2.1)²`.
pub fn potential_from_fn<C: Conductivity + ?Sized>(
    sigma: &C,
    smoothing: Option<f64>,
) -> Result<PotentialImage> {
    PotentialImage::from_fn(
        sigma,
        PotentialImage::DEFAULT_NODES,
        PotentialImage::DEFAULT_HALF_WIDTH,
        smoothing,
    )
}

/// `q` for a phantom after Gaussian smoothing of the given width.
pub fn potential_q<C: Conductivity + ?Sized>(
    phantom: &C,
    smoothing_width: f64,
) -> Result<PotentialImage> {
    potential_from_fn(phantom, Some(smoothing_width))
}
