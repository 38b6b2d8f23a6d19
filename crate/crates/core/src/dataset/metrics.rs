//! Image quality metrics and average-pool downsampling.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::image::Image;

pub const PSNR_CAP: f64 = 99.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub psnr: f64,
    pub ssim: f64,
    pub rmse: f64,
}

fn check_pair(pred: &Image, gt: &Image) -> Result<f64> {
    if !pred.same_shape(gt) {
        return Err(Error::GridMismatch(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    let range = gt.max() - gt.min();
    if !(range > 0.0) {
        return Err(invalid("ground truth has zero dynamic range"));
    }
    Ok(range)
}

fn mse(pred: &Image, gt: &Image) -> f64 {
    let sum: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(p, g)| (p - g) * (p - g))
        .sum();
    sum / gt.values().len() as f64
}

/// `10·log10(range²/MSE)` with the range of the ground truth, capped.
pub fn psnr(pred: &Image, gt: &Image) -> Result<f64> {
    let range = check_pair(pred, gt)?;
    let mse = mse(pred, gt);
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (range * range / mse).log10()).min(PSNR_CAP))
}

/// `‖pred − gt‖₂ / ‖gt‖₂`.
pub fn rmse(pred: &Image, gt: &Image) -> Result<f64> {
    check_pair(pred, gt)?;
    let num: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(p, g)| (p - g) * (p - g))
        .sum();
    let den: f64 = gt.values().iter().map(|g| g * g).sum();
    Ok((num / den).sqrt())
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let raw: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian filter over all fully contained windows.
fn filter_valid(values: &[f64], width: usize, height: usize, window: &[f64]) -> Vec<f64> {
    let n = window.len();
    let out_w = width + 1 - n;
    let out_h = height + 1 - n;
    let mut rows = vec![0.0; out_w * height];
    for r in 0..height {
        let line = &values[r * width..(r + 1) * width];
        for c in 0..out_w {
            rows[r * out_w + c] = window.iter().zip(&line[c..c + n]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for r in 0..out_h {
        for c in 0..out_w {
            out[r * out_w + c] = (0..n).map(|i| window[i] * rows[(r + i) * out_w + c]).sum();
        }
    }
    out
}

/// Mean local SSIM over every 11×11 window inside the image.
pub fn ssim(pred: &Image, gt: &Image) -> Result<f64> {
    let range = check_pair(pred, gt)?;
    let (w, h) = (gt.width(), gt.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(invalid(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}"
        )));
    }
    let window = gaussian_window();
    let x = pred.values();
    let y = gt.values();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mx = filter_valid(x, w, h, &window);
    let my = filter_valid(y, w, h, &window);
    let sxx = filter_valid(&xx, w, h, &window);
    let syy = filter_valid(&yy, w, h, &window);
    let sxy = filter_valid(&xy, w, h, &window);
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

pub fn metrics(pred: &Image, gt: &Image) -> Result<MetricsReport> {
    Ok(MetricsReport {
        psnr: psnr(pred, gt)?,
        ssim: ssim(pred, gt)?,
        rmse: rmse(pred, gt)?,
    })
}

/// Mean of each field over a list of reports.
pub fn mean_report(reports: &[MetricsReport]) -> Option<MetricsReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    Some(MetricsReport {
        psnr: reports.iter().map(|r| r.psnr).sum::<f64>() / n,
        ssim: reports.iter().map(|r| r.ssim).sum::<f64>() / n,
        rmse: reports.iter().map(|r| r.rmse).sum::<f64>() / n,
    })
}

/// `levels` rounds of 2×2 average pooling.
pub fn downsample(image: &Image, levels: u32) -> Result<Image> {
    let factor = 1usize
        .checked_shl(levels)
        .filter(|&f| f <= image.width().max(image.height()))
        .ok_or_else(|| invalid(format!("cannot downsample by 2^{levels}")))?;
    if !image.width().is_multiple_of(factor) || !image.height().is_multiple_of(factor) {
        return Err(invalid(format!(
            "{}x{} is not divisible by {factor}",
            image.width(),
            image.height()
        )));
    }
    let mut current = image.clone();
    for _ in 0..levels {
        let (w, h) = (current.width() / 2, current.height() / 2);
        let mut values = Vec::with_capacity(w * h);
        for r in 0..h {
            for c in 0..w {
                let sum = current.get(2 * c, 2 * r)
                    + current.get(2 * c + 1, 2 * r)
                    + current.get(2 * c, 2 * r + 1)
                    + current.get(2 * c + 1, 2 * r + 1);
                values.push(0.25 * sum);
            }
        }
        current = Image::new(w, h, current.half_width(), values)?;
    }
    Ok(current)
}
