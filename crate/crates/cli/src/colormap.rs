//! Fixed diverging colormap for conductivity images.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use dbar_core::image::Image;

/// `(value, [r, g, b])`, interpolated linearly and clamped at both ends.
pub const STOPS: [(f64, [u8; 3]); 5] = [
    (0.3, [5, 48, 97]),
    (0.65, [67, 147, 195]),
    (1.0, [247, 247, 247]),
    (1.75, [214, 96, 77]),
    (2.5, [103, 0, 31]),
];

pub fn color(value: f64) -> [u8; 3] {
    if !value.is_finite() {
        return [0, 0, 0];
    }
    let (first, last) = (STOPS[0], STOPS[STOPS.len() - 1]);
    if value <= first.0 {
        return first.1;
    }
    if value >= last.0 {
        return last.1;
    }
    let i = STOPS.windows(2).position(|w| value <= w[1].0).unwrap();
    let ((a, ca), (b, cb)) = (STOPS[i], STOPS[i + 1]);
    let t = (value - a) / (b - a);
    let mut out = [0u8; 3];
    for k in 0..3 {
        out[k] = (ca[k] as f64 + t * (cb[k] as f64 - ca[k] as f64)).round() as u8;
    }
    out
}

/// RGB PNG with row 0 at the top, i.e. `y` increasing upwards.
pub fn write_png(image: &Image, path: &Path) -> std::io::Result<()> {
    let (w, h) = (image.width(), image.height());
    let mut data = Vec::with_capacity(w * h * 3);
    for row in (0..h).rev() {
        for col in 0..w {
            data.extend_from_slice(&color(image.get(col, row)));
        }
    }
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, w as u32, h as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(std::io::Error::other)?;
    writer
        .write_image_data(&data)
        .map_err(std::io::Error::other)?;
    Ok(())
}
