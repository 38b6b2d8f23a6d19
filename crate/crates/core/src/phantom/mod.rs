//! Conductivity phantoms on the unit disk.
//!
//! A [`Phantom`] is a list of non-overlapping [`Inclusion`]s on a unit
//! background. Generators for the two dataset styles live in [`generate`];
//! the Schrödinger potential used by the Born-type scattering transform
//! lives in [`potential`].

pub mod generate;
pub mod geometry;
pub mod potential;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::image::ConductivityImage;

pub use generate::{generate_act4, generate_kit4, Act4Config, Act4Template, Kit4Config};
pub use potential::{potential_from_fn, potential_q, PotentialImage, DEFAULT_SMOOTHING};

/// Inclusions must lie inside this radius so that σ ≡ 1 near the boundary.
pub const MARGIN_RADIUS: f64 = 0.9;

/// Anything that can report a conductivity at a point of the plane.
pub trait Conductivity {
    fn conductivity(&self, x: f64, y: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64> Conductivity for F {
    fn conductivity(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    /// Semi-axes `radii` before a counter-clockwise rotation by `angle`.
    Ellipse {
        center: [f64; 2],
        radii: [f64; 2],
        angle: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Circle { center, radius } => {
                let (dx, dy) = (x - center[0], y - center[1]);
                dx * dx + dy * dy <= radius * radius
            }
            Shape::Ellipse {
                center,
                radii,
                angle,
            } => {
                let (dx, dy) = (x - center[0], y - center[1]);
                let (s, c) = angle.sin_cos();
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (u / radii[0]).powi(2) + (v / radii[1]).powi(2) <= 1.0
            }
            Shape::Polygon { vertices } => geometry::point_in_polygon(vertices, x, y),
        }
    }

    /// Center and radius of a circle enclosing the shape.
    pub fn bounding_circle(&self) -> ([f64; 2], f64) {
        match self {
            Shape::Circle { center, radius } => (*center, *radius),
            Shape::Ellipse { center, radii, .. } => (*center, radii[0].max(radii[1])),
            Shape::Polygon { vertices } => {
                let n = vertices.len().max(1) as f64;
                let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n;
                let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n;
                let r = vertices
                    .iter()
                    .map(|v| (v[0] - cx).hypot(v[1] - cy))
                    .fold(0.0, f64::max);
                ([cx, cy], r)
            }
        }
    }

    /// Largest distance from the origin to a point of the shape.
    pub fn max_radius(&self) -> f64 {
        match self {
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0].hypot(v[1]))
                .fold(0.0, f64::max),
            _ => {
                let (c, r) = self.bounding_circle();
                c[0].hypot(c[1]) + r
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub shape: Shape,
    /// Conductivity relative to the unit background.
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Kit4,
    Act4,
}

impl std::fmt::Display for Style {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Style::Kit4 => "kit4",
            Style::Act4 => "act4",
        })
    }
}

impl std::str::FromStr for Style {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kit4" => Ok(Style::Kit4),
            "act4" => Ok(Style::Act4),
            other => Err(invalid(format!("unknown phantom style `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub inclusions: Vec<Inclusion>,
    pub background: f64,
    pub style: Style,
    pub seed: u64,
}

impl Phantom {
    /// Homogeneous σ ≡ 1.
    pub fn empty(style: Style) -> Self {
        Self {
            inclusions: Vec::new(),
            background: 1.0,
            style,
            seed: 0,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.inclusions.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let phantom: Phantom = serde_json::from_str(text)?;
        for inc in &phantom.inclusions {
            if !(inc.value > 0.0) {
                return Err(invalid("inclusion conductivity must be positive"));
            }
        }
        Ok(phantom)
    }

    pub fn min_value(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|i| i.value)
            .fold(self.background, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|i| i.value)
            .fold(self.background, f64::max)
    }
}

impl Conductivity for Phantom {
    fn conductivity(&self, x: f64, y: f64) -> f64 {
        self.inclusions
            .iter()
            .find(|inc| inc.shape.contains(x, y))
            .map_or(self.background, |inc| inc.value)
    }
}

/// Smooth compactly supported radial conductivity
/// `σ(z) = 1 + (peak − 1)·exp(1 − 1/(1 − |z|²/ρ²))` for `|z| < ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialBump {
    pub peak: f64,
    pub radius: f64,
}

impl Conductivity for RadialBump {
    fn conductivity(&self, x: f64, y: f64) -> f64 {
        let t = (x * x + y * y) / (self.radius * self.radius);
        if t >= 1.0 {
            1.0
        } else {
            1.0 + (self.peak - 1.0) * (1.0 - 1.0 / (1.0 - t)).exp()
        }
    }
}

/// Samples the conductivity at pixel centers of a `width × height` grid on
/// `[-a, a)²`.
pub fn rasterize<C: Conductivity + ?Sized>(
    sigma: &C,
    width: usize,
    height: usize,
    half_width: f64,
) -> Result<ConductivityImage> {
    if width < 8 || height < 8 {
        return Err(invalid("rasterize needs at least 8×8 pixels"));
    }
    if !(half_width > 0.0) {
        return Err(invalid("rasterize half-width must be positive"));
    }
    Ok(ConductivityImage::from_fn(
        width,
        height,
        half_width,
        |x, y| sigma.conductivity(x, y),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(r: f64, v: f64) -> Phantom {
        Phantom {
            inclusions: vec![Inclusion {
                shape: Shape::Circle {
                    center: [0.0, 0.0],
                    radius: r,
                },
                value: v,
            }],
            ..Phantom::empty(Style::Kit4)
        }
    }

    #[test]
    fn empty_phantom_rasterizes_to_ones() {
        let img = rasterize(&Phantom::empty(Style::Kit4), 128, 128, 1.0).unwrap();
        assert!(img.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn circle_containment() {
        let p = disk(0.3, 2.0);
        let img = rasterize(&p, 64, 64, 1.0).unwrap();
        // pixel (32, 32) has its corner at the origin and center at (1/64, 1/64)
        assert_eq!(img.get(32, 32), 2.0);
        assert_eq!(p.conductivity(0.0, 0.0), 2.0);
        assert_eq!(p.conductivity(0.9, 0.0), 1.0);
    }

    #[test]
    fn mean_matches_area_fraction() {
        let (r, v, a) = (0.4, 2.5, 1.0);
        let img = rasterize(&disk(r, v), 256, 256, a).unwrap();
        let expected = 1.0 + (v - 1.0) * std::f64::consts::PI * r * r / (4.0 * a * a);
        assert!((img.mean() - expected).abs() / expected < 0.02);
    }

    #[test]
    fn rasterize_is_repeatable() {
        let p = disk(0.2, 0.5);
        assert_eq!(
            rasterize(&p, 32, 32, 1.0).unwrap(),
            rasterize(&p, 32, 32, 1.0).unwrap()
        );
    }

    #[test]
    fn too_small_grid_is_rejected() {
        assert!(rasterize(&Phantom::empty(Style::Kit4), 4, 16, 1.0).is_err());
    }

    #[test]
    fn ellipse_respects_rotation() {
        let s = Shape::Ellipse {
            center: [0.0, 0.0],
            radii: [0.5, 0.1],
            angle: std::f64::consts::FRAC_PI_2,
        };
        assert!(s.contains(0.0, 0.45));
        assert!(!s.contains(0.45, 0.0));
    }

    #[test]
    fn json_round_trip() {
        let p = disk(0.25, 1.7);
        let back = Phantom::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn radial_bump_is_one_outside_support() {
        let b = RadialBump {
            peak: 1.5,
            radius: 0.6,
        };
        assert_eq!(b.conductivity(0.0, 0.0), 1.5);
        assert_eq!(b.conductivity(0.6, 0.0), 1.0);
        assert!(b.conductivity(0.3, 0.0) > 1.0);
    }
}
