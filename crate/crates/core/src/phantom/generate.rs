//! Random phantom generators for the KIT4 (geometric inclusions) and ACT4
//! (perturbed thorax template) dataset styles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::geometry::{clip_horizontal, is_simple, polygons_overlap};
use super::{Inclusion, Phantom, Shape, Style, MARGIN_RADIUS};
use crate::error::{invalid, Error, Result};

const BUILTIN_TEMPLATE: &str = include_str!("../../data/act4_template.txt");

fn uniform(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    range.0 + (range.1 - range.0) * rng.random::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kit4Config {
    /// Inclusive range of the inclusion count.
    pub count: (usize, usize),
    /// Range of the (semi-major) radius.
    pub radius: (f64, f64),
    /// Minor-to-major axis ratio for ellipses.
    pub aspect: (f64, f64),
    pub ellipse_probability: f64,
    pub conductive: (f64, f64),
    pub resistive: (f64, f64),
    /// Minimum clearance between bounding circles.
    pub gap: f64,
    pub max_attempts: usize,
}

impl Default for Kit4Config {
    fn default() -> Self {
        Self {
            count: (1, 3),
            radius: (0.1, 0.3),
            aspect: (0.5, 1.0),
            ellipse_probability: 0.5,
            conductive: (1.5, 2.5),
            resistive: (0.3, 0.7),
            gap: 0.02,
            max_attempts: 1000,
        }
    }
}

/// Random non-overlapping circles and ellipses, each conductive or resistive
/// with equal probability.
pub fn generate_kit4(seed: u64, config: &Kit4Config) -> Result<Phantom> {
    if config.count.0 > config.count.1
        || config.radius.0 > config.radius.1
        || config.radius.0 <= 0.0
    {
        return Err(invalid("inconsistent KIT4 configuration ranges"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(config.count.0..=config.count.1);
    let mut inclusions: Vec<Inclusion> = Vec::with_capacity(count);
    let mut attempts = 0;

    while inclusions.len() < count {
        attempts += 1;
        if attempts > config.max_attempts {
            return Err(Error::InfeasiblePhantom {
                attempts: config.max_attempts,
                reason: format!("placed {} of {} KIT4 inclusions", inclusions.len(), count),
            });
        }
        let major = uniform(&mut rng, config.radius);
        let reach = MARGIN_RADIUS - major;
        if reach <= 0.0 {
            continue;
        }
        let rho = reach * rng.random::<f64>().sqrt();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        let center = [rho * phi.cos(), rho * phi.sin()];
        let shape = if rng.random_bool(config.ellipse_probability.clamp(0.0, 1.0)) {
            let minor = major * uniform(&mut rng, config.aspect);
            let angle = std::f64::consts::PI * rng.random::<f64>();
            Shape::Ellipse {
                center,
                radii: [major, minor],
                angle,
            }
        } else {
            Shape::Circle {
                center,
                radius: major,
            }
        };
        let value = if rng.random_bool(0.5) {
            uniform(&mut rng, config.conductive)
        } else {
            uniform(&mut rng, config.resistive)
        };
        let clear = inclusions.iter().all(|other| {
            let (c, r) = other.shape.bounding_circle();
            (c[0] - center[0]).hypot(c[1] - center[1]) >= r + major + config.gap
        });
        if clear && shape.max_radius() < MARGIN_RADIUS {
            inclusions.push(Inclusion { shape, value });
        }
    }

    Ok(Phantom {
        inclusions,
        background: 1.0,
        style: Style::Kit4,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Organ {
    Lung,
    Heart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateRegion {
    pub name: String,
    pub organ: Organ,
    pub vertices: Vec<[f64; 2]>,
}

/// Organ boundary template: labeled polygons in unit-disk coordinates.
///
/// Text format, one directive per line, `#` starts a comment:
///
/// ```text
/// version 1
/// region <name> <lung|heart>
/// <x> <y>
/// ...
/// end
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Act4Template {
    pub regions: Vec<TemplateRegion>,
}

impl Act4Template {
    pub const VERSION: u32 = 1;

    /// The template shipped with the crate (`data/act4_template.txt`).
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TEMPLATE).expect("built-in ACT4 template is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut regions = Vec::new();
        let mut current: Option<TemplateRegion> = None;
        let mut version = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Template {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("version") => {
                    let v: u32 = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err("bad version"))?;
                    if v != Self::VERSION {
                        return Err(err("unsupported template version"));
                    }
                    version = Some(v);
                }
                Some("region") => {
                    if current.is_some() {
                        return Err(err("nested region"));
                    }
                    let name = tokens.next().ok_or_else(|| err("missing region name"))?;
                    let organ = match tokens.next() {
                        Some("lung") => Organ::Lung,
                        Some("heart") => Organ::Heart,
                        _ => return Err(err("region role must be `lung` or `heart`")),
                    };
                    current = Some(TemplateRegion {
                        name: name.to_string(),
                        organ,
                        vertices: Vec::new(),
                    });
                }
                Some("end") => {
                    let region = current
                        .take()
                        .ok_or_else(|| err("`end` outside a region"))?;
                    if region.vertices.len() < 3 {
                        return Err(err("region needs at least three vertices"));
                    }
                    regions.push(region);
                }
                Some(first) => {
                    let region = current
                        .as_mut()
                        .ok_or_else(|| err("vertex outside a region"))?;
                    let x: f64 = first.parse().map_err(|_| err("bad x coordinate"))?;
                    let y: f64 = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err("bad y coordinate"))?;
                    region.vertices.push([x, y]);
                }
                None => {}
            }
        }
        if current.is_some() {
            return Err(Error::Template {
                line: text.lines().count(),
                msg: "unterminated region".into(),
            });
        }
        if version.is_none() {
            return Err(Error::Template {
                line: 1,
                msg: "missing version directive".into(),
            });
        }
        Ok(Self { regions })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Act4Config {
    pub template: Act4Template,
    /// Standard deviation of the per-vertex Gaussian displacement.
    pub perturbation_std: f64,
    /// Probability that a lung is split by a horizontal line.
    pub split_probability: f64,
    pub value_range: (f64, f64),
    pub max_attempts: usize,
}

impl Default for Act4Config {
    fn default() -> Self {
        Self {
            template: Act4Template::builtin(),
            perturbation_std: 0.02,
            split_probability: 0.5,
            value_range: (0.3, 2.5),
            max_attempts: 1000,
        }
    }
}

fn admissible(polygons: &[Vec<[f64; 2]>]) -> bool {
    let inside = polygons
        .iter()
        .all(|p| p.iter().all(|v| v[0].hypot(v[1]) < MARGIN_RADIUS) && is_simple(p));
    inside
        && (0..polygons.len()).all(|i| {
            ((i + 1)..polygons.len()).all(|j| !polygons_overlap(&polygons[i], &polygons[j]))
        })
}

/// Perturbed thorax template. Every vertex moves by i.i.d. Gaussian noise;
/// each lung is split by a random horizontal line with the configured
/// probability; every resulting region gets an independent uniform value.
pub fn generate_act4(seed: u64, config: &Act4Config) -> Result<Phantom> {
    if config.perturbation_std < 0.0 || !(0.0..=1.0).contains(&config.split_probability) {
        return Err(invalid("inconsistent ACT4 configuration"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, config.perturbation_std).map_err(|e| invalid(e.to_string()))?;

    let mut polygons = None;
    for _ in 0..config.max_attempts {
        let candidate: Vec<Vec<[f64; 2]>> = config
            .template
            .regions
            .iter()
            .map(|r| {
                r.vertices
                    .iter()
                    .map(|v| [v[0] + noise.sample(&mut rng), v[1] + noise.sample(&mut rng)])
                    .collect()
            })
            .collect();
        if admissible(&candidate) {
            polygons = Some(candidate);
            break;
        }
    }
    let polygons = polygons.ok_or_else(|| Error::InfeasiblePhantom {
        attempts: config.max_attempts,
        reason: "perturbed ACT4 template kept self-intersecting or leaving the margin".into(),
    })?;

    let mut inclusions = Vec::new();
    for (region, vertices) in config.template.regions.iter().zip(polygons) {
        let split = region.organ == Organ::Lung && rng.random_bool(config.split_probability);
        let pieces = if split {
            let lo = vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
            let hi = vertices
                .iter()
                .map(|v| v[1])
                .fold(f64::NEG_INFINITY, f64::max);
            let level = lo + (0.25 + 0.5 * rng.random::<f64>()) * (hi - lo);
            vec![
                clip_horizontal(&vertices, level, true),
                clip_horizontal(&vertices, level, false),
            ]
        } else {
            vec![vertices]
        };
        for piece in pieces {
            inclusions.push(Inclusion {
                shape: Shape::Polygon { vertices: piece },
                value: uniform(&mut rng, config.value_range),
            });
        }
    }

    Ok(Phantom {
        inclusions,
        background: 1.0,
        style: Style::Act4,
        seed,
    })
}
