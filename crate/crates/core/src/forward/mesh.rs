//! Structured triangulation of the unit disk: concentric rings graded toward
//! the boundary, a fan at the center.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Triangle mesh of the unit disk.
///
/// Vertices are ordered from the center outward. The boundary vertices are
/// the last `boundary_count` vertices, at angles `2πj / boundary_count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
}

struct Ring {
    radius: f64,
    count: usize,
    offset: f64,
}

fn target_size(r: f64, boundary_h: f64) -> f64 {
    boundary_h * (1.0 + 3.0 * ((1.0 - r) / 0.35).clamp(0.0, 1.0))
}

impl Mesh {
    /// Level `ℓ` has `64·2^ℓ` boundary vertices; each level roughly
    /// quadruples the vertex count.
    pub fn disk(level: u32) -> Self {
        let nb = 64usize << level;
        let hb = TAU / nb as f64;

        let mut rings = vec![Ring {
            radius: 1.0,
            count: nb,
            offset: 0.0,
        }];
        loop {
            let last = rings.last().unwrap();
            let h = target_size(last.radius, hb);
            let r = last.radius - h * 3f64.sqrt() / 2.0;
            if r < 0.6 * target_size(r.max(0.0), hb) {
                break;
            }
            let mut count = last.count;
            while count >= 16 && 2.0 * TAU * r / count as f64 <= 1.2 * target_size(r, hb) {
                count /= 2;
            }
            let offset = if rings.len() % 2 == 1 { 0.5 } else { 0.0 };
            rings.push(Ring {
                radius: r,
                count,
                offset,
            });
        }
        rings.reverse();

        let mut vertices = vec![[0.0, 0.0]];
        let mut starts = Vec::with_capacity(rings.len());
        for ring in &rings {
            starts.push(vertices.len());
            for j in 0..ring.count {
                let t = TAU * (j as f64 + ring.offset) / ring.count as f64;
                vertices.push([ring.radius * t.cos(), ring.radius * t.sin()]);
            }
        }
        // exact boundary placement
        let b0 = *starts.last().unwrap();
        for j in 0..nb {
            let t = TAU * j as f64 / nb as f64;
            vertices[b0 + j] = [t.cos(), t.sin()];
        }

        let mut triangles = Vec::new();
        let first = &rings[0];
        for j in 0..first.count {
            triangles.push([0, starts[0] + j, starts[0] + (j + 1) % first.count]);
        }
        for w in 0..rings.len() - 1 {
            stitch(
                &rings[w],
                starts[w],
                &rings[w + 1],
                starts[w + 1],
                &mut triangles,
            );
        }
        for t in &mut triangles {
            if signed_area(&vertices, t) < 0.0 {
                t.swap(1, 2);
            }
        }

        Self {
            vertices,
            triangles,
            boundary: (b0..b0 + nb).collect(),
        }
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }
}

fn signed_area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| v[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

// merges the two angle sequences, emitting one triangle per advance
fn stitch(inner: &Ring, si: usize, outer: &Ring, so: usize, out: &mut Vec<[usize; 3]>) {
    let angle = |ring: &Ring, j: usize| (j as f64 + ring.offset) / ring.count as f64;
    let (ni, no) = (inner.count, outer.count);
    let (mut i, mut o) = (0, 0);
    while i < ni || o < no {
        let advance_outer = i == ni || (o < no && angle(outer, o + 1) <= angle(inner, i + 1));
        if advance_outer {
            out.push([si + i % ni, so + o % no, so + (o + 1) % no]);
            o += 1;
        } else {
            out.push([si + i % ni, so + o % no, si + (i + 1) % ni]);
            i += 1;
        }
    }
}
