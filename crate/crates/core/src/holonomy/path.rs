//! Polyline loops on the punctured torus that avoid the lattice.

use num_complex::Complex64;

use crate::elliptic::LatticeSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopTag {
    /// `z ↦ z + ω₁` (the generator `A`).
    Alpha,
    /// `z ↦ z + ω₂` (the generator `B`).
    Beta,
    /// A small loop around a lattice point, freely homotopic to the
    /// commutator `ABA⁻¹B⁻¹`.
    Commutator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopPath {
    pub tag: LoopTag,
    pub vertices: Vec<Complex64>,
}

/// Distance from `z` to the segment `[a, b]`.
fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let s = ((z - a) * d.conj()).re / len2;
    (z - (a + d * s.clamp(0.0, 1.0))).norm()
}

/// Lattice points within `radius` of the segment `[a, b]`.
fn lattice_points_near(lat: &LatticeSpec, a: Complex64, b: Complex64, radius: f64) -> Vec<Complex64> {
    let w1 = lat.scale;
    let w2 = lat.scale * lat.tau;
    // coordinates in the lattice basis
    let det = (w1.conj() * w2).im;
    let coords = |z: Complex64| ((z.conj() * w2).im / det, (w1.conj() * z).im / det);
    let (sa, ta) = coords(a);
    let (sb, tb) = coords(b);
    let pad = 2.0 + radius / w1.norm().min(w2.norm());
    let (s0, s1) = (sa.min(sb) - pad, sa.max(sb) + pad);
    let (t0, t1) = (ta.min(tb) - pad, ta.max(tb) + pad);
    let mut out = Vec::new();
    for n in t0.floor() as i64..=t1.ceil() as i64 {
        for m in s0.floor() as i64..=s1.ceil() as i64 {
            let p = lat.point(m, n);
            if segment_distance(p, a, b) < radius {
                out.push(p);
            }
        }
    }
    out
}

/// Replace `[a, b]` by a rectilinear polyline that passes lattice points
/// within `2 · clearance` at that distance, on the far side from them, so
/// the homotopy class of the straight segment is kept. A lattice point
/// exactly on the segment is passed on the left.
pub fn route_segment(lat: &LatticeSpec, a: Complex64, b: Complex64, clearance: f64) -> Result<Vec<Complex64>> {
    let r = 2.0 * clearance;
    for end in [a, b] {
        let (_, d) = lat.nearest_point(end);
        if d < r {
            return Err(Error::PathTooClose { z: end, clearance: d });
        }
    }
    let len = (b - a).norm();
    let dir = (b - a) / len;
    let normal = dir * Complex64::new(0.0, 1.0);
    let mut hits: Vec<(f64, f64)> = lattice_points_near(lat, a, b, r)
        .into_iter()
        .map(|p| {
            let rel = (p - a) * dir.conj();
            (rel.re, rel.im)
        })
        .collect();
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = vec![a];
    for (s, h) in hits {
        let lateral = if h > 0.0 { h - r } else { h + r };
        let at = |u: f64, v: f64| a + dir * u + normal * v;
        out.push(at(s - r, 0.0));
        out.push(at(s - r, lateral));
        out.push(at(s + r, lateral));
        out.push(at(s + r, 0.0));
    }
    out.push(b);
    Ok(out)
}

impl LoopPath {
    /// Straight loop from `z0` to `z0 + ω₁`, routed around nearby lattice
    /// points.
    pub fn alpha(lat: &LatticeSpec, z0: Complex64, clearance: f64) -> Result<Self> {
        Ok(LoopPath {
            tag: LoopTag::Alpha,
            vertices: route_segment(lat, z0, z0 + lat.point(1, 0), clearance)?,
        })
    }

    pub fn beta(lat: &LatticeSpec, z0: Complex64, clearance: f64) -> Result<Self> {
        Ok(LoopPath {
            tag: LoopTag::Beta,
            vertices: route_segment(lat, z0, z0 + lat.point(0, 1), clearance)?,
        })
    }

    /// Square of half-width `radius` around the lattice point `center`,
    /// traversed counterclockwise.
    pub fn puncture(center: Complex64, radius: f64) -> Self {
        let corners = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (1.0, 1.0)];
        LoopPath {
            tag: LoopTag::Commutator,
            vertices: corners
                .iter()
                .map(|&(u, v)| center + Complex64::new(u, v) * radius)
                .collect(),
        }
    }

    /// Custom polyline; checked for clearance and for closing up under the
    /// lattice translation named by `tag`.
    pub fn from_vertices(
        lat: &LatticeSpec,
        tag: LoopTag,
        vertices: Vec<Complex64>,
        clearance: f64,
    ) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidConfig("a loop needs at least two vertices".into()));
        }
        let path = LoopPath { tag, vertices };
        let shift = path.end() - path.start();
        let expected = match tag {
            LoopTag::Alpha => lat.point(1, 0),
            LoopTag::Beta => lat.point(0, 1),
            LoopTag::Commutator => Complex64::new(0.0, 0.0),
        };
        if (shift - expected).norm() > 1e-12 * lat.scale.norm() {
            return Err(Error::InvalidConfig(format!(
                "loop endpoints differ by {shift}, expected {expected}"
            )));
        }
        let min = path.clearance(lat);
        if min < clearance {
            return Err(Error::PathTooClose {
                z: path.start(),
                clearance: min,
            });
        }
        Ok(path)
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.vertices.last().unwrap()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Smallest distance from the polyline to the lattice.
    pub fn clearance(&self, lat: &LatticeSpec) -> f64 {
        let mut min = f64::INFINITY;
        for (a, b) in self.segments() {
            let reach = (b - a).norm() + lat.scale.norm() * (1.0 + lat.tau.norm());
            for p in lattice_points_near(lat, a, b, reach) {
                min = min.min(segment_distance(p, a, b));
            }
        }
        min
    }
}
