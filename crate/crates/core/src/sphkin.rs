//! Vector and spherical-geometry primitives.
//!
//! Angles on the sphere are measured right-handed about the outward normal of
//! the point they sit at. Indices of per-edge quantities follow the direction
//! they belong to: `C_k` is the direction of `V_{k-1} → V_k`, the bar length
//! `λ_k` sits at vertex `V_k` between `C_k` and `C_{k+1}`, and the torsion
//! `τ_k` is the rotation about `C_k`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Vec3 = Vector3<f64>;

/// Rigid closed polyline `V_0, …, V_{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialPolygon {
    vertices: Vec<Vec3>,
}

impl SpatialPolygon {
    /// Validates edge lengths and that no two consecutive edges are parallel.
    pub fn new(vertices: Vec<Vec3>, tol: f64) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        let polygon = Self { vertices };
        for k in 0..n {
            let length = polygon.edge(k).norm();
            if !(length > tol) {
                return Err(Error::DegenerateEdge { index: k, length });
            }
        }
        for k in 0..n {
            let a = polygon.edge(k).normalize();
            let b = polygon.edge(k + 1).normalize();
            if a.cross(&b).norm() <= tol {
                return Err(Error::DegenerateVertex { index: k % n });
            }
        }
        Ok(polygon)
    }

    pub fn from_points(points: &[[f64; 3]], tol: f64) -> Result<Self> {
        Self::new(
            points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect(),
            tol,
        )
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    /// Vertex with cyclic index.
    pub fn vertex(&self, k: usize) -> Vec3 {
        self.vertices[k % self.len()]
    }

    /// `c_k`, the vector from `V_{k-1}` to `V_k` (cyclic).
    pub fn edge(&self, k: usize) -> Vec3 {
        let n = self.len();
        let k = k % n;
        self.vertices[k] - self.vertices[(k + n - 1) % n]
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max((a - b).norm());
            }
        }
        d
    }
}

/// Unit vector in 3-space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint(Vec3);

impl SphericalPoint {
    /// Normalizes `v`; fails on (near) zero vectors.
    pub fn from_vector(v: Vec3) -> Option<Self> {
        let n = v.norm();
        (n > f64::MIN_POSITIVE && n.is_finite()).then(|| Self(v / n))
    }

    pub fn as_vec(&self) -> Vec3 {
        self.0
    }

    pub fn antipode(&self) -> Self {
        Self(-self.0)
    }

    /// Great-circle distance in `[0, π]`.
    pub fn arc_to(&self, other: &Self) -> f64 {
        arc_between(&self.0, &other.0)
    }
}

/// Angle between two (not necessarily unit) vectors, in `[0, π]`.
pub fn arc_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Unit tangent at `p` pointing along the great circle toward `x`.
pub fn tangent_toward(p: &Vec3, x: &Vec3) -> Vec3 {
    (x - p * p.dot(x)).normalize()
}

/// Point at arc distance `arc` from `p`, rotated by `angle` (right-handed about
/// `p`) away from the unit tangent `reference`.
pub fn place(p: &Vec3, reference: &Vec3, arc: f64, angle: f64) -> Vec3 {
    let side = p.cross(reference);
    p * arc.cos() + (reference * angle.cos() + side * angle.sin()) * arc.sin()
}

/// Right-handed angle about `p` from the tangent `reference` to the tangent
/// pointing toward `x`, in `(-π, π]`.
pub fn position_angle(p: &Vec3, reference: &Vec3, x: &Vec3) -> f64 {
    let u = x - p * p.dot(x);
    wrap_angle(p.dot(&reference.cross(&u)).atan2(reference.dot(&u)))
}

/// Right-handed rotation angle about `axis` taking vector `from` to vector `to`
/// (both projected into the plane normal to `axis`), in `(-π, π]`.
pub fn signed_angle_about(axis: &Vec3, from: &Vec3, to: &Vec3) -> f64 {
    let a = axis.normalize();
    let u = from - a * a.dot(from);
    let v = to - a * a.dot(to);
    wrap_angle(a.dot(&u.cross(&v)).atan2(u.dot(&v)))
}

/// Wraps into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Edge directions `C_0, …, C_{n-1}`.
pub fn edge_directions(polygon: &SpatialPolygon) -> Result<Vec<SphericalPoint>> {
    (0..polygon.len())
        .map(|k| {
            let c = polygon.edge(k);
            SphericalPoint::from_vector(c).ok_or(Error::DegenerateEdge {
                index: k,
                length: c.norm(),
            })
        })
        .collect()
}

/// Spherical bar lengths `λ_k = arccos(C_k · C_{k+1})`, one per vertex.
pub fn bar_lengths(polygon: &SpatialPolygon) -> Result<Vec<f64>> {
    let dirs = edge_directions(polygon)?;
    let n = dirs.len();
    (0..n)
        .map(|k| {
            let a = dirs[k].as_vec();
            let b = dirs[(k + 1) % n].as_vec();
            let s = a.cross(&b).norm();
            if s <= 1e-12 {
                return Err(Error::DegenerateVertex { index: k });
            }
            Ok(s.atan2(a.dot(&b)))
        })
        .collect()
}

/// Torsion angles `τ_k ∈ (-π, π]`: the right-handed rotation about `c_k` taking
/// the plane `[V_{k-2}, V_{k-1}, V_k]` to `[V_{k-1}, V_k, V_{k+1}]`.
///
/// Evaluated through `atan2` of the sine and cosine of the angle between
/// consecutive binormals, which agrees with the arccos form signed by
/// `(c_{k-1} × c_k) · c_{k+1}` and stays well conditioned near 0 and π.
/// Planar configurations give exactly 0 or π.
pub fn torsion_angles(polygon: &SpatialPolygon) -> Result<Vec<f64>> {
    let n = polygon.len();
    (0..n)
        .map(|k| {
            let prev = polygon.edge(k + n - 1);
            let cur = polygon.edge(k);
            let next = polygon.edge(k + 1);
            let a = prev.cross(&cur);
            let b = cur.cross(&next);
            let (na, nb) = (a.norm(), b.norm());
            if na <= 1e-12 * prev.norm() * cur.norm() {
                return Err(Error::DegenerateVertex {
                    index: (k + n - 1) % n,
                });
            }
            if nb <= 1e-12 * cur.norm() * next.norm() {
                return Err(Error::DegenerateVertex { index: k });
            }
            let cos = a.dot(&b) / (na * nb);
            let o = a.dot(&next);
            let sin = o * cur.norm() / (na * nb);
            if sin.abs() <= 1e-14 {
                return Ok(if cos > 0.0 { 0.0 } else { PI });
            }
            Ok(wrap_angle(sin.atan2(cos)))
        })
        .collect()
}

/// Homogeneous half-tangent `(p, q)` standing for `tan(θ/2) = p/q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfTangent<T = f64> {
    pub p: T,
    pub q: T,
}

impl<T: Scalar> HalfTangent<T> {
    /// Rejects `(0, 0)`.
    pub fn new(p: T, q: T) -> Option<Self> {
        (p.modulus() > 0.0 || q.modulus() > 0.0).then_some(Self { p, q })
    }

    /// The affine value `t` as `(t, 1)`.
    pub fn from_value(t: T) -> Self {
        Self { p: t, q: T::one() }
    }

    /// `θ = π`.
    pub fn pole() -> Self {
        Self {
            p: T::one(),
            q: T::zero(),
        }
    }

    /// Affine value `p/q`, `None` at the pole.
    pub fn value(&self) -> Option<T> {
        (self.q.modulus() > 0.0).then(|| self.p / self.q)
    }

    /// `|p₁q₂ − p₂q₁|` for the representatives scaled to unit length.
    pub fn projective_distance(&self, other: &Self) -> f64 {
        let n1 = (self.p.modulus().powi(2) + self.q.modulus().powi(2)).sqrt();
        let n2 = (other.p.modulus().powi(2) + other.q.modulus().powi(2)).sqrt();
        (self.p * other.q - other.p * self.q).modulus() / (n1 * n2)
    }

    pub fn projectively_eq(&self, other: &Self, tol: f64) -> bool {
        self.projective_distance(other) < tol
    }
}

impl HalfTangent<f64> {
    /// Canonical representative `(sin θ/2, cos θ/2)`; `θ = π` gives `(1, 0)`.
    pub fn from_angle(theta: f64) -> Self {
        let t = wrap_angle(theta);
        if t == PI {
            return Self::pole();
        }
        let h = 0.5 * t;
        Self {
            p: h.sin(),
            q: h.cos(),
        }
    }

    /// Angle in `(-π, π]`.
    pub fn angle(&self) -> f64 {
        if self.q == 0.0 {
            return PI;
        }
        wrap_angle(2.0 * self.p.atan2(self.q))
    }

    /// Scales the representative to unit length.
    pub fn normalized(&self) -> Self {
        let n = self.p.hypot(self.q);
        Self {
            p: self.p / n,
            q: self.q / n,
        }
    }
}

pub fn angle_to_halftangent(theta: f64) -> HalfTangent {
    HalfTangent::from_angle(theta)
}

pub fn halftangent_to_angle(h: &HalfTangent) -> f64 {
    h.angle()
}
