//! Per-vertex parameters of a concrete belt over a rigid polygon.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::closure::BeltSpec;
use crate::error::{Error, Result};
use crate::isogram::{transmission_ratio, Branch, IsogramGeometry};
use crate::sphkin::{
    bar_lengths, edge_directions, torsion_angles, wrap_angle, SpatialPolygon, SphericalPoint,
};

/// Angle data at vertex `V_i`.
///
/// Starred angles are planar face angles, unstarred ones the spherical bar
/// lengths `π − angle*`. `tau`, `epsilon`, `zeta` and `e` belong to the
/// direction `C_i` (the edge arriving at `V_i`): `ε_i` is the offset between
/// `β_{i-1}` and `α_i`, and `ζ_i = ε_i + τ_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexGeometry {
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub zeta: f64,
    pub branch: Branch,
    pub f: f64,
    pub e: f64,
}

impl VertexGeometry {
    pub fn lambda_star(&self) -> f64 {
        PI - self.lambda
    }
    pub fn mu_star(&self) -> f64 {
        PI - self.mu
    }
    pub fn delta_star(&self) -> f64 {
        PI - self.delta
    }
    pub fn gamma_star(&self) -> f64 {
        PI - self.gamma
    }
    /// `tan(δ/2)`.
    pub fn d(&self) -> f64 {
        (0.5 * self.delta).tan()
    }
}

/// Everything needed to configure and lift a type-(1) isogonal belt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockParameters {
    pub polygon: SpatialPolygon,
    pub vertices: Vec<VertexGeometry>,
}

impl BlockParameters {
    /// Builds the parameter set from the polygon, per-vertex crank lengths `δ`,
    /// branches and offset half-tangents `e` (γ = δ and μ = λ).
    pub fn from_belt(
        polygon: SpatialPolygon,
        delta: &[f64],
        branch: &[Branch],
        e: &[f64],
        tol: f64,
    ) -> Result<Self> {
        let n = polygon.len();
        if delta.len() != n || branch.len() != n || e.len() != n {
            return Err(Error::Precondition(format!(
                "expected {n} values for delta, branch and e, got {}, {}, {}",
                delta.len(),
                branch.len(),
                e.len()
            )));
        }
        let lambda = bar_lengths(&polygon)?;
        let tau = torsion_angles(&polygon)?;
        let vertices = (0..n)
            .map(|i| {
                let geom = IsogramGeometry::new(delta[i], lambda[i], branch[i], tol)?;
                let f = transmission_ratio(&geom)?.value();
                if !e[i].is_finite() {
                    return Err(Error::PoleNotRepresentable);
                }
                let epsilon = 2.0 * e[i].atan();
                Ok(VertexGeometry {
                    lambda: lambda[i],
                    mu: lambda[i],
                    delta: delta[i],
                    gamma: delta[i],
                    tau: tau[i],
                    epsilon,
                    zeta: wrap_angle(epsilon + tau[i]),
                    branch: branch[i],
                    f,
                    e: e[i],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { polygon, vertices })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn f(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.f).collect()
    }

    pub fn e(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.e).collect()
    }

    pub fn belt(&self) -> Result<BeltSpec<f64>> {
        BeltSpec::new(self.f(), self.e())
    }

    pub fn directions(&self) -> Result<Vec<SphericalPoint>> {
        edge_directions(&self.polygon)
    }

    /// True when every vertex satisfies `λ = μ` and `δ = γ` exactly.
    pub fn is_type1(&self) -> bool {
        self.vertices
            .iter()
            .all(|v| v.lambda == v.mu && v.delta == v.gamma)
    }
}
