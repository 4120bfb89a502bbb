//! Continuous-flexible Kokotsakis belts of the isogonal type with skew faces.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphkin`]: polygon edge directions, spherical bar lengths, torsion angles
//!   and the homogeneous half-tangent parameterisation of angles.
//! * [`isogram`]: spherical isogram transmission `b = f·a`, recovery of the
//!   crank length from `f`, and a direct spherical four-bar oracle.
//! * [`closure`]: Möbius composition of a belt, the closure quadratic, the
//!   flexibility test, antipode normalisation and a complex Newton solver.
//! * [`vhedra`]: the `n = 4` closed forms and the (3×3) block constructor.
//! * [`flexion`]: spherical configurations, 3D lifting, flexion sweeps and the
//!   `n = 3` (6R) specialisation.
//! * [`reciprocal`]: the reciprocal-parallel dual mesh of a block.
//! * [`io`]: JSON problem/report files and OBJ export.

pub mod belt;
pub mod closure;
pub mod error;
pub mod flexion;
pub mod io;
pub mod isogram;
pub mod reciprocal;
pub mod scalar;
pub mod sphkin;
pub mod tol;
pub mod vhedra;

pub use belt::{BlockParameters, VertexGeometry};
pub use closure::{BeltSpec, ClosureQuadratic, FlexibilityReport, MobiusMap};
pub use error::{Error, Result};
pub use flexion::{Block3D, FlexionTrace, SphericalConfig};
pub use isogram::{Branch, IsogramGeometry, TransmissionRatio};
pub use num_complex::Complex64;
pub use reciprocal::{CylindricalReport, ReciprocalMesh};
pub use scalar::Scalar;
pub use sphkin::{HalfTangent, SpatialPolygon, SphericalPoint, Vec3};
pub use tol::Tolerances;
pub use vhedra::{SolutionSign, VHedraInput, VHedraSolution};
