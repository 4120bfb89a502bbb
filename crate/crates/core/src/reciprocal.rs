//! Reciprocal-parallel meshes of a realised block.
//!
//! One dual point per face and one dual edge per interior edge of the block,
//! each dual edge parallel to its partner. The dual point of the central face
//! is pinned at the origin; the remaining points and the edge multipliers `t`
//! solve `P_G − P_F − t·u = 0` for every hinge.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flexion::{Block3D, FlexionTrace, HingeKind};
use crate::sphkin::Vec3;

/// Relative singular value threshold for the nullspace.
pub const NULLSPACE_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualEdge {
    pub hinge: usize,
    pub faces: [usize; 2],
    /// Signed multiple of the unit hinge direction.
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalMesh {
    /// Indexed like the block's faces.
    pub points: Vec<Vec3>,
    pub edges: Vec<DualEdge>,
    /// Hinge whose dual edge has unit length.
    pub unit_hinge: usize,
    /// Solution dimension including translations.
    pub dimension: usize,
    pub singular_values: Vec<f64>,
}

impl ReciprocalMesh {
    pub fn edge_vector(&self, k: usize) -> Vec3 {
        let e = &self.edges[k];
        self.points[e.faces[1]] - self.points[e.faces[0]]
    }

    /// Largest angle between a dual edge and its partner in `block`.
    pub fn parallelism_error(&self, block: &Block3D) -> f64 {
        (0..self.edges.len())
            .map(|k| {
                let u = block.hinge_direction(self.edges[k].hinge);
                let d = self.edge_vector(k);
                d.cross(&u).norm().atan2(d.dot(&u).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Dual faces: the cycle of faces around each polygon vertex.
    pub fn faces(&self, block: &Block3D) -> Vec<Vec<usize>> {
        let n = block.n;
        (0..n)
            .map(|i| vec![0, 1 + i, 1 + n + i, 1 + (i + n - 1) % n])
            .collect()
    }

    /// Angles between pairs of dual edges sharing a dual point, in a fixed order.
    pub fn star_angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in 0..self.points.len() {
            let incident: Vec<Vec3> = self
                .edges
                .iter()
                .enumerate()
                .filter_map(|(k, e)| {
                    if e.faces[0] == p {
                        Some(self.edge_vector(k))
                    } else if e.faces[1] == p {
                        Some(-self.edge_vector(k))
                    } else {
                        None
                    }
                })
                .collect();
            for i in 0..incident.len() {
                for j in i + 1..incident.len() {
                    let (a, b) = (incident[i], incident[j]);
                    out.push(a.cross(&b).norm().atan2(a.dot(&b)));
                }
            }
        }
        out
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.edges.len())
            .map(|k| self.edge_vector(k).norm())
            .collect()
    }
}

struct Nullspace {
    dimension: usize,
    basis: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
}

/// Nodes joined by links `x_j − x_i = t·u`, node 0 pinned at the origin.
/// Unknowns are the free node positions followed by the link multipliers.
fn parallelism_nullspace(nodes: usize, links: &[(usize, usize, Vec3)]) -> Nullspace {
    let free = nodes - 1;
    let cols = 3 * free + links.len();
    let mut m = DMatrix::<f64>::zeros(3 * links.len(), cols);
    for (k, &(i, j, u)) in links.iter().enumerate() {
        for axis in 0..3 {
            let row = 3 * k + axis;
            for (node, sign) in [(j, 1.0), (i, -1.0)] {
                if node > 0 {
                    m[(row, 3 * (node - 1) + axis)] += sign;
                }
            }
            m[(row, 3 * free + k)] = -u[axis];
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = svd.singular_values;
    let largest = sigma.max();
    let null: Vec<usize> = (0..sigma.len())
        .filter(|&k| sigma[k] <= NULLSPACE_THRESHOLD * largest)
        .collect();
    // a wide system has more columns than singular values
    let missing = cols.saturating_sub(sigma.len());
    let mut singular_values: Vec<f64> = sigma.iter().copied().collect();
    singular_values.sort_by(f64::total_cmp);
    Nullspace {
        dimension: 3 + null.len() + missing,
        basis: null
            .iter()
            .map(|&k| v_t.row(k).iter().copied().collect())
            .collect(),
        singular_values,
    }
}

/// Solves the parallelism system of `block`, normalised to unit length on the
/// dual of the central edge `V_{n-1} V_0`.
pub fn reciprocal_parallel(block: &Block3D) -> Result<ReciprocalMesh> {
    let faces = block.faces.len();
    let free = faces - 1;
    let links: Vec<(usize, usize, Vec3)> = block
        .hinges
        .iter()
        .enumerate()
        .map(|(h, hinge)| (hinge.faces[0], hinge.faces[1], block.hinge_direction(h)))
        .collect();
    let Nullspace {
        dimension,
        basis,
        singular_values,
    } = parallelism_nullspace(faces, &links);
    match dimension {
        3 => return Err(Error::NoNontrivialSolution { dimension }),
        4 if basis.len() == 1 => {}
        _ => return Err(Error::AmbiguousSolution { dimension }),
    }
    let x = &basis[0];
    let unit_hinge = block
        .hinge_index(HingeKind::Central(block.n - 1))
        .ok_or_else(|| Error::Precondition("block has no central edge".into()))?;
    let t0 = x[3 * free + unit_hinge];
    if t0.abs() <= NULLSPACE_THRESHOLD * x.iter().fold(0.0f64, |a, v| a.max(v.abs())) {
        return Err(Error::DegenerateDenominator("normalising dual edge"));
    }
    let scale = 1.0 / t0;
    let mut points = vec![Vec3::zeros()];
    points.extend((0..free).map(|k| Vec3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]) * scale));
    let edges = block
        .hinges
        .iter()
        .enumerate()
        .map(|(h, hinge)| DualEdge {
            hinge: h,
            faces: hinge.faces,
            t: x[3 * free + h] * scale,
        })
        .collect();
    Ok(ReciprocalMesh {
        points,
        edges,
        unit_hinge,
        dimension,
        singular_values,
    })
}

/// Solution dimension (translations included) of the meshes reciprocal-parallel
/// to `mesh` itself. Its faces are the cycles around the polygon vertices and
/// its interior edges are the duals of the central edges, so this counts the
/// closed polygons with edges parallel to the central polygon.
pub fn second_reciprocal_dimension(mesh: &ReciprocalMesh, block: &Block3D) -> usize {
    let n = block.n;
    let links: Vec<(usize, usize, Vec3)> = (0..n)
        .map(|i| {
            let h = block
                .hinge_index(HingeKind::Central(i))
                .expect("central hinge");
            let k = mesh
                .edges
                .iter()
                .position(|e| e.hinge == h)
                .expect("dual edge");
            (i, (i + 1) % n, mesh.edge_vector(k).normalize())
        })
        .collect();
    parallelism_nullspace(n, &links).dimension
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylindricalReport {
    pub samples: usize,
    /// Largest change of a dual star angle against the first sample.
    pub star_angle_deviation: f64,
    /// Largest angle between a dual edge and its partner over all samples.
    pub parallelism: f64,
    /// `(min, max)` length of every dual edge over the sweep.
    pub length_ranges: Vec<(f64, f64)>,
    pub meshes: Vec<ReciprocalMesh>,
}

impl CylindricalReport {
    pub fn passed(&self, star_tol: f64, parallel_tol: f64) -> bool {
        self.star_angle_deviation < star_tol && self.parallelism < parallel_tol
    }
}

/// Reciprocal meshes along a sweep: rigid dual stars, parallel edges and the
/// sliding of the unnormalised edges.
pub fn verify_cylindrical_deformation(trace: &FlexionTrace) -> Result<CylindricalReport> {
    let meshes = trace
        .samples
        .iter()
        .map(|s| reciprocal_parallel(&s.block))
        .collect::<Result<Vec<_>>>()?;
    let first_angles = meshes
        .first()
        .map(ReciprocalMesh::star_angles)
        .unwrap_or_default();
    let mut star_angle_deviation: f64 = 0.0;
    let mut parallelism: f64 = 0.0;
    let edges = meshes.first().map_or(0, |m| m.edges.len());
    let mut length_ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); edges];
    for (mesh, sample) in meshes.iter().zip(&trace.samples) {
        for (a, b) in mesh.star_angles().iter().zip(&first_angles) {
            star_angle_deviation = star_angle_deviation.max((a - b).abs());
        }
        parallelism = parallelism.max(mesh.parallelism_error(&sample.block));
        for (range, l) in length_ranges.iter_mut().zip(mesh.edge_lengths()) {
            *range = (range.0.min(l), range.1.max(l));
        }
    }
    Ok(CylindricalReport {
        samples: meshes.len(),
        star_angle_deviation,
        parallelism,
        length_ranges,
        meshes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flexion::{
        auto_samples, configure_spherical, default_templates, flex_sweep, lift_to_3d, OuterLengths,
    };
    use crate::isogram::Branch;
    use crate::sphkin::{HalfTangent, SpatialPolygon};
    use crate::tol::Tolerances;
    use crate::vhedra::{build_block, VHedraInput};
    use crate::BlockParameters;

    fn example() -> BlockParameters {
        let polygon = SpatialPolygon::from_points(
            &[
                [5.0, 0.0, 0.0],
                [4.0, 3.0, 0.0],
                [1.0, 2.0, 2.0],
                [0.0, 0.0, 0.0],
            ],
            1e-10,
        )
        .unwrap();
        build_block(
            &VHedraInput::with_d(polygon, [0.3, 0.15, 0.2, 0.25], 100.0),
            &Tolerances::default(),
        )
        .unwrap()
    }

    fn lifted(block: &BlockParameters, alpha: f64) -> Block3D {
        let cfg = configure_spherical(
            block,
            HalfTangent::from_angle(alpha),
            &Tolerances::default(),
        )
        .unwrap();
        let lengths = OuterLengths::uniform(block.n(), 1.0);
        lift_to_3d(
            block,
            &cfg,
            &lengths,
            &default_templates(block, &lengths).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn example_block_has_unique_mesh() {
        let block = lifted(&example(), 0.7);
        let mesh = reciprocal_parallel(&block).unwrap();
        assert_eq!(mesh.dimension, 4);
        assert!(mesh.parallelism_error(&block) < 1e-8);
        assert!((mesh.edge_vector(mesh.unit_hinge).norm() - 1.0).abs() < 1e-12);
        assert_eq!(mesh.points.len(), 9);
        assert_eq!(mesh.edges.len(), 12);
        // every dual face closes around its polygon vertex
        for face in mesh.faces(&block) {
            for w in 0..4 {
                let (f, g) = (face[w], face[(w + 1) % 4]);
                assert!(mesh
                    .edges
                    .iter()
                    .any(|e| e.faces == [f, g] || e.faces == [g, f]));
            }
        }
    }

    #[test]
    fn scaling_the_block_leaves_the_mesh() {
        let block = lifted(&example(), -0.4);
        let mut scaled = block.clone();
        for p in &mut scaled.points {
            *p *= 3.5;
        }
        let (a, b) = (
            reciprocal_parallel(&block).unwrap(),
            reciprocal_parallel(&scaled).unwrap(),
        );
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn perturbed_block_is_rigid() {
        let mut block = lifted(&example(), 0.7);
        block.points[5] += Vec3::new(0.05, -0.03, 0.02);
        assert!(matches!(
            reciprocal_parallel(&block),
            Err(Error::NoNontrivialSolution { dimension: 3 })
        ));
    }

    #[test]
    fn planar_block_dual_is_unique_but_its_reciprocal_is_not() {
        let polygon = SpatialPolygon::from_points(
            &[
                [0.0, 0.0, 0.0],
                [4.0, 0.0, 0.0],
                [5.0, 3.0, 0.0],
                [1.0, 2.5, 0.0],
            ],
            1e-10,
        )
        .unwrap();
        let input = VHedraInput::with_f(
            polygon,
            [0.5, 0.8, 1.6, 1.5625],
            [Branch::Minus, Branch::Minus, Branch::Plus, Branch::Plus],
            0.0,
        );
        let block = lifted(&build_block(&input, &Tolerances::default()).unwrap(), 0.5);
        let mesh = reciprocal_parallel(&block).unwrap();
        assert_eq!(mesh.dimension, 4);
        assert!(mesh.parallelism_error(&block) < 1e-8);
        assert_eq!(second_reciprocal_dimension(&mesh, &block), 5);
    }

    #[test]
    fn skew_block_second_reciprocal_is_unique() {
        let block = lifted(&example(), 0.7);
        let mesh = reciprocal_parallel(&block).unwrap();
        assert_eq!(second_reciprocal_dimension(&mesh, &block), 4);
    }

    #[test]
    fn example_sweep_has_rigid_stars() {
        let block = example();
        let tol = Tolerances::default();
        let trace = flex_sweep(
            &block,
            &auto_samples(&block, 20).unwrap(),
            &OuterLengths::uniform(4, 1.0),
            None,
            &tol,
        )
        .unwrap();
        let report = verify_cylindrical_deformation(&trace).unwrap();
        assert!(
            report.star_angle_deviation < 1e-7,
            "{}",
            report.star_angle_deviation
        );
        assert!(report.parallelism < 1e-8, "{}", report.parallelism);
        let unit = report.meshes[0].unit_hinge;
        assert!((report.length_ranges[unit].1 - report.length_ranges[unit].0).abs() < 1e-12);
        assert!(report.length_ranges.iter().any(|(lo, hi)| hi - lo > 1e-3));
    }

    #[test]
    fn single_sample_is_vacuous() {
        let block = example();
        let trace = flex_sweep(
            &block,
            &[0.1],
            &OuterLengths::uniform(4, 1.0),
            None,
            &Tolerances::default(),
        )
        .unwrap();
        let report = verify_cylindrical_deformation(&trace).unwrap();
        assert_eq!(report.star_angle_deviation, 0.0);
        assert!(report.passed(1e-7, 1e-8));
    }
}
