//! Spherical configurations, 3D realisation of a block and flexion sweeps.
//!
//! Point layout of a [`Block3D`] over an `n`-gon: `V_i = i`, outer A point
//! `n + i`, outer B point `2n + i`, fourth corner point `3n + i`. The outer A
//! point is `V_i + ℓ·A_i` and the outer B point `V_i − ℓ·B_i`, so that face
//! angles at `V_i` are `π` minus the spherical bar lengths.

use std::f64::consts::PI;

use nalgebra::{Isometry3, Rotation3, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::belt::BlockParameters;
use crate::closure::{
    is_flexible, offset_from_zeta, solve_offsets, step_map, BeltSpec, OffsetSolution,
};
use crate::error::{Error, Result};
use crate::isogram::{
    four_bar_candidates, recover_delta, transmission_ratio, transmit, Branch, IsogramGeometry,
    TransmissionRatio,
};
use crate::sphkin::{
    arc_between, place, signed_angle_about, tangent_toward, wrap_angle, HalfTangent,
    SpatialPolygon, Vec3,
};
use crate::tol::Tolerances;

/// Spherical image of a belt at one driving value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalConfig {
    pub driving: HalfTangent,
    /// Unit vectors `C_i`, `A_i`, `B_i`.
    pub c: Vec<Vec3>,
    pub a: Vec<Vec3>,
    pub b: Vec<Vec3>,
    /// `a_0, …, a_n`.
    pub a_chain: Vec<HalfTangent>,
    /// `b_0, …, b_{n-1}`.
    pub b_chain: Vec<HalfTangent>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Worst bar-length residual per vertex.
    pub arc_residual: Vec<f64>,
    /// Projective distance between `a_n` and `a_0`.
    pub closure_residual: f64,
}

impl SphericalConfig {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// `ζ_i` measured at `C_i` from the arc toward `B_{i-1}` to the arc toward `A_i`.
    pub fn measured_zeta(&self, i: usize) -> f64 {
        let n = self.n();
        let ci = self.c[i];
        let prev_b = self.b[(i + n - 1) % n];
        signed_angle_about(
            &ci,
            &tangent_toward(&ci, &prev_b),
            &tangent_toward(&ci, &self.a[i]),
        )
    }
}

fn toward_next(c: &[Vec3], i: usize) -> Vec3 {
    tangent_toward(&c[i], &c[(i + 1) % c.len()])
}

fn continuation(c: &[Vec3], i: usize) -> Vec3 {
    let j = (i + 1) % c.len();
    -tangent_toward(&c[j], &c[i])
}

/// Places `A_i`, `B_i` from the transmission chain started at `a0`.
pub fn configure_spherical(
    block: &BlockParameters,
    a0: HalfTangent,
    tol: &Tolerances,
) -> Result<SphericalConfig> {
    let n = block.n();
    let c: Vec<Vec3> = block.directions()?.iter().map(|p| p.as_vec()).collect();
    let mut a_chain = vec![a0.normalized()];
    let mut b_chain = Vec::with_capacity(n);
    for (i, v) in block.vertices.iter().enumerate() {
        let b = transmit(v.f, a_chain[i]).normalized();
        b_chain.push(b);
        let next_e = block.vertices[(i + 1) % n].e;
        a_chain.push(step_map(1.0, next_e).apply(b).normalized());
    }
    let alpha: Vec<f64> = a_chain[..n].iter().map(HalfTangent::angle).collect();
    let beta: Vec<f64> = b_chain.iter().map(HalfTangent::angle).collect();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut arc_residual = Vec::with_capacity(n);
    for (i, v) in block.vertices.iter().enumerate() {
        let j = (i + 1) % n;
        let ai = place(&c[i], &toward_next(&c, i), v.gamma, alpha[i]);
        let bi = place(&c[j], &continuation(&c, i), v.delta, beta[i]);
        let residual = [
            arc_between(&c[i], &ai) - v.gamma,
            arc_between(&c[j], &bi) - v.delta,
            arc_between(&ai, &bi) - v.mu,
        ]
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
        a.push(ai);
        b.push(bi);
        arc_residual.push(residual);
    }
    let closure_residual = a_chain[n].projective_distance(&a_chain[0]);
    let (vertex, arc) = arc_residual
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, 0.0),
            |best, (i, r)| if r > best.1 { (i, r) } else { best },
        );
    if closure_residual > tol.alg || arc > tol.rigid {
        return Err(Error::ClosureViolation {
            closure: closure_residual,
            arc,
            vertex,
        });
    }
    Ok(SphericalConfig {
        driving: a0,
        c,
        a,
        b,
        a_chain,
        b_chain,
        alpha,
        beta,
        arc_residual,
        closure_residual,
    })
}

/// Lengths of the outer edges along `A_i` and `B_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterLengths {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl OuterLengths {
    pub fn uniform(n: usize, length: f64) -> Self {
        Self {
            a: vec![length; n],
            b: vec![length; n],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.a.len() != n || self.b.len() != n {
            return Err(Error::Precondition(format!(
                "expected {n} outer lengths per side"
            )));
        }
        match self
            .a
            .iter()
            .chain(&self.b)
            .find(|l| !(**l > 0.0 && l.is_finite()))
        {
            Some(&bad) => Err(Error::InvalidLength(bad)),
            None => Ok(()),
        }
    }
}

/// Shape of the corner face at `V_i`: its two edge lengths, the angle between
/// them and the fourth vertex in the frame spanned by the two edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerTemplate {
    pub len_a: f64,
    pub len_b: f64,
    pub angle: f64,
    pub local: Vec3,
}

impl CornerTemplate {
    /// Planar parallelogram completion.
    pub fn parallelogram(len_a: f64, len_b: f64, angle: f64) -> Self {
        let local = Vec3::new(len_a + len_b * angle.cos(), len_b * angle.sin(), 0.0);
        Self {
            len_a,
            len_b,
            angle,
            local,
        }
    }
}

/// Orthonormal frame at `V_i` from the two corner edge directions.
fn corner_frame(edge_a: &Vec3, edge_b: &Vec3) -> [Vec3; 3] {
    let e1 = edge_a.normalize();
    let e2 = (edge_b - e1 * e1.dot(edge_b)).normalize();
    [e1, e2, e1.cross(&e2)]
}

/// Templates read off the configuration `cfg`, completing each corner to a parallelogram.
pub fn capture_templates(
    block: &BlockParameters,
    cfg: &SphericalConfig,
    lengths: &OuterLengths,
) -> Result<Vec<CornerTemplate>> {
    lengths.validate(block.n())?;
    Ok((0..block.n())
        .map(|i| {
            let (ea, eb) = (cfg.a[i] * lengths.a[i], -cfg.b[i] * lengths.b[i]);
            let angle = arc_between(&ea, &eb);
            let [e1, e2, e3] = corner_frame(&ea, &eb);
            let k = ea + eb;
            CornerTemplate {
                len_a: lengths.a[i],
                len_b: lengths.b[i],
                angle,
                local: Vec3::new(k.dot(&e1), k.dot(&e2), k.dot(&e3)),
            }
        })
        .collect())
}

pub fn default_templates(
    block: &BlockParameters,
    lengths: &OuterLengths,
) -> Result<Vec<CornerTemplate>> {
    lengths.validate(block.n())?;
    Ok(block
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| CornerTemplate::parallelogram(lengths.a[i], lengths.b[i], v.mu_star()))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceKind {
    Central,
    Side(usize),
    Corner(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub kind: FaceKind,
    pub vertices: Vec<usize>,
}

/// An interior edge of the block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HingeKind {
    /// `V_i V_{i+1}`, between the central and the side face.
    Central(usize),
    /// Outer A edge at `V_i`, between side face `i-1` and corner `i`.
    OuterA(usize),
    /// Outer B edge at `V_i`, between side face `i` and corner `i`.
    OuterB(usize),
}

/// Interior edge `origin → end` shared by `faces[0]` and `faces[1]`. The
/// dihedral angle is measured right-handed about the edge from `wings[0]`
/// (a vertex of the first face) to `wings[1]` (a vertex of the second).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hinge {
    pub kind: HingeKind,
    pub faces: [usize; 2],
    pub origin: usize,
    pub end: usize,
    pub wings: [usize; 2],
}

/// A realised block: the central polygon, `n` side faces and `n` corner faces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block3D {
    pub n: usize,
    pub points: Vec<Vec3>,
    pub faces: Vec<Face>,
    pub hinges: Vec<Hinge>,
}

impl Block3D {
    fn topology(n: usize) -> (Vec<Face>, Vec<Hinge>) {
        let (oa, ob, k) = (|i: usize| n + i, |i: usize| 2 * n + i, |i: usize| 3 * n + i);
        let next = |i: usize| (i + 1) % n;
        let prev = |i: usize| (i + n - 1) % n;
        let mut faces = vec![Face {
            kind: FaceKind::Central,
            vertices: (0..n).collect(),
        }];
        faces.extend((0..n).map(|i| Face {
            kind: FaceKind::Side(i),
            vertices: vec![ob(i), i, next(i), oa(next(i))],
        }));
        faces.extend((0..n).map(|i| Face {
            kind: FaceKind::Corner(i),
            vertices: vec![oa(i), i, ob(i), k(i)],
        }));
        let side = |i: usize| 1 + i;
        let corner = |i: usize| 1 + n + i;
        let mut hinges: Vec<Hinge> = (0..n)
            .map(|i| Hinge {
                kind: HingeKind::Central(i),
                faces: [0, side(i)],
                origin: i,
                end: next(i),
                wings: [prev(i), ob(i)],
            })
            .collect();
        hinges.extend((0..n).map(|i| Hinge {
            kind: HingeKind::OuterA(i),
            faces: [side(prev(i)), corner(i)],
            origin: i,
            end: oa(i),
            wings: [prev(i), ob(i)],
        }));
        hinges.extend((0..n).map(|i| Hinge {
            kind: HingeKind::OuterB(i),
            faces: [side(i), corner(i)],
            origin: i,
            end: ob(i),
            wings: [next(i), oa(i)],
        }));
        (faces, hinges)
    }

    pub fn face_points(&self, face: usize) -> Vec<Vec3> {
        self.faces[face]
            .vertices
            .iter()
            .map(|&k| self.points[k])
            .collect()
    }

    /// The six (for quads) pairwise distances of a face's vertices.
    pub fn distances(&self, face: usize) -> Vec<f64> {
        let p = self.face_points(face);
        let mut d = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d.push((p[i] - p[j]).norm());
            }
        }
        d
    }

    pub fn hinge_direction(&self, h: usize) -> Vec3 {
        let hinge = &self.hinges[h];
        (self.points[hinge.end] - self.points[hinge.origin]).normalize()
    }

    pub fn dihedral(&self, h: usize) -> f64 {
        let hinge = &self.hinges[h];
        let o = self.points[hinge.origin];
        signed_angle_about(
            &(self.points[hinge.end] - o),
            &(self.points[hinge.wings[0]] - o),
            &(self.points[hinge.wings[1]] - o),
        )
    }

    pub fn dihedrals(&self) -> Vec<f64> {
        (0..self.hinges.len()).map(|h| self.dihedral(h)).collect()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    pub fn hinge_index(&self, kind: HingeKind) -> Option<usize> {
        self.hinges.iter().position(|h| h.kind == kind)
    }

    /// Every hinge's end points belong to both of its faces.
    pub fn is_consistent(&self) -> bool {
        self.hinges.iter().all(|h| {
            h.faces.iter().all(|&f| {
                let v = &self.faces[f].vertices;
                v.contains(&h.origin) && v.contains(&h.end)
            }) && self.faces[h.faces[0]].vertices.contains(&h.wings[0])
                && self.faces[h.faces[1]].vertices.contains(&h.wings[1])
        })
    }
}

/// Realises the faces of a block at the configuration `cfg`.
pub fn lift_to_3d(
    block: &BlockParameters,
    cfg: &SphericalConfig,
    lengths: &OuterLengths,
    templates: &[CornerTemplate],
) -> Result<Block3D> {
    let n = block.n();
    lengths.validate(n)?;
    if templates.len() != n {
        return Err(Error::Precondition(format!(
            "expected {n} corner templates"
        )));
    }
    let v = block.polygon.vertices();
    let mut points: Vec<Vec3> = v.to_vec();
    points.extend((0..n).map(|i| v[i] + cfg.a[i] * lengths.a[i]));
    points.extend((0..n).map(|i| v[i] - cfg.b[i] * lengths.b[i]));
    for (i, t) in templates.iter().enumerate() {
        let geom = &block.vertices[i];
        let inconsistent = |reason: String| Error::InconsistentTemplate { vertex: i, reason };
        if (t.len_a - lengths.a[i]).abs() > 1e-12 * lengths.a[i]
            || (t.len_b - lengths.b[i]).abs() > 1e-12 * lengths.b[i]
        {
            return Err(inconsistent(format!(
                "template lengths ({}, {}) differ from outer lengths ({}, {})",
                t.len_a, t.len_b, lengths.a[i], lengths.b[i]
            )));
        }
        if (t.angle - geom.mu_star()).abs() > 1e-9 {
            return Err(inconsistent(format!(
                "template angle {} differs from face angle {}",
                t.angle,
                geom.mu_star()
            )));
        }
        let [e1, e2, e3] = corner_frame(&cfg.a[i], &-cfg.b[i]);
        points.push(v[i] + e1 * t.local.x + e2 * t.local.y + e3 * t.local.z);
    }
    let (faces, hinges) = Block3D::topology(n);
    Ok(Block3D {
        n,
        points,
        faces,
        hinges,
    })
}

/// The real-branch condition at driving angle `alpha0`: every spherical
/// four-bar along the chain closes with the block's bar lengths.
pub fn is_assemblable(block: &BlockParameters, alpha0: f64) -> Result<bool> {
    let n = block.n();
    let c: Vec<Vec3> = block.directions()?.iter().map(|p| p.as_vec()).collect();
    let mut a = HalfTangent::from_angle(alpha0);
    for (i, v) in block.vertices.iter().enumerate() {
        let j = (i + 1) % n;
        let ai = place(&c[i], &toward_next(&c, i), v.gamma, a.angle());
        if four_bar_candidates(&c[j], &continuation(&c, i), &ai, v.delta, v.mu).is_err() {
            return Ok(false);
        }
        let b = transmit(v.f, a).normalized();
        a = step_map(1.0, block.vertices[j].e).apply(b).normalized();
    }
    Ok(true)
}

const RANGE_GRID: usize = 720;

/// Maximal driving intervals on which the block assembles, endpoints refined
/// by bisection. The full circle is reported as `(-π, π)`. Each interval
/// starts in `[-π, π)` and may run past `π`.
pub fn admissible_intervals(block: &BlockParameters) -> Result<Vec<(f64, f64)>> {
    let grid: Vec<f64> = (0..RANGE_GRID)
        .map(|k| -PI + 2.0 * PI * k as f64 / RANGE_GRID as f64)
        .collect();
    let ok = grid
        .iter()
        .map(|&t| is_assemblable(block, t))
        .collect::<Result<Vec<_>>>()?;
    if ok.iter().all(|&x| x) {
        return Ok(vec![(-PI, PI)]);
    }
    if !ok.iter().any(|&x| x) {
        return Ok(Vec::new());
    }
    let refine = |inside: f64, outside: f64| -> Result<f64> {
        let (mut lo, mut hi) = (inside, outside);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if is_assemblable(block, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    };
    let step = 2.0 * PI / RANGE_GRID as f64;
    // rotate so that the scan starts at an infeasible grid point
    let start = ok.iter().position(|&x| !x).expect("some infeasible point");
    let mut intervals = Vec::new();
    let mut k = 0;
    while k < RANGE_GRID {
        let idx = (start + k) % RANGE_GRID;
        if !ok[idx] {
            k += 1;
            continue;
        }
        let first = start + k;
        while k < RANGE_GRID && ok[(start + k) % RANGE_GRID] {
            k += 1;
        }
        let last = start + k - 1;
        let lo_in = grid[0] + first as f64 * step;
        let hi_in = grid[0] + last as f64 * step;
        let lo = refine(lo_in, lo_in - step)?;
        let hi = refine(hi_in, hi_in + step)?;
        let shift = if lo > PI { -2.0 * PI } else { 0.0 };
        intervals.push((lo + shift, hi + shift));
    }
    Ok(intervals)
}

/// Whether `angle` lies in one of `intervals` (modulo 2π).
pub fn in_intervals(angle: f64, intervals: &[(f64, f64)]) -> bool {
    intervals.iter().any(|&(lo, hi)| {
        let t = lo + (angle - lo).rem_euclid(2.0 * PI);
        t <= hi
    })
}

/// `count` driving angles spread over the longest admissible interval,
/// avoiding its end points.
pub fn auto_samples(block: &BlockParameters, count: usize) -> Result<Vec<f64>> {
    let intervals = admissible_intervals(block)?;
    let (lo, hi) = intervals
        .iter()
        .copied()
        .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
        .ok_or_else(|| Error::Precondition("the block admits no real configuration".into()))?;
    Ok((0..count)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / count as f64)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub driving: f64,
    pub config: SphericalConfig,
    pub block: Block3D,
    pub dihedral: Vec<f64>,
    /// Unwrapped change of each dihedral angle since the first sample.
    pub rotation: Vec<f64>,
}

/// Worst deviations found along a sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepChecks {
    /// Face distance deviation relative to the block diameter.
    pub rigidity: f64,
    pub loop_rotation: f64,
    /// Relative to the block diameter.
    pub loop_translation: f64,
    pub chain_closure: f64,
    pub arc_residual: f64,
    /// `|θ|` spread over each triple (outer A at `V_i`, `V_iV_{i+1}`, outer B at `V_{i+1}`).
    pub triple: f64,
    /// The same spread restricted to the two polyline families (even `n` only).
    pub u_polylines: Option<f64>,
    pub v_polylines: Option<f64>,
    /// Dihedral angles of central edges against the spherical angles.
    pub consistency: f64,
    /// Measured `ζ_i` against the block's values.
    pub zeta: f64,
    /// Largest dihedral change between neighbouring samples.
    pub max_jump: f64,
}

impl SweepChecks {
    pub fn rigid(&self, tol: &Tolerances) -> bool {
        self.rigidity < tol.rigid
    }

    pub fn closed(&self, tol: &Tolerances) -> bool {
        self.loop_rotation < tol.alg
            && self.loop_translation < tol.alg
            && self.chain_closure < tol.alg
    }

    pub fn rotation_properties(&self, tol: &Tolerances) -> bool {
        self.triple < tol.rigid
            && self.u_polylines.is_none_or(|x| x < tol.rigid)
            && self.v_polylines.is_none_or(|x| x < tol.rigid)
    }

    pub fn continuous(&self) -> bool {
        self.max_jump <= 0.5 * PI
    }

    pub fn passed(&self, tol: &Tolerances) -> bool {
        self.rigid(tol)
            && self.closed(tol)
            && self.rotation_properties(tol)
            && self.consistency < tol.rigid
            && self.zeta < tol.rigid
            && self.arc_residual < tol.rigid
            && self.continuous()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlexionTrace {
    pub hinges: Vec<HingeKind>,
    pub samples: Vec<TraceSample>,
    pub intervals: Vec<(f64, f64)>,
    pub checks: SweepChecks,
}

/// Configures and lifts the block at each driving angle and checks the
/// flexion invariants along the way.
pub fn flex_sweep(
    block: &BlockParameters,
    samples: &[f64],
    lengths: &OuterLengths,
    templates: Option<&[CornerTemplate]>,
    tol: &Tolerances,
) -> Result<FlexionTrace> {
    if samples.is_empty() {
        return Err(Error::Precondition(
            "a sweep needs at least one sample".into(),
        ));
    }
    let residual = is_flexible(&block.belt()?, tol.alg).residual;
    if residual >= tol.alg {
        return Err(Error::NotFlexible { residual });
    }
    let intervals = admissible_intervals(block)?;
    let owned;
    let templates = match templates {
        Some(t) => t,
        None => {
            owned = default_templates(block, lengths)?;
            &owned
        }
    };
    let mut out: Vec<TraceSample> = Vec::with_capacity(samples.len());
    for &driving in samples {
        if !is_assemblable(block, driving)? {
            return Err(Error::RangeExceeded {
                sample: driving,
                intervals,
            });
        }
        let config = configure_spherical(block, HalfTangent::from_angle(driving), tol)?;
        let lifted = lift_to_3d(block, &config, lengths, templates)?;
        let dihedral = lifted.dihedrals();
        let rotation = match out.last() {
            None => vec![0.0; dihedral.len()],
            Some(prev) => (0..dihedral.len())
                .map(|h| prev.rotation[h] + wrap_angle(dihedral[h] - prev.dihedral[h]))
                .collect(),
        };
        out.push(TraceSample {
            driving,
            config,
            block: lifted,
            dihedral,
            rotation,
        });
    }
    let checks = sweep_checks(block, &out);
    let hinges = out[0].block.hinges.iter().map(|h| h.kind).collect();
    Ok(FlexionTrace {
        hinges,
        samples: out,
        intervals,
        checks,
    })
}

fn sweep_checks(block: &BlockParameters, samples: &[TraceSample]) -> SweepChecks {
    let n = block.n();
    let first = &samples[0];
    let diameter = first.block.diameter();
    let mut checks = SweepChecks::default();
    let index = |kind| first.block.hinge_index(kind).expect("hinge");
    let triples: Vec<[usize; 3]> = (0..n)
        .map(|i| {
            [
                index(HingeKind::OuterA(i)),
                index(HingeKind::Central(i)),
                index(HingeKind::OuterB((i + 1) % n)),
            ]
        })
        .collect();
    let reference: Vec<Vec<f64>> = (0..first.block.faces.len())
        .map(|f| first.block.distances(f))
        .collect();

    for (k, s) in samples.iter().enumerate() {
        for (f, d0) in reference.iter().enumerate() {
            for (x, y) in s.block.distances(f).iter().zip(d0) {
                checks.rigidity = checks.rigidity.max((x - y).abs() / diameter);
            }
        }
        let (rot, trans) = loop_closure(&first.block, &s.block, diameter);
        checks.loop_rotation = checks.loop_rotation.max(rot);
        checks.loop_translation = checks.loop_translation.max(trans);
        checks.chain_closure = checks.chain_closure.max(s.config.closure_residual);
        checks.arc_residual = s
            .config
            .arc_residual
            .iter()
            .fold(checks.arc_residual, |m, &r| m.max(r));
        for t in &triples {
            let abs = t.map(|h| s.rotation[h].abs());
            let spread = abs.iter().fold(f64::MIN, |m, &x| m.max(x))
                - abs.iter().fold(f64::MAX, |m, &x| m.min(x));
            checks.triple = checks.triple.max(spread);
        }
        for i in 0..n {
            let h = index(HingeKind::Central(i));
            let at_origin = wrap_angle(s.dihedral[h] - (PI + s.config.beta[i])).abs();
            let j = (i + 1) % n;
            let hinge = &s.block.hinges[h];
            let p = &s.block.points;
            let at_end = signed_angle_about(
                &(p[hinge.end] - p[hinge.origin]),
                &(p[(j + 1) % n] - p[j]),
                &(p[n + j] - p[j]),
            );
            let at_end = wrap_angle(at_end - s.config.alpha[j]).abs();
            checks.consistency = checks.consistency.max(at_origin).max(at_end);
            let dz = wrap_angle(s.config.measured_zeta(i) - block.vertices[i].zeta).abs();
            checks.zeta = checks.zeta.max(dz);
        }
        if k > 0 {
            let prev = &samples[k - 1];
            for h in 0..s.dihedral.len() {
                checks.max_jump = checks
                    .max_jump
                    .max(wrap_angle(s.dihedral[h] - prev.dihedral[h]).abs());
            }
        }
    }
    if n.is_multiple_of(2) {
        let family = |parity: usize| {
            let mut worst: f64 = 0.0;
            for s in samples {
                for t in triples.iter().skip(parity).step_by(2) {
                    let abs = t.map(|h| s.rotation[h].abs());
                    let spread = abs.iter().fold(f64::MIN, |m, &x| m.max(x))
                        - abs.iter().fold(f64::MAX, |m, &x| m.min(x));
                    worst = worst.max(spread);
                }
            }
            worst
        };
        checks.u_polylines = Some(family(0));
        checks.v_polylines = Some(family(1));
    }
    checks
}

/// Composes the relative hinge motions around each polygon vertex; returns the
/// worst rotation and (relative) translation deviation from the identity.
fn loop_closure(initial: &Block3D, current: &Block3D, scale: f64) -> (f64, f64) {
    let n = initial.n;
    let (oa, ob) = (|i: usize| n + i, |i: usize| 2 * n + i);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..n {
        let next = (i + 1) % n;
        let prev = (i + n - 1) % n;
        // (axis end, from wing, to wing): central → side_i → corner_i → side_{i-1} → central
        let steps = [
            (next, prev, ob(i)),
            (ob(i), next, oa(i)),
            (oa(i), ob(i), prev),
            (prev, oa(i), next),
        ];
        let angle = |b: &Block3D, (end, from, to): (usize, usize, usize)| {
            let o = b.points[i];
            signed_angle_about(
                &(b.points[end] - o),
                &(b.points[from] - o),
                &(b.points[to] - o),
            )
        };
        let origin = initial.points[i];
        let mut total = Isometry3::identity();
        for step in steps {
            let delta = wrap_angle(angle(current, step) - angle(initial, step));
            let axis = Unit::new_normalize(initial.points[step.0] - origin);
            let rotation = UnitQuaternion::from_axis_angle(&axis, delta);
            let about_line = Translation3::from(origin) * rotation * Translation3::from(-origin);
            total *= about_line;
        }
        let r: Rotation3<f64> = total.rotation.to_rotation_matrix();
        let rot_err = (r.matrix() - nalgebra::Matrix3::identity()).abs().max();
        let trans_err = total.translation.vector.norm() / scale;
        worst = (worst.0.max(rot_err), worst.1.max(trans_err));
    }
    worst
}

/// A belt over a triangle with the given bar lengths (exterior angles).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SixRReport {
    pub polygon: SpatialPolygon,
    pub f: [f64; 3],
    pub product: f64,
    pub solutions: Vec<OffsetSolution>,
    pub flexible_over_c: bool,
    /// Blocks for the real, flexible offset choices.
    pub blocks: Vec<BlockParameters>,
}

/// Triangle with `λ_i` at `V_i`, `V_0` at the origin and `|V_0 V_1| = 1`.
pub fn triangle_from_bar_lengths(lambda: [f64; 3], tol: f64) -> Result<SpatialPolygon> {
    let sum: f64 = lambda.iter().sum();
    if (sum - 2.0 * PI).abs() > tol {
        return Err(Error::Precondition(format!(
            "bar lengths sum to {sum}, not 2π"
        )));
    }
    if lambda.iter().any(|l| !(*l > 0.0 && *l < PI)) {
        return Err(Error::Precondition("bar lengths must lie in (0, π)".into()));
    }
    let interior = lambda.map(|l| PI - l);
    let side = interior[1].sin() / interior[2].sin();
    let v2 = Vec3::new(interior[0].cos(), interior[0].sin(), 0.0) * side;
    SpatialPolygon::new(vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), v2], tol)
}

/// The `n = 3` belt: ratios from `δ_i`, offsets either given or solved over ℂ.
pub fn sixr_from_n3(
    lambda: [f64; 3],
    delta: [f64; 3],
    branch: [Branch; 3],
    e: Option<[f64; 3]>,
    tol: &Tolerances,
) -> Result<SixRReport> {
    let polygon = triangle_from_bar_lengths(lambda, tol.geom)?;
    let mut f = [0.0; 3];
    for i in 0..3 {
        f[i] = transmission_ratio(&IsogramGeometry::new(
            delta[i], lambda[i], branch[i], tol.geom,
        )?)?
        .value();
    }
    let (solutions, flexible_over_c) = match e {
        Some(e) => {
            let report = is_flexible(&BeltSpec::new(f.to_vec(), e.to_vec())?, tol.alg);
            let sol = OffsetSolution {
                e: e.iter().map(|&x| x.into()).collect(),
                residual: report.residual,
                real: true,
                seed: 0,
            };
            (vec![sol], report.flexible)
        }
        None => {
            let fc: Vec<_> = f.iter().map(|&x| x.into()).collect();
            let sols = solve_offsets(&fc, &[None, None, None], tol.alg)?;
            (sols, true)
        }
    };
    let mut blocks = Vec::new();
    if flexible_over_c {
        for sol in &solutions {
            if let Some(e) = sol.real_values() {
                blocks.push(BlockParameters::from_belt(
                    polygon.clone(),
                    &delta,
                    &branch,
                    &e,
                    tol.geom,
                )?);
            }
        }
    }
    Ok(SixRReport {
        polygon,
        f,
        product: f.iter().product(),
        solutions,
        flexible_over_c,
        blocks,
    })
}

/// `δ` for the third vertex of a no-shift triangle belt (`f_0 f_1 f_2 = 1`),
/// on whichever branch admits it.
pub fn closing_delta(f01: f64, lambda: f64) -> Result<(f64, Branch)> {
    let f = TransmissionRatio::new(1.0 / f01)?;
    let branch = if f.value().abs() < 1.0 {
        Branch::Minus
    } else {
        Branch::Plus
    };
    Ok((recover_delta(f, lambda, branch)?, branch))
}

/// `e_i` for planar faces at every vertex (`ζ_i ∈ {0, π}` as requested).
pub fn planar_face_offsets(polygon: &SpatialPolygon, zeta: &[f64]) -> Result<Vec<f64>> {
    let tau = crate::sphkin::torsion_angles(polygon)?;
    tau.iter()
        .zip(zeta)
        .map(|(&t, &z)| offset_from_zeta(z, t))
        .collect()
}
