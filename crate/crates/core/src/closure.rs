//! Closure algebra of a belt: Möbius composition, the closure quadratic,
//! the flexibility test, antipode normalisation and a complex offset solver.
//!
//! Index convention: the step from `a_{k-1}` to `a_k` uses `f_{k-1}` and `e_k`,
//! and the last step uses `e_n ≡ e_0`, so `M = S(f_{n-1}, e_0) ⋯ S(f_0, e_1)`.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isogram::{transmission_ratio, transmit, Branch, IsogramGeometry};
use crate::scalar::{is_real_within, Scalar};
use crate::sphkin::{
    arc_between, edge_directions, position_angle, tangent_toward, wrap_angle, HalfTangent,
    SpatialPolygon, Vec3,
};

/// Algebraic belt data: ratios `f_i` and offset half-tangents `e_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeltSpec<T = f64> {
    f: Vec<T>,
    e: Vec<T>,
}

impl<T: Scalar> BeltSpec<T> {
    pub fn new(f: Vec<T>, e: Vec<T>) -> Result<Self> {
        if f.len() < 3 {
            return Err(Error::TooFewVertices(f.len()));
        }
        if e.len() != f.len() {
            return Err(Error::Precondition(format!(
                "{} ratios but {} offsets",
                f.len(),
                e.len()
            )));
        }
        if f.iter().any(|x| x.modulus() == 0.0 || !x.is_finite()) {
            return Err(Error::ZeroTransmission);
        }
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::PoleNotRepresentable);
        }
        Ok(Self { f, e })
    }

    /// Belt without offsets.
    pub fn no_shift(f: Vec<T>) -> Result<Self> {
        let e = vec![T::zero(); f.len()];
        Self::new(f, e)
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[T] {
        &self.f
    }

    pub fn e(&self) -> &[T] {
        &self.e
    }

    pub fn to_complex(&self) -> BeltSpec<Complex64> {
        BeltSpec {
            f: self.f.iter().map(|x| x.to_complex()).collect(),
            e: self.e.iter().map(|x| x.to_complex()).collect(),
        }
    }

    /// `a_0, a_1, …, a_n` for the driving value `a0`.
    pub fn propagate(&self, a0: HalfTangent<T>) -> Vec<HalfTangent<T>> {
        let n = self.n();
        let mut chain = Vec::with_capacity(n + 1);
        chain.push(a0);
        for k in 1..=n {
            let prev = chain[k - 1];
            chain.push(step_map(self.f[k - 1], self.e[k % n]).apply(prev));
        }
        chain
    }
}

/// Projective `2×2` matrix `[[m11, m12], [m21, m22]]` acting on `(p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap<T = f64> {
    pub m: [[T; 2]; 2],
}

impl<T: Scalar> MobiusMap<T> {
    pub fn new(m11: T, m12: T, m21: T, m22: T) -> Self {
        Self {
            m: [[m11, m12], [m21, m22]],
        }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn apply(&self, h: HalfTangent<T>) -> HalfTangent<T> {
        let [[a, b], [c, d]] = self.m;
        HalfTangent {
            p: a * h.p + b * h.q,
            q: c * h.p + d * h.q,
        }
    }

    pub fn det(&self) -> T {
        let [[a, b], [c, d]] = self.m;
        a * d - b * c
    }

    pub fn max_entry(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    fn quadratic(&self) -> ClosureQuadratic<T> {
        let [[m11, m12], [m21, m22]] = self.m;
        ClosureQuadratic {
            q2: m21,
            q1: m22 - m11,
            q0: -m12,
        }
    }
}

impl<T: Scalar> Mul for MobiusMap<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let [[a, b], [c, d]] = self.m;
        let [[e, f], [g, h]] = rhs.m;
        Self::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

/// `S(f, e) = [[f, e], [−f·e, 1]]`, i.e. `a ↦ (f·a + e)/(1 − f·a·e)`.
pub fn step_map<T: Scalar>(f_prev: T, e_cur: T) -> MobiusMap<T> {
    MobiusMap::new(f_prev, e_cur, -(f_prev * e_cur), T::one())
}

/// `∂S/∂e`.
fn step_map_de<T: Scalar>(f_prev: T) -> MobiusMap<T> {
    MobiusMap::new(T::zero(), T::one(), -f_prev, T::zero())
}

/// The composed map `a_0 ↦ a_n`.
pub fn belt_map<T: Scalar>(belt: &BeltSpec<T>) -> MobiusMap<T> {
    let n = belt.n();
    (1..=n).fold(MobiusMap::identity(), |acc, k| {
        step_map(belt.f[k - 1], belt.e[k % n]) * acc
    })
}

/// `q2·a0² + q1·a0 + q0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureQuadratic<T = f64> {
    pub q2: T,
    pub q1: T,
    pub q0: T,
}

impl<T: Scalar> ClosureQuadratic<T> {
    pub fn coefficients(&self) -> [T; 3] {
        [self.q2, self.q1, self.q0]
    }

    pub fn max_modulus(&self) -> f64 {
        self.coefficients()
            .iter()
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, a: T) -> T {
        (self.q2 * a + self.q1) * a + self.q0
    }
}

pub fn closure_polynomial<T: Scalar>(belt: &BeltSpec<T>) -> ClosureQuadratic<T> {
    belt_map(belt).quadratic()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlexibilityReport<T = f64> {
    pub quadratic: ClosureQuadratic<T>,
    /// Largest modulus among the entries of the composed map.
    pub scale: f64,
    /// `|q2|, |q1|, |q0|` divided by `scale`.
    pub residuals: [f64; 3],
    pub residual: f64,
    pub flexible: bool,
}

pub fn is_flexible<T: Scalar>(belt: &BeltSpec<T>, tol_alg: f64) -> FlexibilityReport<T> {
    let map = belt_map(belt);
    let quadratic = map.quadratic();
    let scale = map.max_entry();
    let residuals = quadratic.coefficients().map(|q| q.modulus() / scale);
    let residual = residuals.iter().copied().fold(0.0, f64::max);
    FlexibilityReport {
        quadratic,
        scale,
        residuals,
        residual,
        flexible: residual < tol_alg,
    }
}

/// `e = tan((ζ − τ)/2)`.
pub fn offset_from_zeta(zeta: f64, tau: f64) -> Result<f64> {
    let eps = wrap_angle(zeta - tau);
    if (eps - PI).abs() < 1e-12 {
        return Err(Error::PoleNotRepresentable);
    }
    Ok((0.5 * eps).tan())
}

/// A converged root of the closure system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetSolution {
    /// All `n` offsets, known ones included.
    pub e: Vec<Complex64>,
    pub residual: f64,
    pub real: bool,
    pub seed: usize,
}

impl OffsetSolution {
    pub fn real_values(&self) -> Option<Vec<f64>> {
        self.real.then(|| self.e.iter().map(|z| z.re).collect())
    }
}

const SEED_MODULI: [f64; 3] = [0.1, 1.0, 10.0];
const SEED_COUNT: usize = 27;
const MAX_NEWTON_STEPS: usize = 100;
const DEDUP_DISTANCE: f64 = 1e-6;
const REAL_TOL: f64 = 1e-9;

/// Seed `s` as base-3 digits `(d0, d1, d2)`: unknown `j` starts at modulus
/// `SEED_MODULI[d_j]` and phase `2π/3 · d_{j+1}`.
fn seed(s: usize) -> [Complex64; 3] {
    let digits = [s % 3, (s / 3) % 3, (s / 9) % 3];
    std::array::from_fn(|j| {
        let phase = 2.0 * PI / 3.0 * digits[(j + 1) % 3] as f64;
        Complex64::from_polar(SEED_MODULI[digits[j]], phase)
    })
}

/// Solves `q2 = q1 = q0 = 0` for the three offsets marked `None` in `known`.
///
/// Damped complex Newton from 27 deterministic seeds; converged roots are
/// deduplicated and returned in seed order.
pub fn solve_offsets(
    f: &[Complex64],
    known: &[Option<Complex64>],
    tol_alg: f64,
) -> Result<Vec<OffsetSolution>> {
    let n = f.len();
    if known.len() != n {
        return Err(Error::Precondition(format!(
            "{n} ratios but {} offset slots",
            known.len()
        )));
    }
    let unknown: Vec<usize> = (0..n).filter(|&i| known[i].is_none()).collect();
    if unknown.len() != 3 {
        return Err(Error::Precondition(format!(
            "expected 3 unknown offsets, got {}",
            unknown.len()
        )));
    }
    let unknown = [unknown[0], unknown[1], unknown[2]];
    let base: Vec<Complex64> = known.iter().map(|k| k.unwrap_or_default()).collect();
    BeltSpec::new(f.to_vec(), base.clone())?;

    let mut solutions: Vec<OffsetSolution> = Vec::new();
    let mut best = f64::INFINITY;
    for s in 0..SEED_COUNT {
        let mut e = base.clone();
        for (j, &u) in unknown.iter().enumerate() {
            e[u] = seed(s)[j];
        }
        let Some((e, residual)) = newton(f, e, &unknown) else {
            continue;
        };
        best = best.min(residual);
        if residual >= tol_alg {
            continue;
        }
        let duplicate = solutions.iter().any(|sol| {
            unknown
                .iter()
                .all(|&u| (sol.e[u] - e[u]).norm() < DEDUP_DISTANCE)
        });
        if !duplicate {
            let real = e.iter().all(|z| is_real_within(*z, REAL_TOL));
            solutions.push(OffsetSolution {
                e,
                residual,
                real,
                seed: s,
            });
        }
    }
    if solutions.is_empty() {
        return Err(Error::NoConvergence {
            starts: SEED_COUNT,
            best_residual: best,
        });
    }
    Ok(solutions)
}

fn residual_of(f: &[Complex64], e: &[Complex64]) -> (Vector3<Complex64>, f64) {
    let belt = BeltSpec {
        f: f.to_vec(),
        e: e.to_vec(),
    };
    let report = is_flexible(&belt, 0.0);
    let q = report.quadratic;
    (Vector3::new(q.q2, q.q1, q.q0), report.residual)
}

fn jacobian(f: &[Complex64], e: &[Complex64], unknown: &[usize; 3]) -> Matrix3<Complex64> {
    let n = f.len();
    let steps: Vec<MobiusMap<Complex64>> = (1..=n).map(|k| step_map(f[k - 1], e[k % n])).collect();
    // prefix[k] = S_k ⋯ S_1, suffix[k] = S_n ⋯ S_{k+1}
    let mut prefix = vec![MobiusMap::identity(); n + 1];
    for k in 1..=n {
        prefix[k] = steps[k - 1] * prefix[k - 1];
    }
    let mut suffix = vec![MobiusMap::identity(); n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * steps[k];
    }
    let mut jac = Matrix3::zeros();
    for (col, &u) in unknown.iter().enumerate() {
        let s = if u == 0 { n } else { u };
        let d = suffix[s] * step_map_de(f[s - 1]) * prefix[s - 1];
        let dq = d.quadratic();
        jac[(0, col)] = dq.q2;
        jac[(1, col)] = dq.q1;
        jac[(2, col)] = dq.q0;
    }
    jac
}

fn newton(
    f: &[Complex64],
    mut e: Vec<Complex64>,
    unknown: &[usize; 3],
) -> Option<(Vec<Complex64>, f64)> {
    let (mut q, mut residual) = residual_of(f, &e);
    for _ in 0..MAX_NEWTON_STEPS {
        if residual < 1e-15 {
            break;
        }
        let step = jacobian(f, &e, unknown).lu().solve(&q)?;
        let norm = q.norm();
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = e.clone();
            for (j, &u) in unknown.iter().enumerate() {
                trial[u] -= step[j] * damping;
            }
            let (tq, tr) = residual_of(f, &trial);
            if tr.is_finite() && tq.norm() < norm {
                e = trial;
                q = tq;
                residual = tr;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted || unknown.iter().any(|&u| e[u].norm() > 1e8) {
            break;
        }
    }
    residual.is_finite().then_some((e, residual))
}

/// Whether an isogram's opposite arcs are equal or supplementary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsogramType {
    One,
    Two,
}

/// Classifies the quadrilateral `C_i A_i B_i C_{i+1}`.
pub fn isogram_type(
    c_i: &Vec3,
    c_next: &Vec3,
    a: &Vec3,
    b: &Vec3,
    tol: f64,
) -> Option<IsogramType> {
    let lambda = arc_between(c_i, c_next);
    let gamma = arc_between(c_i, a);
    let delta = arc_between(c_next, b);
    let mu = arc_between(a, b);
    if (gamma - delta).abs() < tol && (mu - lambda).abs() < tol {
        Some(IsogramType::One)
    } else if (gamma + delta - PI).abs() < tol && (mu + lambda - PI).abs() < tol {
        Some(IsogramType::Two)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipTarget {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub target: FlipTarget,
    pub vertex: usize,
}

/// Result of replacing points by antipodes until every isogram is of type (1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub belt: BeltSpec<f64>,
    pub delta: Vec<f64>,
    pub branch: Vec<Branch>,
    pub a: Vec<Vec3>,
    pub b: Vec<Vec3>,
    pub input_types: Vec<IsogramType>,
    /// Flips in the order applied; a point flipped twice appears twice.
    pub flips: Vec<Flip>,
    /// Index `j` of the last free choice when the closing re-flip was needed.
    pub reflip_from: Option<usize>,
}

/// Input angle `α_i` at `C_i`, measured from the arc toward `C_{i+1}`.
fn input_angle(ci: &Vec3, cj: &Vec3, a: &Vec3) -> f64 {
    position_angle(ci, &tangent_toward(ci, cj), a)
}

/// Output angle `β_i` at `C_{i+1}`, measured from the continuation of `C_i C_{i+1}`.
fn output_angle(ci: &Vec3, cj: &Vec3, b: &Vec3) -> f64 {
    position_angle(cj, &-tangent_toward(cj, ci), b)
}

/// Antipode normalisation of a belt snapshot given by its spherical image.
///
/// `a[i]`, `b[i]` are the points `A_i`, `B_i` of the isogram at vertex `i`.
pub fn normalize_to_type1(
    polygon: &SpatialPolygon,
    a: &[Vec3],
    b: &[Vec3],
    tol: f64,
) -> Result<Normalization> {
    let n = polygon.len();
    if a.len() != n || b.len() != n {
        return Err(Error::Precondition(format!("expected {n} points A and B")));
    }
    let c: Vec<Vec3> = edge_directions(polygon)?
        .iter()
        .map(|p| p.as_vec())
        .collect();
    let cn = |i: usize| c[(i + 1) % n];
    let classify = |i: usize, a: &Vec3, b: &Vec3| isogram_type(&c[i], &cn(i), a, b, tol);
    let input_types = (0..n)
        .map(|i| {
            classify(i, &a[i], &b[i])
                .ok_or_else(|| Error::NormalizationFailed(format!("vertex {i} is not isogonal")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let mut flips = Vec::new();
    let mut free_choices = Vec::new();
    let angle_tol = tol.max(1e-12);

    if input_types[0] == IsogramType::Two {
        b[0] = -b[0];
        flips.push(Flip {
            target: FlipTarget::B,
            vertex: 0,
        });
    }
    let mut closing_antipodal = false;
    for i in 0..n {
        let j = (i + 1) % n;
        let beta = output_angle(&c[i], &cn(i), &b[i]);
        let eps = wrap_angle(input_angle(&c[j], &cn(j), &a[j]) - beta);
        let forced_flip = (eps.abs() - PI).abs() < angle_tol;
        let free = eps.abs() >= angle_tol && !forced_flip;
        if j == 0 {
            closing_antipodal = forced_flip;
            break;
        }
        if free {
            free_choices.push(i);
        }
        if forced_flip {
            a[j] = -a[j];
            flips.push(Flip {
                target: FlipTarget::A,
                vertex: j,
            });
        }
        match classify(j, &a[j], &b[j]) {
            Some(IsogramType::One) => {}
            Some(IsogramType::Two) => {
                b[j] = -b[j];
                flips.push(Flip {
                    target: FlipTarget::B,
                    vertex: j,
                });
            }
            None => {
                return Err(Error::NormalizationFailed(format!(
                    "vertex {j} lost isogonality"
                )))
            }
        }
    }

    let mut reflip_from = None;
    if closing_antipodal {
        let j = *free_choices.last().ok_or_else(|| {
            Error::NormalizationFailed("A_n is antipodal to A_0 but no free choice was made".into())
        })?;
        for k in j + 1..n {
            a[k] = -a[k];
            b[k] = -b[k];
            flips.push(Flip {
                target: FlipTarget::A,
                vertex: k,
            });
            flips.push(Flip {
                target: FlipTarget::B,
                vertex: k,
            });
        }
        reflip_from = Some(j);
    }

    let mut delta = Vec::with_capacity(n);
    let mut branch = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for i in 0..n {
        if classify(i, &a[i], &b[i]) != Some(IsogramType::One) {
            return Err(Error::NormalizationFailed(format!(
                "vertex {i} is not of type (1) after normalisation"
            )));
        }
        let lambda = arc_between(&c[i], &cn(i));
        let d = arc_between(&cn(i), &b[i]);
        let alpha = HalfTangent::from_angle(input_angle(&c[i], &cn(i), &a[i]));
        let beta = HalfTangent::from_angle(output_angle(&c[i], &cn(i), &b[i]));
        let fits: Vec<(Branch, f64)> = [Branch::Minus, Branch::Plus]
            .into_iter()
            .filter_map(|br| {
                let ratio =
                    transmission_ratio(&IsogramGeometry::new(d, lambda, br, tol).ok()?).ok()?;
                transmit(ratio.value(), alpha)
                    .projectively_eq(&beta, 1e-7)
                    .then_some((br, ratio.value()))
            })
            .collect();
        let (br, fi) = match fits.as_slice() {
            [one] => *one,
            [] => {
                return Err(Error::NormalizationFailed(format!(
                    "vertex {i} matches neither branch"
                )))
            }
            _ => {
                return Err(Error::NormalizationFailed(format!(
                    "vertex {i} is flat, branch undetermined"
                )))
            }
        };
        let j = (i + 1) % n;
        let eps =
            wrap_angle(input_angle(&c[j], &cn(j), &a[j]) - output_angle(&c[i], &cn(i), &b[i]));
        if (eps.abs() - PI).abs() < angle_tol {
            return Err(Error::PoleNotRepresentable);
        }
        delta.push(d);
        branch.push(br);
        f.push(fi);
        e.push((j, (0.5 * eps).tan()));
    }
    let mut offsets = vec![0.0; n];
    for (j, v) in e {
        offsets[j] = v;
    }
    Ok(Normalization {
        belt: BeltSpec::new(f, offsets)?,
        delta,
        branch,
        a,
        b,
        input_types,
        flips,
        reflip_from,
    })
}
