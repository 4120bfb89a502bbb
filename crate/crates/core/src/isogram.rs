//! Spherical isograms of type (1): opposite bars equal.
//!
//! Arc assignment at vertex `V_i`: the ground bar `C_i C_{i+1}` has length `λ`,
//! the crank `C_i A_i` has length `γ = δ`, the follower `C_{i+1} B_i` has length
//! `δ` and the coupler `A_i B_i` has length `μ = λ`.
//!
//! Angle conventions (the only place they are fixed):
//! * `α` is measured at `C_i`, right-handed about `C_i`, from the tangent
//!   pointing toward `C_{i+1}` to the tangent toward `A_i`;
//! * `β` is measured at `C_{i+1}`, right-handed about `C_{i+1}`, from the
//!   tangent continuing the ground arc beyond `C_{i+1}` (away from `C_i`) to
//!   the tangent toward `B_i`.
//!
//! With these, `tan(β/2) = f·tan(α/2)` on both assembly modes, and both flat
//! configurations give `α, β ∈ {0, π}` together.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sphkin::{
    place, position_angle, tangent_toward, wrap_angle, HalfTangent, SphericalPoint, Vec3,
};

/// The `±` in the transmission ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(format!("unknown branch `{other}` (expected plus or minus)")),
        }
    }
}

/// Assembly mode of an isogram motion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssemblyMode {
    /// `A` and `B` on the same side of the ground great circle (`f > 0`).
    Parallelogram,
    /// `A` and `B` on opposite sides (`f < 0`).
    Antiparallelogram,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsogramGeometry {
    delta: f64,
    lambda: f64,
    branch: Branch,
}

impl IsogramGeometry {
    pub fn new(delta: f64, lambda: f64, branch: Branch, tol: f64) -> Result<Self> {
        check_open_angle("delta", delta)?;
        check_open_angle("lambda", lambda)?;
        if (delta - lambda).abs() <= tol || (delta + lambda - PI).abs() <= tol {
            return Err(Error::DegenerateIsogram { delta, lambda });
        }
        Ok(Self {
            delta,
            lambda,
            branch,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn gamma(&self) -> f64 {
        self.delta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu(&self) -> f64 {
        self.lambda
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Parallelogram iff `δ + λ < π` on the minus branch, or `δ > λ` on the
    /// plus branch.
    pub fn assembly_mode(&self) -> AssemblyMode {
        let parallelogram = match self.branch {
            Branch::Minus => self.delta + self.lambda < PI,
            Branch::Plus => self.delta > self.lambda,
        };
        if parallelogram {
            AssemblyMode::Parallelogram
        } else {
            AssemblyMode::Antiparallelogram
        }
    }
}

fn check_open_angle(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < PI {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange { name, value })
    }
}

/// Nonzero ratio `f` of `b = f·a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionRatio(f64);

impl TransmissionRatio {
    pub fn new(f: f64) -> Result<Self> {
        if f == 0.0 || !f.is_finite() {
            return Err(Error::ZeroTransmission);
        }
        Ok(Self(f))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn transmit(self, a: HalfTangent) -> HalfTangent {
        transmit(self.0, a)
    }
}

/// `f = (sin δ ± sin λ) / sin(δ − λ)`.
pub fn transmission_ratio(geom: &IsogramGeometry) -> Result<TransmissionRatio> {
    let (d, l) = (geom.delta, geom.lambda);
    let f = (d.sin() + geom.branch.sign() * l.sin()) / (d - l).sin();
    TransmissionRatio::new(f)
}

/// `b = f·a` in homogeneous form `(p, q) ↦ (f·p, q)`.
pub fn transmit<T: Scalar>(f: T, a: HalfTangent<T>) -> HalfTangent<T> {
    HalfTangent { p: f * a.p, q: a.q }
}

/// The unique `δ ∈ (0, π)`, `δ ≠ λ`, with `transmission_ratio(δ, λ, branch) = f`.
///
/// In `d = tan(δ/2)` the minus-branch equation is the quadratic
/// `−sin λ (1+f) d² + 2 (1 − f cos λ) d − sin λ (1−f) = 0`, one of whose roots
/// is the degenerate `tan(λ/2)`. The other follows from the product of roots.
/// Plus-branch solutions are the minus-branch ones shifted by π.
pub fn recover_delta(f: TransmissionRatio, lambda: f64, branch: Branch) -> Result<f64> {
    check_open_angle("lambda", lambda)?;
    let f = f.value();
    let fail = || Error::NoAdmissibleSolution {
        f,
        lambda,
        branch: branch.name(),
    };
    if f == -1.0 {
        return Err(fail());
    }
    let root = (1.0 - f) / ((1.0 + f) * (0.5 * lambda).tan());
    let minus = 2.0 * root.atan();
    let delta = match branch {
        Branch::Minus => minus,
        Branch::Plus => minus + PI,
    };
    if !(delta > 0.0 && delta < PI) || (delta - lambda).abs() < 1e-14 {
        return Err(fail());
    }
    Ok(delta)
}

/// Both solutions `B` of a spherical four-bar with fixed ground `C_i, C_{i+1}`:
/// `|C_{i+1} B| = follower`, `|A B| = coupler`.
pub fn four_bar_candidates(
    c_next: &Vec3,
    continuation: &Vec3,
    a: &Vec3,
    follower: f64,
    coupler: f64,
) -> Result<[Vec3; 2]> {
    let side = c_next.cross(continuation);
    let p = follower.sin() * a.dot(continuation);
    let q = follower.sin() * a.dot(&side);
    let r = coupler.cos() - follower.cos() * a.dot(c_next);
    let s = p.hypot(q);
    let argument = if s > 0.0 { r / s } else { f64::INFINITY };
    if !(argument.abs() <= 1.0 + 1e-12) {
        return Err(Error::NoRealClosure { argument });
    }
    let phi = q.atan2(p);
    let spread = (s * s - r * r).max(0.0).sqrt().atan2(r);
    Ok([
        place(c_next, continuation, follower, phi + spread),
        place(c_next, continuation, follower, phi - spread),
    ])
}

/// Output angle `β` of the isogram obtained by direct spherical four-bar
/// closure, independent of the transmission-ratio formula.
///
/// `A` is placed at arc `γ` from `C_i` at angle `α`. Of the two positions of
/// `B`, the minus branch takes the one for which the diagonals `C_i B` and
/// `A C_{i+1}` bisect each other, the plus branch the other one. At the flat
/// inputs `α ∈ {0, π}` the two coincide.
pub fn oracle_output(
    geom: &IsogramGeometry,
    c_i: &SphericalPoint,
    c_next: &SphericalPoint,
    alpha: f64,
) -> Result<f64> {
    let (ci, cj) = (c_i.as_vec(), c_next.as_vec());
    let ground = ground_arc(&ci, &cj)?;
    if (ground - geom.lambda).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "ground arc {ground} does not match lambda {}",
            geom.lambda
        )));
    }
    let a = place(&ci, &tangent_toward(&ci, &cj), geom.gamma(), alpha);
    let continuation = -tangent_toward(&cj, &ci);
    let [b1, b2] = four_bar_candidates(&cj, &continuation, &a, geom.delta, geom.mu())?;
    // On the minus branch the diagonals C_i B and A C_{i+1} share their midpoint.
    let skew = |b: &Vec3| midpoint_gap(&ci, b, &a, &cj);
    let (near, far) = if skew(&b1) <= skew(&b2) {
        (b1, b2)
    } else {
        (b2, b1)
    };
    let b = match geom.branch {
        Branch::Minus => near,
        Branch::Plus => far,
    };
    Ok(wrap_angle(position_angle(&cj, &continuation, &b)))
}

fn midpoint_gap(p: &Vec3, q: &Vec3, r: &Vec3, s: &Vec3) -> f64 {
    let (m1, m2) = (p + q, r + s);
    match (m1.try_normalize(1e-12), m2.try_normalize(1e-12)) {
        (Some(m1), Some(m2)) => m1.cross(&m2).norm(),
        _ => 0.0,
    }
}

fn ground_arc(ci: &Vec3, cj: &Vec3) -> Result<f64> {
    let arc = crate::sphkin::arc_between(ci, cj);
    if arc <= 0.0 || arc >= PI {
        return Err(Error::Precondition(
            "ground points coincide or are antipodal".into(),
        ));
    }
    Ok(arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ground(lambda: f64) -> (SphericalPoint, SphericalPoint) {
        (
            SphericalPoint::from_vector(Vec3::new(1.0, 0.0, 0.0)).unwrap(),
            SphericalPoint::from_vector(Vec3::new(lambda.cos(), lambda.sin(), 0.0)).unwrap(),
        )
    }

    /// Root of the branch equation by bisection over a fine grid, skipping the
    /// degenerate `δ = λ` and sign changes across poles.
    fn delta_by_bisection(f: f64, lambda: f64, branch: Branch) -> Vec<f64> {
        let g = |d: f64| d.sin() + branch.sign() * lambda.sin() - f * (d - lambda).sin();
        let n = 20_000;
        let mut roots = Vec::new();
        for k in 0..n {
            let (mut lo, mut hi) = (PI * k as f64 / n as f64, PI * (k + 1) as f64 / n as f64);
            if g(lo) * g(hi) > 0.0 {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(lo) * g(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            if r > 1e-9 && r < PI - 1e-9 && (r - lambda).abs() > 1e-6 {
                roots.push(r);
            }
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        roots
    }

    #[test]
    fn ratio_examples() {
        let g = IsogramGeometry::new(PI / 2.0, PI / 3.0, Branch::Minus, 1e-10).unwrap();
        assert_abs_diff_eq!(
            transmission_ratio(&g).unwrap().value(),
            2.0 - 3f64.sqrt(),
            epsilon = 1e-15
        );
        let g = IsogramGeometry::new(PI / 3.0, PI / 6.0, Branch::Plus, 1e-10).unwrap();
        assert_abs_diff_eq!(
            transmission_ratio(&g).unwrap().value(),
            3f64.sqrt() + 1.0,
            epsilon = 1e-14
        );
        assert!(matches!(
            IsogramGeometry::new(1.0, 1.0, Branch::Minus, 1e-10),
            Err(Error::DegenerateIsogram { .. })
        ));
        assert!(matches!(
            IsogramGeometry::new(1.0, PI - 1.0, Branch::Plus, 1e-10),
            Err(Error::DegenerateIsogram { .. })
        ));
        assert!(IsogramGeometry::new(0.0, 1.0, Branch::Plus, 1e-10).is_err());
    }

    #[test]
    fn transmit_examples() {
        let b = transmit(2.0, HalfTangent::new(1.0, 1.0).unwrap());
        assert_eq!((b.p, b.q), (2.0, 1.0));
        let b = transmit(7.5, HalfTangent::new(0.0, 1.0).unwrap());
        assert_eq!(b.value(), Some(0.0));
        let b = transmit(-1.0, HalfTangent::from_value(0.3));
        assert_abs_diff_eq!(
            b.angle(),
            -HalfTangent::from_value(0.3).angle(),
            epsilon = 1e-15
        );
        assert!(TransmissionRatio::new(0.0).is_err());
    }

    #[test]
    fn transmit_composes() {
        let a = HalfTangent::new(0.37, -1.9).unwrap();
        let lhs = transmit(-2.5, transmit(0.75, a));
        let rhs = transmit(-2.5 * 0.75, a);
        assert!(lhs.projectively_eq(&rhs, 1e-15));
        // exact for ratios whose products are representable
        assert_eq!(transmit(-2.0, transmit(0.5, a)), transmit(-1.0, a));
    }

    #[test]
    fn recover_delta_round_trip_and_bisection() {
        let f = TransmissionRatio::new(2.0 - 3f64.sqrt()).unwrap();
        assert_abs_diff_eq!(
            recover_delta(f, PI / 3.0, Branch::Minus).unwrap(),
            PI / 2.0,
            epsilon = 1e-14
        );
        assert!(recover_delta(f, PI / 3.0, Branch::Plus).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let lambda = rng.gen_range(0.1..PI - 0.1);
            let f = rng.gen_range(-30.0..30.0);
            for branch in [Branch::Plus, Branch::Minus] {
                let oracle = delta_by_bisection(f, lambda, branch);
                match recover_delta(TransmissionRatio::new(f).unwrap(), lambda, branch) {
                    Ok(d) => {
                        assert_eq!(
                            oracle.len(),
                            1,
                            "f={f} lambda={lambda} {branch:?} {oracle:?}"
                        );
                        assert_abs_diff_eq!(d, oracle[0], epsilon = 1e-8);
                    }
                    Err(_) => assert!(
                        oracle.is_empty(),
                        "f={f} lambda={lambda} {branch:?} {oracle:?}"
                    ),
                }
            }
        }
    }

    #[test]
    fn recover_delta_near_degenerate() {
        // Large |f| pushes δ toward λ on the plus branch.
        let lambda = 1.2;
        let d = recover_delta(TransmissionRatio::new(1e6).unwrap(), lambda, Branch::Plus).unwrap();
        assert!(d > 0.0 && d < PI);
        assert!((d - lambda).abs() < 1e-5);
        let oracle = delta_by_bisection(1e6, lambda, Branch::Plus);
        assert_abs_diff_eq!(d, oracle[0], epsilon = 1e-8);
    }

    #[test]
    fn oracle_agrees_at_flat_and_generic_inputs() {
        let g = IsogramGeometry::new(PI / 2.0, PI / 3.0, Branch::Minus, 1e-10).unwrap();
        let (ci, cj) = ground(PI / 3.0);
        assert_abs_diff_eq!(
            oracle_output(&g, &ci, &cj, 0.0).unwrap(),
            0.0,
            epsilon = 1e-7
        );
        let beta = oracle_output(&g, &ci, &cj, PI / 3.0).unwrap();
        assert_abs_diff_eq!(
            (0.5 * beta).tan(),
            (2.0 - 3f64.sqrt()) * (PI / 6.0).tan(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn antipodal_follower_keeps_motion() {
        // Replacing B by its antipode turns the isogram into one with bars
        // (π − δ, π − λ) at B; its candidate set is the antipodal set.
        let (delta, lambda) = (1.1, 0.7);
        let (ci, cj) = ground(lambda);
        let (ci, cj) = (ci.as_vec(), cj.as_vec());
        let cont = -tangent_toward(&cj, &ci);
        for alpha in [-2.0, -0.4, 0.9, 2.7] {
            let a = place(&ci, &tangent_toward(&ci, &cj), delta, alpha);
            let type1 = four_bar_candidates(&cj, &cont, &a, delta, lambda).unwrap();
            let type2 = four_bar_candidates(&cj, &cont, &a, PI - delta, PI - lambda).unwrap();
            for b in type1 {
                let hit = type2.iter().any(|b2| (b + b2).norm() < 1e-12);
                assert!(hit);
            }
        }
    }

    #[test]
    fn sign_of_ratio_matches_assembly_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let delta = rng.gen_range(0.05..PI - 0.05);
            let lambda = rng.gen_range(0.05..PI - 0.05);
            let branch = if rng.gen_bool(0.5) {
                Branch::Plus
            } else {
                Branch::Minus
            };
            let Ok(g) = IsogramGeometry::new(delta, lambda, branch, 0.05) else {
                continue;
            };
            let f = transmission_ratio(&g).unwrap().value();
            assert_eq!(f > 0.0, g.assembly_mode() == AssemblyMode::Parallelogram);
            // The oracle's output lies on A's side of the ground circle exactly in parallelogram mode.
            let (ci, cj) = ground(lambda);
            let alpha = rng.gen_range(0.05..PI - 0.05);
            let beta = oracle_output(&g, &ci, &cj, alpha).unwrap();
            let (ci, cj) = (ci.as_vec(), cj.as_vec());
            let a = place(&ci, &tangent_toward(&ci, &cj), delta, alpha);
            let b = place(&cj, &-tangent_toward(&cj, &ci), delta, beta);
            let normal = ci.cross(&cj);
            let same_side = normal.dot(&a) * normal.dot(&b) > 0.0;
            assert_eq!(same_side, g.assembly_mode() == AssemblyMode::Parallelogram);
            // Minus branch ratios lie in (−1, 1), plus branch ratios outside.
            assert_eq!(f.abs() < 1.0, branch == Branch::Minus);
        }
    }
}
