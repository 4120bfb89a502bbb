//! Belts over a quadrilateral: closed-form closure coefficients and offsets,
//! the inverse solution for the ratios, and the block constructor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::belt::BlockParameters;
use crate::closure::{is_flexible, solve_offsets, BeltSpec, ClosureQuadratic};
use crate::error::{Error, Result};
use crate::isogram::{
    recover_delta, transmission_ratio, Branch, IsogramGeometry, TransmissionRatio,
};
use crate::scalar::{is_real_within, Scalar};
use crate::sphkin::{bar_lengths, SpatialPolygon};
use crate::tol::Tolerances;

const REAL_TOL: f64 = 1e-9;

/// Which of the two sign patterns of the closed-form solutions to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionSign {
    #[default]
    Upper,
    Lower,
}

impl SolutionSign {
    pub fn sign(self) -> f64 {
        match self {
            SolutionSign::Upper => 1.0,
            SolutionSign::Lower => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolutionSign::Upper => "upper",
            SolutionSign::Lower => "lower",
        }
    }
}

impl std::str::FromStr for SolutionSign {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upper" | "+" => Ok(SolutionSign::Upper),
            "lower" | "-" => Ok(SolutionSign::Lower),
            other => Err(format!(
                "unknown solution sign `{other}` (expected upper or lower)"
            )),
        }
    }
}

/// Closure coefficients of a four-vertex belt as explicit polynomials.
pub fn closure_coeffs_n4<T: Scalar>(f: [T; 4], e: [T; 4]) -> ClosureQuadratic<T> {
    let [f0, f1, f2, f3] = f;
    let [e0, e1, e2, e3] = e;
    let one = T::one();
    let q2 = f0
        * (e0 * f3 * (e1 * e2 * f2 + e2 * e3 * f1 + e1 * e3 - f1 * f2) + e1 * e2 * e3 * f2
            - e3 * f1 * f2
            - e2 * f1
            - e1);
    let q1 = e1 * e2 * f0 * f2 * f3 + e2 * e3 * f0 * f1 * f3 + e1 * e3 * f0 * f3
        - e1 * e3 * f1 * f2
        - f0 * f1 * f2 * f3
        - e1 * e2 * f1
        - e2 * e3 * f2
        + one
        + e0 * (e1 * e2 * e3 * f1 * f3 - e1 * e2 * e3 * f0 * f2 - e1 * f1 * f2 * f3
            + e3 * f0 * f1 * f2
            + e2 * f0 * f1
            - e2 * f2 * f3
            + e1 * f0
            - e3 * f3);
    let q0 = e0 * (e1 * e3 * f1 * f2 + e1 * e2 * f1 + e2 * e3 * f2 - one)
        + f3 * (e1 * e2 * e3 * f1 - e1 * f1 * f2 - e2 * f2 - e3);
    ClosureQuadratic { q2, q1, q0 }
}

/// `e_1, e_2, e_3` with the radicands `R_1²`, `R_2²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetTriple {
    pub e: [Complex64; 3],
    pub r1_sq: Complex64,
    pub r2_sq: Complex64,
    pub real: bool,
}

fn check_denominator(value: Complex64, scale: f64, name: &'static str) -> Result<Complex64> {
    if value.norm() <= 1e-13 * scale.max(1.0) || !value.is_finite() {
        return Err(Error::DegenerateDenominator(name));
    }
    Ok(value)
}

/// Sum of two terms, checked against cancellation to zero.
fn checked_sum(a: Complex64, b: Complex64, name: &'static str) -> Result<Complex64> {
    check_denominator(a + b, a.norm() + b.norm(), name)
}

/// Zero when `value` is rounding noise relative to the magnitude `scale` of
/// its terms, so that a vanishing radical leaves no spurious imaginary part.
fn flush(value: Complex64, scale: f64) -> Complex64 {
    if value.norm() <= 64.0 * f64::EPSILON * scale {
        Complex64::new(0.0, 0.0)
    } else {
        value
    }
}

/// Closed-form offsets `e_1, e_2, e_3` from `f_0..f_3` and `e_0`.
pub fn solve_e<T: Scalar>(f: [T; 4], e0: T, sign: SolutionSign) -> Result<OffsetTriple> {
    let [f0, f1, f2, f3] = f.map(|x| x.to_complex());
    let e0 = e0.to_complex();
    let s = sign.sign();
    let one = Complex64::new(1.0, 0.0);
    let e0s = e0 * e0;

    let n = |z: Complex64| z.norm();
    let r1_sq = flush(
        e0s * (f0 * f1 - f2 * f3) * (f0 * f2 - f1 * f3) + (f0 * f1 * f3 - f2) * (f0 * f2 * f3 - f1),
        n(e0s) * (n(f0 * f1) + n(f2 * f3)) * (n(f0 * f2) + n(f1 * f3))
            + (n(f0 * f1 * f3) + n(f2)) * (n(f0 * f2 * f3) + n(f1)),
    );
    let r2_sq = flush(
        e0s * (f0 * f1 * f2 - f3) * (f1 * f2 * f3 - f0)
            + (f0 * f1 * f2 * f3 - one) * (f1 * f2 - f0 * f3),
        n(e0s) * (n(f0 * f1 * f2) + n(f3)) * (n(f1 * f2 * f3) + n(f0))
            + (n(f0 * f1 * f2 * f3) + 1.0) * (n(f1 * f2) + n(f0 * f3)),
    );
    let rr = r1_sq.sqrt() * r2_sq.sqrt();

    let d1 = checked_sum(
        e0s * (f0 * f2 - f1 * f3) * (f0 - f1 * f2 * f3),
        (f0 * f3 - f1 * f2) * (f0 * f2 * f3 - f1),
        "e1",
    )?;
    let d2 = checked_sum(
        e0s * (f0 * f1 - f2 * f3) * (f0 * f2 - f1 * f3),
        (f0 * f1 * f3 - f2) * (f0 * f2 * f3 - f1),
        "e2",
    )?;
    let d3 = checked_sum(
        e0s * (f0 * f2 - f1 * f3) * (f0 * f1 * f2 - f3),
        (f0 * f3 - f1 * f2) * (f0 * f1 * f3 - f2),
        "e3",
    )?;

    let e1 = (e0 * f0 * f2 * (f1 * f1 - one) * (f3 * f3 - one) + s * rr) / d1;
    let e2 = (-s * rr) / d2;
    let e3 = (e0 * f1 * f3 * (f0 * f0 - one) * (f2 * f2 - one) + s * rr) / d3;
    let e = [e1, e2, e3];
    let real = e.iter().all(|z| is_real_within(*z, REAL_TOL));
    Ok(OffsetTriple {
        e,
        r1_sq,
        r2_sq,
        real,
    })
}

/// Closed-form ratios `f_1, f_2, f_3` from `f_0` and `e_0..e_3`.
pub fn solve_f<T: Scalar>(f0: T, e: [T; 4], sign: SolutionSign) -> Result<[Complex64; 3]> {
    let f0 = f0.to_complex();
    let [e0, e1, e2, e3] = e.map(|x| x.to_complex());
    let s = sign.sign();
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let (q0, q1, q2, q3) = (e0 * e0, e1 * e1, e2 * e2, e3 * e3);

    let scale = [f0, e0, e1, e2, e3]
        .iter()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    for (value, name) in [(e2, "e2"), (e3, "e3"), (f0, "f0")] {
        check_denominator(value, scale, name)?;
    }
    let g1 = checked_sum(e0 * f0, e1, "e0*f0+e1")?;
    let g2 = checked_sum(e0 * e1, -f0, "e0*e1-f0")?;
    let g3 = checked_sum(e1 * f0, e0, "e1*f0+e0")?;

    let k = (f0 * f0 + one) * e0 * e1;
    let inner = f0
        * (q0 * q1 * q2 + q0 * q1 * q3 - q0 * q2 * q3 - q1 * q2 * q3 - q0 - q1 + q2 + q3)
        - k * (q3 + one) * (q2 + one);
    let cross = two * f0 * e2 * e3 * (q1 + one) * (q0 + one);
    let rr = (inner + cross).sqrt() * (inner - cross).sqrt();

    let f1 = (-k * (q3 + one) * (q2 - one)
        + f0 * (q0 * q1 * q2 - q0 * q1 * q3 - q0 * q2 * q3 - q1 * q2 * q3 + q0 + q1 + q2 - q3)
        + s * rr)
        / (two * e2 * (q3 + one) * g1 * g2);
    let f2 = (k * (q3 + one) * (q2 + one)
        - f0 * (q0 * q1 * q2 + q0 * q1 * q3 - q0 * q2 * q3 - q1 * q2 * q3 - q0 - q1 + q2 + q3)
        - s * rr)
        / (two * e2 * e3 * f0 * (q1 + one) * (q0 + one));
    let f3 = (-k * (q3 - one) * (q2 + one)
        - f0 * (q0 * q1 * q2 - q0 * q1 * q3 + q0 * q2 * q3 + q1 * q2 * q3 - q0 - q1 + q2 - q3)
        + s * rr)
        / (two * e3 * (q2 + one) * g3 * g2);
    Ok([f1, f2, f3])
}

/// Input of the block constructor. Exactly one of `d` (`tan(δ_i/2)`) and `f`
/// is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VHedraInput {
    pub polygon: SpatialPolygon,
    pub e0: f64,
    pub d: Option<[f64; 4]>,
    pub f: Option<[f64; 4]>,
    pub branch: [Branch; 4],
    pub sign: SolutionSign,
}

impl VHedraInput {
    pub fn with_d(polygon: SpatialPolygon, d: [f64; 4], e0: f64) -> Self {
        Self {
            polygon,
            e0,
            d: Some(d),
            f: None,
            branch: [Branch::Minus; 4],
            sign: SolutionSign::Upper,
        }
    }

    pub fn with_f(polygon: SpatialPolygon, f: [f64; 4], branch: [Branch; 4], e0: f64) -> Self {
        Self {
            polygon,
            e0,
            d: None,
            f: Some(f),
            branch,
            sign: SolutionSign::Upper,
        }
    }
}

/// `e_0` from the offset angle, rejecting `ε_0 = π`.
pub fn e0_from_epsilon(epsilon: f64) -> Result<f64> {
    crate::closure::offset_from_zeta(epsilon, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VHedraSolution {
    pub lambda: [f64; 4],
    pub delta: [f64; 4],
    pub f: [f64; 4],
    pub e: [Complex64; 4],
    pub r1_sq: Option<Complex64>,
    pub r2_sq: Option<Complex64>,
    /// Scaled `|q2|, |q1|, |q0|` over complex arithmetic.
    pub residuals: [f64; 3],
    pub residual: f64,
    pub real: bool,
    /// Denominator that vanished when the numerical solver was used instead.
    pub fallback: Option<String>,
}

impl VHedraSolution {
    pub fn real_e(&self) -> Option<[f64; 4]> {
        self.real.then(|| self.e.map(|z| z.re))
    }

    pub fn max_imag(&self) -> f64 {
        self.e.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Solves for the offsets without requiring a real solution.
pub fn solve(input: &VHedraInput, tol: &Tolerances) -> Result<VHedraSolution> {
    if input.polygon.len() != 4 {
        return Err(Error::Precondition(format!(
            "expected a quadrilateral, got {} vertices",
            input.polygon.len()
        )));
    }
    if !input.e0.is_finite() {
        return Err(Error::PoleNotRepresentable);
    }
    let lambda: [f64; 4] = bar_lengths(&input.polygon)?
        .try_into()
        .expect("four vertices");
    let (delta, f) = match (input.d, input.f) {
        (Some(d), None) => {
            let mut delta = [0.0; 4];
            let mut f = [0.0; 4];
            for i in 0..4 {
                if !(d[i] > 0.0 && d[i].is_finite()) {
                    return Err(Error::AngleOutOfRange {
                        name: "delta",
                        value: 2.0 * d[i].atan(),
                    });
                }
                delta[i] = 2.0 * d[i].atan();
                let geom = IsogramGeometry::new(delta[i], lambda[i], input.branch[i], tol.geom)?;
                f[i] = transmission_ratio(&geom)?.value();
            }
            (delta, f)
        }
        (None, Some(f)) => {
            let mut delta = [0.0; 4];
            for i in 0..4 {
                delta[i] =
                    recover_delta(TransmissionRatio::new(f[i])?, lambda[i], input.branch[i])?;
            }
            (delta, f)
        }
        _ => {
            return Err(Error::Problem(
                "exactly one of `d` and `f` must be given".into(),
            ))
        }
    };

    let (e, r1_sq, r2_sq, fallback) = match solve_e(f, input.e0, input.sign) {
        Ok(t) => (
            [input.e0.into(), t.e[0], t.e[1], t.e[2]],
            Some(t.r1_sq),
            Some(t.r2_sq),
            None,
        ),
        Err(Error::DegenerateDenominator(name)) => {
            let fc: Vec<Complex64> = f.iter().map(|x| x.to_complex()).collect();
            let sols = solve_offsets(&fc, &[Some(input.e0.into()), None, None, None], tol.alg)?;
            let pick = sols.iter().find(|s| s.real).unwrap_or(&sols[0]);
            let e: [Complex64; 4] = pick.e.clone().try_into().expect("four offsets");
            (e, None, None, Some(name.to_string()))
        }
        Err(err) => return Err(err),
    };
    let belt = BeltSpec::new(f.map(|x| x.to_complex()).to_vec(), e.to_vec())?;
    let report = is_flexible(&belt, tol.alg);
    let real = e.iter().all(|z| is_real_within(*z, REAL_TOL));
    Ok(VHedraSolution {
        lambda,
        delta,
        f,
        e,
        r1_sq,
        r2_sq,
        residuals: report.residuals,
        residual: report.residual,
        real,
        fallback,
    })
}

/// Parameters of a real flexible block from a solved input.
pub fn block_from_solution(
    input: &VHedraInput,
    sol: &VHedraSolution,
    tol: &Tolerances,
) -> Result<BlockParameters> {
    let e = sol.real_e().ok_or(Error::NonRealSolution {
        max_imag: sol.max_imag(),
    })?;
    let block = BlockParameters::from_belt(
        input.polygon.clone(),
        &sol.delta,
        &input.branch,
        &e,
        tol.geom,
    )?;
    let residual = is_flexible(&block.belt()?, tol.alg).residual;
    if residual >= tol.alg {
        return Err(Error::NotFlexible { residual });
    }
    Ok(block)
}

pub fn build_block(input: &VHedraInput, tol: &Tolerances) -> Result<BlockParameters> {
    block_from_solution(input, &solve(input, tol)?, tol)
}
