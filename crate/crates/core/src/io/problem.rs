//! Problem files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flexion::OuterLengths;
use crate::isogram::Branch;
use crate::sphkin::SpatialPolygon;
use crate::tol::Tolerances;
use crate::vhedra::SolutionSign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VhedraSolve,
    Closure,
    Flex,
    Reciprocal,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::VhedraSolve => "vhedra-solve",
            Mode::Closure => "closure",
            Mode::Flex => "flex",
            Mode::Reciprocal => "reciprocal",
            Mode::Verify => "verify",
        }
    }
}

/// `"auto"` or an explicit `[lo, hi]` interval of driving angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepRange {
    Keyword(String),
    Interval([f64; 2]),
}

impl Default for SweepRange {
    fn default() -> Self {
        SweepRange::Keyword("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub range: SweepRange,
}

fn default_samples() -> usize {
    20
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            range: SweepRange::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Uniform(f64),
    PerEdge { a: Vec<f64>, b: Vec<f64> },
}

/// A JSON problem description. Field names follow the usual symbols:
/// `d_i = tan(δ_i/2)`, `f_i` transmission ratios, `e_i` offset half-tangents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub mode: Mode,
    pub polygon: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    /// Known offsets; `null` entries are solved for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Vec<Branch>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_sign: Option<SolutionSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_lengths: Option<LengthSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let problem: Self = serde_json::from_str(text)?;
        problem.validate()?;
        Ok(problem)
    }

    pub fn n(&self) -> usize {
        self.polygon.len()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    /// Count and range checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let bad = |field: &str, msg: String| Err(Error::Problem(format!("field `{field}`: {msg}")));
        if n < 3 {
            return bad("polygon", format!("needs at least 3 vertices, got {n}"));
        }
        if self.polygon.iter().flatten().any(|x| !x.is_finite()) {
            return bad("polygon", "coordinates must be finite".into());
        }
        for (name, list) in [("d", &self.d), ("f", &self.f)] {
            if let Some(v) = list {
                if v.len() != n {
                    return bad(name, format!("expected {n} values, got {}", v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return bad(name, "values must be finite".into());
                }
            }
        }
        if self.d.is_some() && self.f.is_some() {
            return bad("d", "give either `d` or `f`, not both".into());
        }
        if self.d.is_none() && self.f.is_none() {
            return bad("f", "one of `d` and `f` is required".into());
        }
        if let Some(e) = &self.e {
            if e.len() != n {
                return bad("e", format!("expected {n} entries, got {}", e.len()));
            }
            if e.iter().flatten().any(|x| !x.is_finite()) {
                return bad("e", "values must be finite".into());
            }
            if let (Some(e0), Some(Some(first))) = (self.e0, e.first()) {
                if e0 != *first {
                    return bad("e0", format!("disagrees with e[0] = {first}"));
                }
            }
        }
        if self.e0.is_some_and(|x| !x.is_finite()) {
            return bad("e0", "must be finite".into());
        }
        if let Some(b) = &self.branch {
            if b.len() != n {
                return bad("branch", format!("expected {n} entries, got {}", b.len()));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.samples == 0 {
                return bad("sweep.samples", "must be at least 1".into());
            }
            match &sweep.range {
                SweepRange::Keyword(k) if k != "auto" => {
                    return bad("sweep.range", format!("unknown keyword {k:?}"))
                }
                SweepRange::Interval([lo, hi])
                    if !(lo.is_finite() && hi.is_finite() && lo <= hi) =>
                {
                    return bad(
                        "sweep.range",
                        "expected finite [lo, hi] with lo <= hi".into(),
                    )
                }
                _ => {}
            }
        }
        if let Some(LengthSpec::PerEdge { a, b }) = &self.outer_lengths {
            if a.len() != n || b.len() != n {
                return bad("outer_lengths", format!("expected {n} lengths per side"));
            }
        }
        if let Some(t) = &self.tolerances {
            if [t.geom, t.alg, t.rigid]
                .iter()
                .any(|x| !(*x > 0.0 && x.is_finite()))
            {
                return bad("tolerances", "must be positive".into());
            }
        }
        if matches!(self.mode, Mode::VhedraSolve) && n != 4 {
            return bad(
                "polygon",
                format!("vhedra-solve needs a quadrilateral, got {n} vertices"),
            );
        }
        Ok(())
    }

    pub fn polygon(&self) -> Result<SpatialPolygon> {
        SpatialPolygon::from_points(&self.polygon, self.tolerances().geom)
    }

    pub fn branches(&self) -> Vec<Branch> {
        self.branch
            .clone()
            .unwrap_or_else(|| vec![Branch::Minus; self.n()])
    }

    pub fn sign(&self) -> SolutionSign {
        self.solution_sign.unwrap_or_default()
    }

    /// Known offsets, with `e0` filling the first slot.
    pub fn known_e(&self) -> Vec<Option<f64>> {
        let mut e = self.e.clone().unwrap_or_else(|| vec![None; self.n()]);
        if e[0].is_none() {
            e[0] = self.e0;
        }
        e
    }

    pub fn sweep(&self) -> SweepSpec {
        self.sweep.clone().unwrap_or_default()
    }

    pub fn outer_lengths(&self) -> OuterLengths {
        match &self.outer_lengths {
            None => OuterLengths::uniform(self.n(), 1.0),
            Some(LengthSpec::Uniform(l)) => OuterLengths::uniform(self.n(), *l),
            Some(LengthSpec::PerEdge { a, b }) => OuterLengths {
                a: a.clone(),
                b: b.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "mode": "vhedra-solve",
        "polygon": [[5,0,0],[4,3,0],[1,2,2],[0,0,0]],
        "d": [0.3, 0.15, 0.2, 0.25],
        "e0": 100
    }"#;

    #[test]
    fn parses_and_defaults() {
        let p = ProblemFile::from_json(EXAMPLE).unwrap();
        assert_eq!(p.mode, Mode::VhedraSolve);
        assert_eq!(p.branches(), vec![Branch::Minus; 4]);
        assert_eq!(p.sign(), SolutionSign::Upper);
        assert_eq!(p.known_e(), vec![Some(100.0), None, None, None]);
        assert_eq!(p.sweep(), SweepSpec::default());
        assert_eq!(p.outer_lengths(), OuterLengths::uniform(4, 1.0));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let missing = ProblemFile::from_json(r#"{"mode": "closure"}"#)
            .unwrap_err()
            .to_string();
        assert!(
            missing.contains("polygon") && missing.contains("line"),
            "{missing}"
        );
        let both = EXAMPLE.replace("\"e0\"", "\"f\": [1,1,1,1], \"e0\"");
        assert!(ProblemFile::from_json(&both)
            .unwrap_err()
            .to_string()
            .contains("`d`"));
        let short = EXAMPLE.replace("0.3, ", "");
        assert!(ProblemFile::from_json(&short)
            .unwrap_err()
            .to_string()
            .contains("`d`"));
        let unknown = EXAMPLE.replace("\"e0\"", "\"e00\"");
        assert!(ProblemFile::from_json(&unknown)
            .unwrap_err()
            .to_string()
            .contains("e00"));
        let mode = EXAMPLE.replace("vhedra-solve", "solve");
        assert!(ProblemFile::from_json(&mode).is_err());
        let range = EXAMPLE.replace("\"e0\"", "\"sweep\": {\"range\": \"all\"}, \"e0\"");
        assert!(ProblemFile::from_json(&range)
            .unwrap_err()
            .to_string()
            .contains("sweep.range"));
    }
}
