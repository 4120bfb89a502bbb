//! Running problem files and re-checking reports.

use serde_json::{json, Map, Value};

use crate::belt::BlockParameters;
use crate::closure::{is_flexible, solve_offsets, BeltSpec, FlexibilityReport};
use crate::error::{Error, Result};
use crate::flexion::{auto_samples, flex_sweep, FlexionTrace, HingeKind};
use crate::io::json::to_canonical_string;
use crate::io::obj::{block_obj, dual_obj};
use crate::io::problem::{Mode, ProblemFile, SweepRange};
use crate::isogram::{recover_delta, transmission_ratio, IsogramGeometry, TransmissionRatio};
use crate::reciprocal::{second_reciprocal_dimension, verify_cylindrical_deformation};
use crate::scalar::Scalar;
use crate::sphkin::{bar_lengths, torsion_angles, SpatialPolygon};
use crate::tol::Tolerances;
use crate::vhedra::{self, VHedraInput};
use crate::Complex64;

pub const REPORT_FORMAT: &str = "flexbelt-report";
pub const REPORT_VERSION: u64 = 1;

/// Dual star angles along a sweep must hold to this.
pub const STAR_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    NonReal,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NonReal => 2,
            Status::Failed => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NonReal => "non-real",
            Status::Failed => "failed",
        }
    }
}

/// A named text file produced by a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub artifacts: Vec<Artifact>,
    pub status: Status,
}

impl Outcome {
    pub fn report_text(&self) -> String {
        to_canonical_string(&self.report)
    }
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn closure_section<T: Scalar>(report: &FlexibilityReport<T>) -> Value {
    let [q2, q1, q0] = report
        .quadratic
        .coefficients()
        .map(|q| complex(q.to_complex()));
    json!({
        "q2": q2,
        "q1": q1,
        "q0": q0,
        "scale": report.scale,
        "residuals": report.residuals,
        "residual": report.residual,
        "flexible": report.flexible,
    })
}

fn belt_section(f: &[f64], e: &[Complex64]) -> Value {
    json!({
        "f": f,
        "e": e.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "product_f": f.iter().product::<f64>(),
    })
}

fn block_section(block: &BlockParameters) -> Value {
    Value::Array(
        block
            .vertices
            .iter()
            .map(|v| {
                let mut entry = serde_json::to_value(v).expect("vertex data serialises");
                entry["d"] = json!(v.d());
                entry
            })
            .collect(),
    )
}

/// Crank lengths `δ` and ratios `f` from whichever of `d`, `f` was given.
fn deltas(
    problem: &ProblemFile,
    polygon: &SpatialPolygon,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let lambda = bar_lengths(polygon)?;
    let branch = problem.branches();
    match (&problem.d, &problem.f) {
        (Some(d), None) => {
            let mut delta = Vec::new();
            let mut f = Vec::new();
            for i in 0..d.len() {
                if d[i] <= 0.0 {
                    return Err(Error::AngleOutOfRange {
                        name: "delta",
                        value: 2.0 * d[i].atan(),
                    });
                }
                delta.push(2.0 * d[i].atan());
                f.push(
                    transmission_ratio(&IsogramGeometry::new(
                        delta[i], lambda[i], branch[i], tol.geom,
                    )?)?
                    .value(),
                );
            }
            Ok((delta, f))
        }
        (None, Some(f)) => {
            let delta = (0..f.len())
                .map(|i| recover_delta(TransmissionRatio::new(f[i])?, lambda[i], branch[i]))
                .collect::<Result<Vec<_>>>()?;
            Ok((delta, f.clone()))
        }
        _ => Err(Error::Problem(
            "exactly one of `d` and `f` must be given".into(),
        )),
    }
}

fn vhedra_input(problem: &ProblemFile, polygon: SpatialPolygon) -> Result<VHedraInput> {
    let four = |v: &Vec<f64>| -> [f64; 4] { v.clone().try_into().expect("validated length") };
    let e0 = problem.known_e()[0].ok_or_else(|| Error::Problem("field `e0`: required".into()))?;
    Ok(VHedraInput {
        polygon,
        e0,
        d: problem.d.as_ref().map(four),
        f: problem.f.as_ref().map(four),
        branch: problem.branches().try_into().expect("validated length"),
        sign: problem.sign(),
    })
}

struct Builder {
    report: Map<String, Value>,
    warnings: Vec<String>,
    artifacts: Vec<Artifact>,
}

impl Builder {
    fn set(&mut self, key: &str, value: Value) {
        self.report.insert(key.to_string(), value);
    }

    fn finish(mut self, status: Status) -> Outcome {
        let warnings = std::mem::take(&mut self.warnings);
        self.set("warnings", json!(warnings));
        self.set("status", json!(status.name()));
        Outcome {
            report: Value::Object(self.report),
            artifacts: self.artifacts,
            status,
        }
    }
}

/// Solves a problem file. Failures that still leave a meaningful report are
/// recorded as warnings with a failed status; the rest are returned as errors.
pub fn run(problem: &ProblemFile) -> Result<Outcome> {
    problem.validate()?;
    let tol = problem.tolerances();
    let polygon = problem.polygon()?;
    let mut b = Builder {
        report: Map::new(),
        warnings: Vec::new(),
        artifacts: Vec::new(),
    };
    b.set("format", json!(REPORT_FORMAT));
    b.set("version", json!(REPORT_VERSION));
    b.set("mode", json!(problem.mode.name()));
    b.set("problem", serde_json::to_value(problem)?);
    b.set(
        "polygon",
        json!({ "lambda": bar_lengths(&polygon)?, "tau": torsion_angles(&polygon)? }),
    );

    let status = match problem.mode {
        Mode::VhedraSolve => run_vhedra(problem, polygon, &tol, &mut b)?,
        Mode::Closure | Mode::Verify => run_closure(problem, &polygon, &tol, &mut b)?,
        Mode::Flex | Mode::Reciprocal => match obtain_block(problem, polygon, &tol, &mut b)? {
            Ok(block) => run_sweep(problem, &block, &tol, &mut b)?,
            Err(status) => status,
        },
    };
    Ok(b.finish(status))
}

fn run_vhedra(
    problem: &ProblemFile,
    polygon: SpatialPolygon,
    tol: &Tolerances,
    b: &mut Builder,
) -> Result<Status> {
    if problem.known_e()[1..].iter().any(Option::is_some) {
        return Err(Error::Problem(
            "field `e`: vhedra-solve takes only e0".into(),
        ));
    }
    let input = vhedra_input(problem, polygon)?;
    let sol = vhedra::solve(&input, tol)?;
    let belt = BeltSpec::new(sol.f.map(|x| x.to_complex()).to_vec(), sol.e.to_vec())?;
    b.set("belt", belt_section(&sol.f, &sol.e));
    b.set("closure", closure_section(&is_flexible(&belt, tol.alg)));
    b.set(
        "vhedra",
        json!({
            "sign": input.sign.name(),
            "lambda": sol.lambda,
            "delta": sol.delta,
            "d": sol.delta.map(|x| (0.5 * x).tan()),
            "r1_sq": sol.r1_sq.map(complex),
            "r2_sq": sol.r2_sq.map(complex),
            "real": sol.real,
            "max_imag": sol.max_imag(),
            "fallback": sol.fallback,
        }),
    );
    if let Some(name) = &sol.fallback {
        b.warnings.push(format!(
            "closed form degenerate at {name}; offsets solved numerically"
        ));
    }
    if !sol.real {
        b.warnings.push(format!(
            "offsets are not real (max |Im e| = {:e})",
            sol.max_imag()
        ));
        return Ok(Status::NonReal);
    }
    match vhedra::block_from_solution(&input, &sol, tol) {
        Ok(block) => {
            b.set("block", block_section(&block));
            Ok(Status::Ok)
        }
        Err(err @ Error::NotFlexible { .. }) => {
            b.warnings.push(err.to_string());
            Ok(Status::Failed)
        }
        Err(err) => Err(err),
    }
}

fn run_closure(
    problem: &ProblemFile,
    polygon: &SpatialPolygon,
    tol: &Tolerances,
    b: &mut Builder,
) -> Result<Status> {
    let (delta, f) = deltas(problem, polygon, tol)?;
    let known = problem.known_e();
    b.set("delta", json!(delta));
    if let Some(e) = known.iter().copied().collect::<Option<Vec<f64>>>() {
        let report = is_flexible(&BeltSpec::new(f.clone(), e.clone())?, tol.alg);
        let ec: Vec<Complex64> = e.iter().map(|&x| x.into()).collect();
        b.set("belt", belt_section(&f, &ec));
        b.set("closure", closure_section(&report));
        if !report.flexible {
            b.warnings.push(format!(
                "belt is not flexible: closure residual {:e}",
                report.residual
            ));
            return Ok(Status::Failed);
        }
        return Ok(Status::Ok);
    }
    if problem.mode == Mode::Verify {
        return Err(Error::Problem(
            "field `e`: verify needs every offset".into(),
        ));
    }
    let fc: Vec<Complex64> = f.iter().map(|&x| x.into()).collect();
    let kc: Vec<Option<Complex64>> = known.iter().map(|k| k.map(Complex64::from)).collect();
    let solutions = solve_offsets(&fc, &kc, tol.alg)?;
    b.set(
        "belt",
        json!({ "f": f, "product_f": f.iter().product::<f64>() }),
    );
    b.set(
        "solutions",
        Value::Array(
            solutions
                .iter()
                .map(|s| {
                    json!({
                        "e": s.e.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
                        "residual": s.residual,
                        "real": s.real,
                    })
                })
                .collect(),
        ),
    );
    if solutions.iter().any(|s| s.real) {
        Ok(Status::Ok)
    } else {
        b.warnings.push("no real offset solution".into());
        Ok(Status::NonReal)
    }
}

/// The block for a sweep: from fully given offsets, or solved on a quadrilateral.
fn obtain_block(
    problem: &ProblemFile,
    polygon: SpatialPolygon,
    tol: &Tolerances,
    b: &mut Builder,
) -> Result<std::result::Result<BlockParameters, Status>> {
    let known = problem.known_e();
    let block = if let Some(e) = known.iter().copied().collect::<Option<Vec<f64>>>() {
        let (delta, _) = deltas(problem, &polygon, tol)?;
        BlockParameters::from_belt(polygon, &delta, &problem.branches(), &e, tol.geom)?
    } else if problem.n() == 4 && known[1..].iter().all(Option::is_none) {
        let input = vhedra_input(problem, polygon)?;
        let sol = vhedra::solve(&input, tol)?;
        if !sol.real {
            b.warnings.push(format!(
                "offsets are not real (max |Im e| = {:e})",
                sol.max_imag()
            ));
            b.set("belt", belt_section(&sol.f, &sol.e));
            return Ok(Err(Status::NonReal));
        }
        BlockParameters::from_belt(
            input.polygon.clone(),
            &sol.delta,
            &input.branch,
            &sol.real_e().expect("real"),
            tol.geom,
        )?
    } else {
        return Err(Error::Problem(
            "field `e`: give every offset, or only e0 on a quadrilateral".into(),
        ));
    };
    let report = is_flexible(&block.belt()?, tol.alg);
    let ec: Vec<Complex64> = block.e().iter().map(|&x| x.into()).collect();
    b.set("belt", belt_section(&block.f(), &ec));
    b.set("closure", closure_section(&report));
    b.set("block", block_section(&block));
    if !report.flexible {
        b.warnings.push(format!(
            "belt is not flexible: closure residual {:e}",
            report.residual
        ));
        return Ok(Err(Status::Failed));
    }
    Ok(Ok(block))
}

fn samples(problem: &ProblemFile, block: &BlockParameters) -> Result<Vec<f64>> {
    let spec = problem.sweep();
    match spec.range {
        SweepRange::Interval([lo, _]) if spec.samples == 1 => Ok(vec![lo]),
        SweepRange::Interval([lo, hi]) => {
            let last = (spec.samples - 1) as f64;
            Ok((0..spec.samples)
                .map(|k| lo + (hi - lo) * k as f64 / last)
                .collect())
        }
        SweepRange::Keyword(_) => auto_samples(block, spec.samples),
    }
}

fn hinge_name(kind: HingeKind) -> String {
    match kind {
        HingeKind::Central(i) => format!("central_{i}"),
        HingeKind::OuterA(i) => format!("outer_a_{i}"),
        HingeKind::OuterB(i) => format!("outer_b_{i}"),
    }
}

fn sweep_section(trace: &FlexionTrace, tol: &Tolerances) -> Value {
    json!({
        "hinges": trace.hinges.iter().map(|h| hinge_name(*h)).collect::<Vec<_>>(),
        "intervals": trace.intervals,
        "checks": trace.checks,
        "passed": trace.checks.passed(tol),
        "samples": trace.samples.iter().map(|s| json!({
            "driving": s.driving,
            "chain_closure": s.config.closure_residual,
            "dihedral": s.dihedral,
            "rotation": s.rotation,
        })).collect::<Vec<_>>(),
    })
}

fn run_sweep(
    problem: &ProblemFile,
    block: &BlockParameters,
    tol: &Tolerances,
    b: &mut Builder,
) -> Result<Status> {
    let samples = samples(problem, block)?;
    let trace = match flex_sweep(block, &samples, &problem.outer_lengths(), None, tol) {
        Ok(trace) => trace,
        Err(err @ Error::RangeExceeded { .. }) => {
            if let Error::RangeExceeded { intervals, .. } = &err {
                b.set("sweep", json!({ "intervals": intervals }));
            }
            b.warnings.push(err.to_string());
            return Ok(Status::Failed);
        }
        Err(err) => return Err(err),
    };
    b.set("sweep", sweep_section(&trace, tol));
    let mut passed = trace.checks.passed(tol);
    if !passed {
        b.warnings.push("sweep invariant checks failed".into());
    }
    if problem.mode == Mode::Flex {
        for (k, s) in trace.samples.iter().enumerate() {
            let header = format!(
                "frame {k} driving {}",
                crate::io::json::format_float(s.driving)
            );
            b.artifacts.push(Artifact {
                name: format!("frame_{k:04}.obj"),
                contents: block_obj(&s.block, &header),
            });
        }
    } else {
        match verify_cylindrical_deformation(&trace) {
            Ok(report) => {
                let first = &report.meshes[0];
                let second = second_reciprocal_dimension(first, &trace.samples[0].block);
                let ok = report.passed(STAR_TOL, tol.rigid);
                b.set(
                    "reciprocal",
                    json!({
                        "dimension": first.dimension,
                        "second_dimension": second,
                        "unit_hinge": hinge_name(trace.hinges[first.unit_hinge]),
                        "parallelism": report.parallelism,
                        "star_angle_deviation": report.star_angle_deviation,
                        "length_ranges": report.length_ranges,
                        "passed": ok,
                        "samples": report.meshes.iter().zip(&trace.samples).map(|(m, s)| json!({
                            "driving": s.driving,
                            "points": m.points.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>(),
                            "t": m.edges.iter().map(|e| e.t).collect::<Vec<_>>(),
                        })).collect::<Vec<_>>(),
                    }),
                );
                for (k, (m, s)) in report.meshes.iter().zip(&trace.samples).enumerate() {
                    let header = format!(
                        "dual {k} driving {}",
                        crate::io::json::format_float(s.driving)
                    );
                    b.artifacts.push(Artifact {
                        name: format!("dual_{k:04}.obj"),
                        contents: dual_obj(m, &s.block, &header),
                    });
                }
                if !ok {
                    b.warnings
                        .push("dual vertex stars are not rigid along the sweep".into());
                }
                passed &= ok;
            }
            Err(
                err @ (Error::NoNontrivialSolution { dimension }
                | Error::AmbiguousSolution { dimension }),
            ) => {
                b.set("reciprocal", json!({ "dimension": dimension }));
                b.warnings.push(err.to_string());
                passed = false;
            }
            Err(err) => return Err(err),
        }
    }
    Ok(if passed { Status::Ok } else { Status::Failed })
}

/// Result of re-checking a report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub messages: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.messages.is_empty()
    }
}

fn complex_list(v: &Value) -> Option<Vec<Complex64>> {
    v.as_array()?
        .iter()
        .map(|z| Some(Complex64::new(z.get(0)?.as_f64()?, z.get(1)?.as_f64()?)))
        .collect()
}

fn real_list(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(Value::as_f64).collect()
}

/// Recomputes the closure residual from the reported `f`, `e` and then the
/// whole report from its echoed problem.
pub fn verify_report(text: &str) -> Result<Verification> {
    let report: Value = serde_json::from_str(text)?;
    if report.get("format").and_then(Value::as_str) != Some(REPORT_FORMAT) {
        return Err(Error::Problem(
            "field `format`: not a flexbelt report".into(),
        ));
    }
    let problem: ProblemFile = serde_json::from_value(report["problem"].clone())?;
    problem.validate()?;
    let tol = problem.tolerances();
    let mut messages = Vec::new();

    if let Some(f) = real_list(&report["belt"]["f"]) {
        let fc: Vec<Complex64> = f.iter().map(|&x| x.into()).collect();
        let mut claims: Vec<(String, Vec<Complex64>, f64)> = Vec::new();
        if let (Some(e), Some(r)) = (
            complex_list(&report["belt"]["e"]),
            report["closure"]["residual"].as_f64(),
        ) {
            claims.push(("closure".into(), e, r));
        }
        if let Some(sols) = report["solutions"].as_array() {
            for (k, s) in sols.iter().enumerate() {
                if let (Some(e), Some(r)) = (complex_list(&s["e"]), s["residual"].as_f64()) {
                    claims.push((format!("solutions[{k}]"), e, r));
                }
            }
        }
        for (name, e, claimed) in claims {
            let recomputed = is_flexible(&BeltSpec::new(fc.clone(), e)?, tol.alg).residual;
            if (claimed < tol.alg) != (recomputed < tol.alg)
                || (recomputed - claimed).abs() > tol.alg
            {
                messages.push(format!(
                    "q-residual ({name}): reported {claimed:e}, recomputed {recomputed:e} from the reported f and e"
                ));
            }
        }
    }

    let fresh = run(&problem)?.report;
    if let Some(path) = first_difference(&report, &fresh, "") {
        messages.push(path);
    }
    Ok(Verification { messages })
}

const COMPARE_TOL: f64 = 1e-9;

fn first_difference(reported: &Value, fresh: &Value, path: &str) -> Option<String> {
    let mismatch = || {
        Some(format!(
            "mismatch at {}: reported {reported}, recomputed {fresh}",
            if path.is_empty() { "/" } else { path }
        ))
    };
    match (reported, fresh) {
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
            keys.sort();
            keys.dedup();
            for key in keys {
                if path.is_empty() && key == "problem" {
                    continue;
                }
                let sub = format!("{path}/{key}");
                match (a.get(key), b.get(key)) {
                    (Some(x), Some(y)) => {
                        if let Some(d) = first_difference(x, y, &sub) {
                            return Some(d);
                        }
                    }
                    (x, y) => {
                        return Some(format!(
                            "mismatch at {sub}: reported {}, recomputed {}",
                            x.map_or("nothing".into(), Value::to_string),
                            y.map_or("nothing".into(), Value::to_string)
                        ))
                    }
                }
            }
            None
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return mismatch();
            }
            a.iter()
                .zip(b)
                .enumerate()
                .find_map(|(k, (x, y))| first_difference(x, y, &format!("{path}/{k}")))
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            let scale = 1.0f64.max(x.abs()).max(y.abs());
            if (x - y).abs() <= COMPARE_TOL * scale {
                None
            } else {
                mismatch()
            }
        }
        (a, b) if a == b => None,
        _ => mismatch(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(mode: &str) -> ProblemFile {
        ProblemFile::from_json(&format!(
            r#"{{"mode": "{mode}", "polygon": [[5,0,0],[4,3,0],[1,2,2],[0,0,0]], "d": [0.3,0.15,0.2,0.25], "e0": 100,
                "sweep": {{"samples": 8}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn vhedra_report_and_verify() {
        let out = run(&example("vhedra-solve")).unwrap();
        assert_eq!(out.status, Status::Ok);
        let e = complex_list(&out.report["belt"]["e"]).unwrap();
        assert!((e[1].re + 0.86081001).abs() < 1e-6);
        let text = out.report_text();
        assert_eq!(text, run(&example("vhedra-solve")).unwrap().report_text());
        assert!(verify_report(&text).unwrap().ok());
    }

    #[test]
    fn edited_digit_names_q_residual() {
        let text = run(&example("vhedra-solve")).unwrap().report_text();
        let e1 = crate::io::json::format_float(
            complex_list(&serde_json::from_str::<Value>(&text).unwrap()["belt"]["e"]).unwrap()[1]
                .re,
        );
        let mut edited = e1.clone();
        // bump the third decimal digit
        let pos = edited.find('.').unwrap() + 3;
        let digit = edited.as_bytes()[pos] - b'0';
        edited.replace_range(pos..pos + 1, &(((digit + 1) % 10) as u32).to_string());
        let tampered = text.replacen(&e1, &edited, 1);
        assert_ne!(tampered, text);
        let v = verify_report(&tampered).unwrap();
        assert!(!v.ok());
        assert!(v.messages[0].contains("q-residual"), "{:?}", v.messages);
    }

    #[test]
    fn edited_tolerance_still_verifies() {
        let mut problem = example("vhedra-solve");
        let text = run(&problem).unwrap().report_text();
        let mut report: Value = serde_json::from_str(&text).unwrap();
        problem.tolerances = Some(Tolerances {
            alg: 1e-8,
            ..Tolerances::default()
        });
        report["problem"] = serde_json::to_value(&problem).unwrap();
        assert!(verify_report(&to_canonical_string(&report)).unwrap().ok());
    }

    #[test]
    fn flex_frames_and_reciprocal() {
        let out = run(&example("flex")).unwrap();
        assert_eq!(out.status, Status::Ok, "{}", out.report["sweep"]["checks"]);
        assert_eq!(out.artifacts.len(), 8);
        assert_eq!(out.artifacts[0].name, "frame_0000.obj");
        assert!(out.report["sweep"]["passed"].as_bool().unwrap());
        let rec = run(&example("reciprocal")).unwrap();
        assert_eq!(rec.status, Status::Ok, "{}", rec.report["warnings"]);
        assert_eq!(rec.report["reciprocal"]["dimension"], json!(4));
        assert_eq!(rec.artifacts[0].name, "dual_0000.obj");
    }

    #[test]
    fn explicit_interval_sweep() {
        let mut p = example("flex");
        p.sweep = Some(crate::io::problem::SweepSpec {
            samples: 2,
            range: SweepRange::Interval([0.0, 1.0]),
        });
        assert_eq!(run(&p).unwrap().status, Status::Ok);
    }

    #[test]
    fn closure_modes() {
        let planar = r#"{"mode": "closure", "polygon": [[0,0,0],[4,0,0],[5,3,0],[1,2.5,0]],
            "f": [0.5, 0.8, 1.6, 1.5625], "branch": ["minus","minus","plus","plus"], "e": [0,0,0,0]}"#;
        let out = run(&ProblemFile::from_json(planar).unwrap()).unwrap();
        assert_eq!(out.status, Status::Ok);
        assert!((out.report["belt"]["product_f"].as_f64().unwrap() - 1.0).abs() < 1e-15);
        let rigid = planar.replace("1.5625", "1.5");
        assert_eq!(
            run(&ProblemFile::from_json(&rigid).unwrap())
                .unwrap()
                .status,
            Status::Failed
        );
        let solve = planar.replace("[0,0,0,0]", "[0,null,null,null]");
        let out = run(&ProblemFile::from_json(&solve).unwrap()).unwrap();
        assert!(!out.report["solutions"].as_array().unwrap().is_empty());
        assert!(verify_report(&out.report_text()).unwrap().ok());
    }
}
