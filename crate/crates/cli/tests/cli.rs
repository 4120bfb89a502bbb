use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn flexbelt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexbelt"))
        .args(args)
        .env_remove("FLEXBELT_TOL")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn solve_example_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = flexbelt(&[
        "solve-vhedra",
        path(&fixture("skew_quad.json")),
        "-o",
        path(&report),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = read_json(&report);
    assert!((r["belt"]["e"][1][0].as_f64().unwrap() + 0.86081001).abs() < 1e-6);
    assert_eq!(r["closure"]["flexible"], Value::Bool(true));
    assert_eq!(r["status"], "ok");
}

#[test]
fn planar_fixture_reports_unit_product() {
    let out = flexbelt(&["solve-vhedra", path(&fixture("planar.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["closure"]["flexible"], Value::Bool(true));
    assert!((r["belt"]["product_f"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    for e in r["belt"]["e"].as_array().unwrap() {
        assert_eq!(e[0].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn malformed_problem_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\n  \"mode\": \"closure\",\n  \"polygon\": [[0, 0, 0],\n",
    )
    .unwrap();
    let out = flexbelt(&["closure", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line"), "{msg}");

    std::fs::write(
        &bad,
        r#"{"mode": "closure", "polygon": [[0,0,0],[1,0,0],[0,1,0]], "f": [1, 1]}"#,
    )
    .unwrap();
    let out = flexbelt(&["closure", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`f`"));
}

#[test]
fn non_real_offsets_exit_two() {
    let out = flexbelt(&[
        "solve-vhedra",
        path(&fixture("skew_quad.json")),
        "--sign",
        "lower",
        "--branch",
        "plus,plus,plus,plus",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "non-real");
    assert_eq!(r["problem"]["solution_sign"], "lower");
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(flexbelt(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        flexbelt(&[
            "solve-vhedra",
            path(&fixture("skew_quad.json")),
            "--sign",
            "sideways"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(flexbelt(&["--help"]).status.code(), Some(0));
}

fn parse_obj(text: &str) -> (usize, Vec<[usize; 3]>) {
    let mut vertices = 0;
    let mut faces = Vec::new();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts.map(|x| x.parse().unwrap()).collect();
                assert_eq!(coords.len(), 3);
                assert!(coords.iter().all(|x| x.is_finite()));
                vertices += 1;
            }
            Some("f") => {
                let idx: Vec<usize> = parts.map(|x| x.parse().unwrap()).collect();
                faces.push([idx[0], idx[1], idx[2]]);
            }
            Some("g") | Some("#") | None => {}
            Some(other) => panic!("unexpected OBJ record {other}"),
        }
    }
    (vertices, faces)
}

#[test]
fn flex_writes_frames_and_passing_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = flexbelt(&[
        "flex",
        path(&fixture("skew_quad.json")),
        "--samples",
        "20",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["sweep"]["passed"], Value::Bool(true));
    assert!(r["sweep"]["checks"]["rigidity"].as_f64().unwrap() < 1e-8);
    for k in 0..20 {
        let text = std::fs::read_to_string(dir.path().join(format!("frame_{k:04}.obj"))).unwrap();
        let (vertices, faces) = parse_obj(&text);
        assert_eq!(vertices, 16);
        assert_eq!(faces.len(), 18);
        assert!(faces.iter().flatten().all(|&i| (1..=16).contains(&i)));
    }
    assert!(!dir.path().join("frame_0020.obj").exists());
}

#[test]
fn single_sample_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let out = flexbelt(&[
        "flex",
        path(&fixture("skew_quad.json")),
        "--samples",
        "1",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("frame_0000.obj").exists());
    assert!(!dir.path().join("frame_0001.obj").exists());
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["sweep"]["checks"]["triple"].as_f64(), Some(0.0));
}

#[test]
fn reciprocal_writes_dual_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out = flexbelt(&[
        "reciprocal",
        path(&fixture("skew_quad.json")),
        "--samples",
        "6",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["reciprocal"]["dimension"], 4);
    assert_eq!(r["reciprocal"]["second_dimension"], 4);
    let (vertices, faces) =
        parse_obj(&std::fs::read_to_string(dir.path().join("dual_0000.obj")).unwrap());
    assert_eq!(vertices, 9);
    assert_eq!(faces.len(), 8);
}

#[test]
fn verify_accepts_fresh_and_rejects_edited_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    assert!(flexbelt(&[
        "solve-vhedra",
        path(&fixture("skew_quad.json")),
        "-o",
        path(&report)
    ])
    .status
    .success());
    assert_eq!(flexbelt(&["verify", path(&report)]).status.code(), Some(0));

    let text = std::fs::read_to_string(&report).unwrap();
    let edited = dir.path().join("edited.json");
    std::fs::write(&edited, text.replacen("-8.6081001071", "-8.6081101071", 1)).unwrap();
    let out = flexbelt(&["verify", path(&edited)]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q-residual"));

    let mut r: Value = serde_json::from_str(&text).unwrap();
    r["problem"]["tolerances"] = serde_json::json!({"geom": 1e-9, "alg": 1e-8, "rigid": 1e-7});
    let tol_only = dir.path().join("tol.json");
    std::fs::write(&tol_only, serde_json::to_string_pretty(&r).unwrap()).unwrap();
    assert_eq!(
        flexbelt(&["verify", path(&tol_only)]).status.code(),
        Some(0)
    );
}

#[test]
fn verify_runs_problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    std::fs::write(
        &problem,
        r#"{"mode": "verify", "polygon": [[0,0,0],[4,0,0],[5,3,0],[1,2.5,0]], "f": [0.5, 0.8, 1.6, 1.5625],
            "branch": ["minus","minus","plus","plus"], "e": [0, 0, 0, 0]}"#,
    )
    .unwrap();
    assert_eq!(flexbelt(&["verify", path(&problem)]).status.code(), Some(0));
    let rigid = std::fs::read_to_string(&problem)
        .unwrap()
        .replace("1.5625", "1.5");
    std::fs::write(&problem, rigid).unwrap();
    assert_eq!(flexbelt(&["verify", path(&problem)]).status.code(), Some(1));
}

#[test]
fn tolerance_from_environment_and_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_flexbelt"));
        cmd.args(["solve-vhedra", path(&fixture("skew_quad.json"))])
            .env_remove("FLEXBELT_TOL");
        if let Some(v) = env {
            cmd.env("FLEXBELT_TOL", v);
        }
        if let Some(v) = flag {
            cmd.args(["--tol", v]);
        }
        let out = cmd.output().unwrap();
        serde_json::from_slice::<Value>(&out.stdout).unwrap()["problem"]["tolerances"]["alg"]
            .as_f64()
    };
    assert_eq!(run(None, None), None);
    assert_eq!(run(Some("1e-7"), None), Some(1e-7));
    assert_eq!(run(Some("1e-7"), Some("1e-6")), Some(1e-6));
}

#[test]
fn closure_solves_unknown_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    std::fs::write(
        &problem,
        r#"{"mode": "closure", "polygon": [[0,0,0],[1,0,0],[0.2,0.9,0.3]], "f": [0.3, 0.4, 0.2], "e": [null, null, null]}"#,
    )
    .unwrap();
    let out = flexbelt(&["closure", path(&problem)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!r["solutions"].as_array().unwrap().is_empty());
    for s in r["solutions"].as_array().unwrap() {
        assert!(s["e"].as_array().unwrap().len() == 3);
        assert!(s["residual"].as_f64().unwrap() < 1e-9);
    }
}
