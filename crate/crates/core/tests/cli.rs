use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn seqconj(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqconj"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn matrix(rows: &[&[f64]]) -> Value {
    let n = rows.len();
    let data: Vec<Value> = rows.iter().flat_map(|r| r.iter().map(|x| json!([x, 0.0]))).collect();
    json!({"rows": n, "cols": n, "data": data})
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), serde_json::to_string(v).unwrap()).unwrap();
}

fn delta_measure(weight: f64) -> Value {
    json!({
        "group": {"moduli": [2]},
        "m": [matrix(&[&[weight, 0.0], &[0.0, 0.0]]), matrix(&[&[0.0, 0.0], &[0.0, 0.0]])]
    })
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn close(v: &Value, expected: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() < 1e-12
}

#[test]
fn sequential_run_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "delta0_e0.json", &delta_measure(1.0));
    let out = seqconj(&["sequential", "run", "--group", "2", "--measure", "delta0_e0.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let sigma = &report["sigma"]["weights"];
    let tau = &report["tau"]["weights"];
    assert!(close(&sigma[0], 1.0) && close(&sigma[1], 0.0));
    assert!(close(&tau[0], 0.5) && close(&tau[1], 0.5));
    assert_eq!(report["seed"], json!(42));
}

#[test]
fn sequential_run_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", &delta_measure(1.0));
    write(dir.path(), "rho.json", &matrix(&[&[0.0, 0.0], &[0.0, 1.0]]));
    let out = seqconj(
        &[
            "sequential", "run", "--measure", "m.json", "--state", "rho.json", "--csv", "csv", "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["distributions"]["joint"]["weights"].is_array());
    let sigma = std::fs::read_to_string(dir.path().join("csv/sigma.csv")).unwrap();
    assert_eq!(sigma.lines().next(), Some("outcome,probability"));
    assert_eq!(sigma.lines().count(), 3);
    let joint = std::fs::read_to_string(dir.path().join("csv/joint.csv")).unwrap();
    assert_eq!(joint.lines().count(), 5);
    // ρ = |e1><e1| lands on x = 1 with uniform momentum
    let rows: Vec<(String, f64)> = joint
        .lines()
        .skip(1)
        .map(|l| {
            let (k, p) = l.split_once(',').unwrap();
            (k.to_string(), p.parse().unwrap())
        })
        .collect();
    let expected = [("0;0", 0.0), ("0;1", 0.0), ("1;0", 0.5), ("1;1", 0.5)];
    for ((k, p), (ek, ep)) in rows.iter().zip(expected) {
        assert_eq!(k, ek);
        assert!((p - ep).abs() < 1e-12);
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = seqconj(&["sequential", "run", "--measure", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.json"), "{ not json").unwrap();
    let out = seqconj(&["sequential", "run", "--measure", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unnormalized_measure_is_an_invariant_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", &delta_measure(0.9));
    let out = seqconj(&["sequential", "run", "--measure", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("measure not normalized"));
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = seqconj(&["verify", "--suite", "weyl", "--group", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let reports = stdout_json(&out);
    for check in reports[0]["checks"].as_array().unwrap() {
        assert!(check["residual"].as_f64().unwrap() <= 1e-10);
    }
    let out = seqconj(&["verify", "--suite", "all", "--group", "2", "--samples", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out).as_array().unwrap().len(), 6);
    let out = seqconj(&["verify", "--suite", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn demo_spin() {
    let dir = tempfile::tempdir().unwrap();
    let out = seqconj(&["demo", "spin"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert!(close(&r["s"], 1.0) && close(&r["t"], 0.0));

    write(dir.path(), "mixed.json", &matrix(&[&[0.5, 0.0], &[0.0, 0.5]]));
    let out = seqconj(&["demo", "spin", "--probe", "mixed.json"], dir.path());
    let r = stdout_json(&out);
    assert!(close(&r["s"], 0.0) && close(&r["t"], 0.0));

    let h = std::f64::consts::FRAC_1_SQRT_2.to_string();
    let skew = format!("{h},0,{h}");
    let out = seqconj(&["demo", "spin", "--a", "0,0,1", "--b", &skew], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn instrument_build_verify_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = json!({
        "group": {"moduli": [2]},
        "m": [matrix(&[&[0.3, 0.1], &[0.1, 0.2]]), matrix(&[&[0.25, 0.0], &[0.0, 0.25]])]
    });
    write(dir.path(), "m.json", &mixed);
    let out = seqconj(&["instrument", "build", "--measure", "m.json", "--out", "i.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = seqconj(&["instrument", "verify", "--in", "i.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["covariant"], json!(true));

    let out = seqconj(&["instrument", "reconstruct", "--in", "i.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let back = stdout_json(&out);
    let m0 = &back["m"][0]["data"];
    assert!((m0[0][0].as_f64().unwrap() - 0.3).abs() < 1e-10);
    assert!((m0[1][0].as_f64().unwrap() - 0.1).abs() < 1e-10);

    // relabel the outcomes of a non-covariant instrument: compression onto
    // the momentum eigenbasis filed under position labels
    let h = 0.5;
    let plus = matrix(&[&[h, h, h, h], &[h, h, h, h], &[h, h, h, h], &[h, h, h, h]]);
    let minus = matrix(&[&[h, -h, -h, h], &[-h, h, h, -h], &[-h, h, h, -h], &[h, -h, -h, h]]);
    let luders = json!({"group": {"moduli": [2]}, "maps": [{"choi": plus}, {"choi": minus}]});
    write(dir.path(), "luders.json", &luders);
    let out = seqconj(&["instrument", "verify", "--in", "luders.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = seqconj(&["instrument", "reconstruct", "--in", "luders.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cpso_reports_informational_completeness() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "s.json", &matrix(&[&[1.0, 0.0], &[0.0, 0.0]]));
    let out = seqconj(&["cpso", "--state", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["span_rank"], json!(2));
    assert_eq!(r["informationally_complete"], json!(false));
    assert_eq!(r["povm"]["effects"].as_array().unwrap().len(), 4);
}

#[test]
fn dump_weyl_and_group_requirements() {
    let dir = tempfile::tempdir().unwrap();
    let out = seqconj(&["dump-weyl", "--group", "2x2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["translations"].as_array().unwrap().len(), 4);
    assert_eq!(seqconj(&["dump-weyl"], dir.path()).status.code(), Some(1));
    assert_eq!(seqconj(&["dump-weyl", "--group", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(seqconj(&["no-such-command"], dir.path()).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", &delta_measure(1.0));
    let a = seqconj(&["sequential", "run", "--measure", "m.json"], dir.path());
    let b = seqconj(&["sequential", "run", "--measure", "m.json"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let a = seqconj(&["verify", "--suite", "theorem41", "--group", "3", "--samples", "2"], dir.path());
    let b = seqconj(&["verify", "--suite", "theorem41", "--group", "3", "--samples", "2"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let c = seqconj(
        &["verify", "--suite", "theorem41", "--group", "3", "--samples", "2", "--seed", "7"],
        dir.path(),
    );
    assert_ne!(a.stdout, c.stdout);
}
