use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn einsub(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_einsub"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn warp_schwarzschild_writes_csv_and_json() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(
        &["warp", "--family", "schwarzschild", "--n", "5", "--t-end", "5"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("warp.csv")).unwrap();
    assert!(csv.starts_with("t,phi,dphi,d2phi,d3phi,first_integral_residual\n"));
    assert_eq!(csv.lines().count(), 5002);
    let j = json(&d.path().join("warp.json"));
    assert!(j["envelope"]["max_drift"].as_f64().unwrap() <= 1e-8);
    let names: Vec<_> = fs::read_dir(d.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 2, "stray files: {names:?}");
}

#[test]
fn warp_closed_form_comparison() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(&["warp", "--n", "5", "--c", "-1", "--compare-closed-form"], d.path());
    assert_eq!(code(&o), 0);
    let j = json(&d.path().join("warp.json"));
    let c = check(&j["report"], "closed_form_error");
    assert_eq!(c["status"], "pass");
    assert!(c["measured"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn warp_c_zero_has_unit_curvature() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(&["warp", "--c", "0", "--rho", "4", "--n", "5", "--eps", "1"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&d.path().join("warp.json"));
    let k = &j["base_curvature"];
    assert!((k["k_min"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((k["k_max"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn verify_intrinsic_fixtures() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(
        &["verify-intrinsic", "--family", "clifford", "--n", "5", "--rho", "1"],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let o = einsub(&["verify-intrinsic", "--family", "schwarzschild", "--n", "6"], d.path());
    assert_eq!(code(&o), 0);
    let o = einsub(&["verify-intrinsic", "--family", "clifford-perturbed"], d.path());
    assert_eq!(code(&o), 1);
    let j = json(&d.path().join("verify_intrinsic.json"));
    assert_eq!(j["overall"], "fail");
    assert_eq!(j["tolerances"]["einstein"], 5e-5);
}

#[test]
fn build_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(&["build", "--family", "schwarzschild", "--n", "5"], d.path());
    assert_eq!(code(&o), 0);
    let obj = fs::read_to_string(d.path().join("schwarzschild.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    assert!(d.path().join("schwarzschild.csv").exists());

    let o = einsub(
        &[
            "build",
            "--family",
            "nonrot-example2",
            "--k",
            "1",
            "--n",
            "7",
            "--m",
            "2",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let j = json(&d.path().join("example_two_spec.json"));
    assert!((j["descriptor"]["scale"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let o = einsub(&["build", "--family", "clifford", "--n", "5"], d.path());
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(d.path().join("clifford.csv")).unwrap();
    assert!(csv.starts_with("coord_0,"));

    let o = einsub(
        &["build", "--family", "example-two", "--placement", "literal"],
        d.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_extrinsic_and_negative_control() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(&["verify-extrinsic", "--family", "schwarzschild", "--n", "5"], d.path());
    assert_eq!(code(&o), 0);
    let j = json(&d.path().join("verify_extrinsic.json"));
    assert_eq!(check(&j, "schwarzschild_n5_umbilical_dim")["measured"], 3.0);
    assert_eq!(check(&j, "schwarzschild_n4_epsilon_plus_one")["status"], "pass");
    let csv = fs::read_to_string(d.path().join("extrinsic_scan.csv")).unwrap();
    assert!(csv.starts_with("t,u,x2,x3,x4,fnb_residual,umb_dim,ga1_res,eqalpha1_res,gauss_res\n"));

    let o = einsub(&["verify-extrinsic", "--family", "perturbed", "--n", "5"], d.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn classify_appendix_generic_example() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(&["classify-appendix", "--a1", "2,1,1,1", "--a2", "0,1,1,1"], d.path());
    assert_eq!(code(&o), 0);
    let j = json(&d.path().join("appendix.json"));
    assert_eq!(j["record"]["form"], "generic_form");
    assert_eq!(j["record"]["positivity"], 1.0);
    let o = einsub(&["classify-appendix", "--a1", "2,1,1"], d.path());
    assert_eq!(code(&o), 3);
    let o = einsub(&["classify-appendix", "--a1", "0,0,0,0", "--a2", "0,0,0,0"], d.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&einsub(&["report", "--seed", "7"], a.path())), 0);
    assert_eq!(code(&einsub(&["report", "--seed", "7"], b.path())), 0);
    let ra = fs::read(a.path().join("report.json")).unwrap();
    let rb = fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(
        code(&einsub(&["verify-intrinsic", "--family", "example-one"], a.path())),
        0
    );
    assert_eq!(
        code(&einsub(&["verify-intrinsic", "--family", "example-one"], b.path())),
        0
    );
    assert_eq!(
        fs::read(a.path().join("verify_intrinsic.json")).unwrap(),
        fs::read(b.path().join("verify_intrinsic.json")).unwrap()
    );
}

#[test]
fn config_file_and_overrides() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "family": "schwarzschild", "n": 6, "points": 5, "tolerances": {"einstein": 1e-4}}"#,
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let o = einsub(&["verify-intrinsic", "--config", cfg_s], d.path());
    assert_eq!(code(&o), 0);
    let j = json(&d.path().join("verify_intrinsic.json"));
    assert_eq!(j["tolerances"]["einstein"], 1e-4);
    assert!(j["checks"][0]["name"].as_str().unwrap().contains("n6"));

    let o = einsub(
        &[
            "verify-intrinsic",
            "--config",
            cfg_s,
            "--n",
            "5",
            "--tol-einstein",
            "2e-5",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let j = json(&d.path().join("verify_intrinsic.json"));
    assert_eq!(j["tolerances"]["einstein"], 2e-5);
    assert!(j["checks"][0]["name"].as_str().unwrap().contains("n5"));
}

#[test]
fn configuration_errors_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let bad = [
        r#"{"schema_version": 2}"#,
        r#"{"schema_version": 1, "colour": "red"}"#,
        r#"{"schema_version": 1, "tolerances": {"einstein": 0.0}}"#,
        r#"{"schema_version": 1, "tolerances": {"einsten": 1e-3}}"#,
        r#"{"n": 5}"#,
    ];
    for (i, text) in bad.iter().enumerate() {
        let p = d.path().join(format!("bad{i}.json"));
        fs::write(&p, text).unwrap();
        let o = einsub(&["verify-intrinsic", "--config", p.to_str().unwrap()], d.path());
        assert_eq!(code(&o), 3, "{text}");
    }
    assert_eq!(code(&einsub(&["warp", "--n", "3"], d.path())), 3);
    assert_eq!(code(&einsub(&["warp", "--bogus"], d.path())), 3);
    assert_eq!(code(&einsub(&["warp", "--tol-drift", "-1"], d.path())), 3);
    assert_eq!(code(&einsub(&["verify-extrinsic", "--family", "sine"], d.path())), 3);
}

#[test]
fn integration_failure_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let o = einsub(
        &["warp", "--c", "0", "--rho", "4", "--n", "5", "--t-end", "5"],
        d.path(),
    );
    assert_eq!(code(&o), 2);
}
