use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entropydiff")).args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn analyze_catenoid_summary() {
    let v = json_ok(&["analyze", "--surface", "catenoid", "--grid", "64x64"]);
    assert_eq!(v["schema"], 1);
    assert!((f(&v["summary"]["K_min"]) + 1.0).abs() < 1e-12);
    assert_eq!(v["fields"]["K"].as_array().unwrap().len(), 65 * 65);
}

#[test]
fn analyze_enneper_has_vanishing_rho() {
    let v = json_ok(&["analyze", "--G", "z", "--h", "z", "--domain", "-1,1,-1,1"]);
    assert!(f(&v["summary"]["max_abs_rho"]) < 1e-9);
}

#[test]
fn analyze_reports_umbilic_nodes() {
    let v = json_ok(&["analyze", "--G", "1+z^2", "--h", "1", "--domain", "-1,1,-1,1", "--grid", "8x8"]);
    // z = 0 is umbilic; at z = ±i the Gauss map vanishes and the metric blows up
    assert_eq!(v["summary"]["singular_nodes"]["UmbilicPoint"], 1);
    assert_eq!(v["summary"]["singular_nodes"]["PoleAtPoint"], 2);
    let rho = v["fields"]["rho_re"].as_array().unwrap();
    assert_eq!(rho.iter().filter(|x| x.is_null()).count(), 3);
}

#[test]
fn out_of_range_t_is_bad_input() {
    let out = run(&["analyze", "--surface", "deformed-catenoid", "--t", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t must lie in (−1,1)"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["code"], "InvalidParameter");
}

#[test]
fn malformed_input_exits_with_one() {
    for args in [
        &["analyze", "--surface", "catenoid", "--grid", "4x4"][..],
        &["analyze", "--G", "z+", "--h", "1"],
        &["analyze", "--surface", "catenoid", "--G", "z", "--h", "1"],
        &["verify", "--surface", "catenoid", "--checks", "nonsense"],
        &["analyze"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    let v: Value = serde_json::from_slice(&run(&["analyze", "--G", "z+", "--h", "1"]).stdout).unwrap();
    assert_eq!(v["error"]["code"], "ParseError");
}

#[test]
fn numeric_failure_exits_with_two() {
    let out = run(&["verify", "--G", "1+z^2", "--h", "1", "--checks", "pole", "--center", "0.1", "--expected", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["code"], "PoleOnCircle");
}

#[test]
fn reconstruct_enneper_pair() {
    let v = json_ok(&["reconstruct", "--rho", "0", "--mu", "0.7071"]);
    assert!(f(&v["checks"]["enneper_gauss_max_error"]) < 1e-8);
    assert!(f(&v["checks"]["wronskian_drift"]) < 1e-10);
}

#[test]
fn reconstruct_catenoid_family() {
    let v = json_ok(&["reconstruct", "--rho", "-1", "--phi", "0"]);
    assert!(f(&v["checks"]["roundtrip_rho_max_error"]) < 1e-8);
    assert_eq!(v["hopf_convention"]["name"], "PlusDzSquared");
}

#[test]
fn reconstruct_airy_type_with_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("airy.obj");
    let v = json_ok(&["reconstruct", "--rho", "z", "--obj", obj.to_str().unwrap()]);
    assert_eq!(v["checks"]["roundtrip_samples"], 50);
    assert!(f(&v["checks"]["wronskian_drift"]) < 1e-10);
    assert!(f(&v["checks"]["roundtrip_rho_max_error"]) < 1e-6);
    let text = std::fs::read_to_string(obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 33 * 33);
}

#[test]
fn verify_catenoid_ricci_and_ecritical() {
    let v = json_ok(&["verify", "--surface", "catenoid", "--checks", "ricci,ecritical"]);
    let reports = v["reports"].as_array().unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(names, ["ecritical", "ricci"]);
    assert!(reports.iter().all(|r| r["pass"] == true));
    for key in ["check", "params", "stats", "tol", "pass"] {
        assert!(reports[0].get(key).is_some());
    }
}

#[test]
fn verify_enneper_soliton() {
    let v = json_ok(&["verify", "--surface", "enneper", "--checks", "soliton"]);
    assert_eq!(v["reports"][0]["pass"], true);
}

#[test]
fn verify_catalog_checks() {
    let v = json_ok(&[
        "verify", "--surface", "deformed-helicoid", "--t", "0.5", "--checks", "family,period",
    ]);
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["pass"] == true), "{reports:?}");
    let v = json_ok(&[
        "verify", "--surface", "deformed-catenoid", "--t", "0.5", "--domain", "-1,1,0,3.141592653589793",
        "--checks", "closed-form",
    ]);
    assert_eq!(v["reports"][0]["pass"], true);
    let v = json_ok(&["verify", "--G", "1+z^2", "--h", "1", "--checks", "pole", "--expected", "-0.875"]);
    assert_eq!(v["reports"][0]["pass"], true);
}

#[test]
fn norm_of_catenoid() {
    let v = json_ok(&["norm", "--surface", "catenoid", "--x-cut", "20"]);
    assert!((f(&v["value"]) - 275.51).abs() < 0.3);
}

#[test]
fn mesh_writes_obj_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("c.obj");
    let side = dir.path().join("c.json");
    let out = run(&[
        "mesh", "--surface", "catenoid", "--grid", "16x8", "--obj", obj.to_str().unwrap(), "--out",
        side.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 17 * 9);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 16 * 8);
    let v: Value = serde_json::from_slice(&std::fs::read(side).unwrap()).unwrap();
    assert_eq!(v["fields"]["K"].as_array().unwrap().len(), 17 * 9);
    assert_eq!(v["vertices"], 17 * 9);
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let args = ["analyze", "--surface", "deformed-catenoid", "--t", "0.3", "--grid", "16x16"];
    let a = run(&args).stdout;
    let b = Command::new(env!("CARGO_BIN_EXE_entropydiff"))
        .args(args)
        .env("ENTROPYDIFF_THREADS", "3")
        .output()
        .unwrap()
        .stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_entropydiff"))
        .args(["analyze", "--surface", "catenoid", "--grid", "8x8"])
        .env("ENTROPYDIFF_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
