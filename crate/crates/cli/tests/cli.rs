use std::path::PathBuf;
use std::process::{Command, Output};

use ness_core::lindblad::{build_liouvillian, steady_state, LiouvillianModel};
use ness_core::Coupling;
use serde_json::Value;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn ness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ness")).args(args).env_remove("NESS_OUTPUT_DIR").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = ness(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn cx(v: &Value) -> (f64, f64) {
    (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

#[test]
fn build_ness_has_unit_trace() {
    let v = json(&["build-ness", "--length", "2"]);
    let (re, im) = cx(&v["dense"]["trace"]);
    assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
    assert_eq!(v["dense"]["dim"], 4);
}

#[test]
fn build_ness_matches_liouvillian_steady_state() {
    let v = json(&["build-ness", "--length", "4", "--lambda", "2"]);
    let exact =
        steady_state(&build_liouvillian(&LiouvillianModel::xx(4, Coupling::new(2.0).unwrap()).unwrap())).unwrap();
    let mut seen = 0.0;
    for e in v["dense"]["entries"].as_array().unwrap() {
        let (r, c) = (e["row"].as_u64().unwrap() as usize, e["col"].as_u64().unwrap() as usize);
        let z = exact[(r, c)];
        assert!((z.re - e["re"].as_f64().unwrap()).abs() < 1e-10);
        assert!((z.im - e["im"].as_f64().unwrap()).abs() < 1e-10);
        seen += z.norm_sqr();
    }
    // every nonzero entry of the oracle was listed
    assert!((seen - exact.norm_squared()).abs() < 1e-12);
}

#[test]
fn build_ness_guards_dense_size() {
    let out = ness(&["build-ness", "--length", "13"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&["build-ness", "--length", "13", "--no-dense"]);
    assert!(v["dense"].is_null());
}

#[test]
fn build_ness_csv_lists_entries() {
    let out = ness(&["build-ness", "--length", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("row,col,re,im"));
    assert!(lines.count() > 0);
    assert!(text.starts_with("# length=2"));
}

#[test]
fn verify_ness_small_chain() {
    let v = json(&["verify-ness", "--length", "3"]);
    assert!(v["trace_distance"].as_f64().unwrap() <= 1e-8);
    assert!(v["spectral_gap"].as_f64().unwrap() > 0.0);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_ness_field_does_not_move_the_state() {
    let a = json(&["verify-ness", "--length", "2"]);
    let b = json(&["verify-ness", "--length", "2", "--field", "1"]);
    assert!(a["trace_distance"].as_f64().unwrap() < 1e-10);
    assert!(b["trace_distance"].as_f64().unwrap() < 1e-10);
}

#[test]
fn verify_ness_rejects_single_site() {
    assert_eq!(ness(&["verify-ness", "--length", "1"]).status.code(), Some(2));
}

#[test]
fn verify_ness_fails_for_anisotropic_reference() {
    // the MPO describes the XX chain only
    let out = ness(&["verify-ness", "--length", "3", "--delta", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn amplitude_of_two_qubit_circuit() {
    let v = json(&["amplitude", data("circuits/cz_x_h.circ").to_str().unwrap()]);
    assert!(v["relative_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["non_normal"].as_array().unwrap().len(), 0);
    let strict = json(&["amplitude", "--strict-tiling", data("circuits/cnot_chain.circ").to_str().unwrap()]);
    assert!(strict["relative_error"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn amplitude_without_interior_gates_is_the_overlap() {
    let v = json(&["amplitude", data("circuits/overlap.circ").to_str().unwrap()]);
    // (0.8, 0.6i) · (0.6, 0.8), bilinear
    let (re, im) = cx(&v["corrected_amplitude"]);
    assert!((re - 0.48).abs() < 1e-12 && (im - 0.48).abs() < 1e-12);
}

#[test]
fn amplitude_warns_about_unbalanced_projector() {
    let out = ness(&["amplitude", data("circuits/unbalanced_projector.circ").to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let sources: Vec<&str> =
        v["non_normal"].as_array().unwrap().iter().map(|n| n["source"].as_str().unwrap()).collect();
    assert!(sources.contains(&"gate 2"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not normal"));
}

#[test]
fn sample_is_reproducible() {
    let c = data("circuits/cz_x_h.circ");
    let args = ["sample", c.to_str().unwrap(), "--samples", "20000", "--seed", "9", "--format", "csv"];
    let a = ness(&args);
    let b = ness(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = ness(&["sample", c.to_str().unwrap(), "--samples", "20000", "--seed", "10", "--format", "csv"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn sample_json_reports_runs_within_tolerance() {
    let c = data("circuits/cz_x_h.circ");
    let v = json(&["sample", c.to_str().unwrap(), "--samples", "100000", "--runs", "4", "--workers", "2"]);
    let (tr, ti) = cx(&v["exact_expectation"]);
    for run in v["runs"].as_array().unwrap() {
        let d = ((run["gamma_re"].as_f64().unwrap() - tr).powi(2) + (run["gamma_im"].as_f64().unwrap() - ti).powi(2))
            .sqrt();
        assert!(d <= 5.0 * run["standard_error"].as_f64().unwrap());
    }
}

#[test]
fn sample_rejects_non_normal_encoders() {
    let out = ness(&["sample", data("circuits/cnot_chain.circ").to_str().unwrap(), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_writes_outcome_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let c = data("circuits/cz_x_h.circ");
    let out = ness(&["sample", c.to_str().unwrap(), "--samples", "10", "--outcomes", table.to_str().unwrap()]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(&table).unwrap();
    let total: f64 = rdr.records().map(|r| r.unwrap()[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn count_sat_examples() {
    for (file, want) in [("functions/and2.fun", 1), ("functions/true2.fun", 4), ("functions/xor3.fun", 4)] {
        let v = json(&["count-sat", data(file).to_str().unwrap()]);
        assert_eq!(v["count"], want, "{file}");
        assert_eq!(v["brute_force"], want);
    }
}

#[test]
fn gap_scan_decreases() {
    let v = json(&["gap-scan", "--lmin", "2", "--lmax", "5"]);
    let gaps: Vec<f64> = v["points"].as_array().unwrap().iter().map(|p| p["gap"].as_f64().unwrap()).collect();
    assert_eq!(gaps.len(), 4);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(v["fitted_exponent"].as_f64().unwrap() > 0.0);
}

#[test]
fn gap_scan_with_anisotropy_runs() {
    let out = ness(&["gap-scan", "--lmin", "2", "--lmax", "4", "--delta", "0.5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# fitted_exponent="));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn gap_scan_guard() {
    assert_eq!(ness(&["gap-scan", "--lmax", "7"]).status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ness"))
        .args(["count-sat", data("functions/and2.fun").to_str().unwrap()])
        .env("NESS_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("count-sat.json")).unwrap()).unwrap();
    assert_eq!(v["count"], 1);
}

#[test]
fn json_output_is_stable() {
    let a = ness(&["amplitude", data("circuits/cz_x_h.circ").to_str().unwrap()]);
    let b = ness(&["amplitude", data("circuits/cz_x_h.circ").to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}
