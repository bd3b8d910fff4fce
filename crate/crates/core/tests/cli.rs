use std::process::{Command, Output};

use maf::config::bundled_json;
use maf::CheckReport;

fn maf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maf"))
        .args(args)
        .env_remove("MAF_FD_STEP")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn field_on_bundled_system_passes() {
    let o = maf(&["field", "--config", "conjugate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<CheckReport> = serde_json::from_slice(&o.stdout).unwrap();
    let field = reports.iter().find(|r| r.name == "field_constancy").unwrap();
    assert!(field.pass);
    assert_eq!(field.metadata["B"], 1.0);
}

#[test]
fn json_output_is_deterministic() {
    let a = maf(&["check-equivariance", "--config", "landau", "--seed", "5"]);
    let b = maf(&["check-equivariance", "--config", "landau", "--seed", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = maf(&["gauge", "--config", "alteration", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,max_residual,mean_residual,tol,pass,expected_pass"));
    assert!(lines.all(|l| l.split(',').count() == 6));
}

#[test]
fn corrupted_character_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = bundled_json("conjugate").unwrap().replace("\"chi\": [[1.0, 0.0]]", "\"chi\": [[0.0, 2.0]]");
    std::fs::write(&path, text).unwrap();
    let o = maf(&["check-equivariance", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let reports: Vec<CheckReport> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!reports.iter().find(|r| r.name == "rdq").unwrap().pass);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.json");
    std::fs::write(&path, bundled_json("conjugate").unwrap().replace("\"mu\": 1.0", "\"mu\": 3.0")).unwrap();
    let o = maf(&["field", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("must be positive"));

    assert_eq!(code(&maf(&["field", "--config", "/no/such/file.json"])), 2);
    assert_eq!(code(&maf(&["field", "--config", "landau", "--grid", "0"])), 2);
    assert_eq!(code(&maf(&["frobnicate"])), 2);
}

#[test]
fn fd_step_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_maf"))
        .args(["field", "--config", "alteration"])
        .env("MAF_FD_STEP", "1e-3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let reports: Vec<CheckReport> = serde_json::from_slice(&o.stdout).unwrap();
    let fd = reports.iter().find(|r| r.name == "field_constancy_fd").unwrap();
    assert_eq!(fd.metadata["fd_step"], 1e-3);
    let bad = Command::new(env!("CARGO_BIN_EXE_maf"))
        .args(["field", "--config", "landau"])
        .env("MAF_FD_STEP", "-1")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn kernel_and_eigenfunction_values() {
    let o = maf(&["kernel", "--config", "landau", "--kmax", "0", "--z", "0.3,0.1", "--w", "0.3,0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<CheckReport> = serde_json::from_slice(&o.stdout).unwrap();
    let v = &reports.last().unwrap().metadata["value"];
    assert!((v[0].as_f64().unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-12);

    let o = maf(&["eigenfunction", "--config", "landau", "--m", "0", "--n", "0", "--z", "0,0"]);
    assert_eq!(code(&o), 0);
    let reports: Vec<CheckReport> = serde_json::from_slice(&o.stdout).unwrap();
    let v = &reports[0].metadata["value"];
    // e^{-π²α²/B} H_0 at the origin with α = 0
    assert!((v[0].as_f64().unwrap() - 1.0).abs() < 1e-12 && v[1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn tolerance_flag_applies() {
    let o = maf(&["field", "--config", "landau", "--tol", "1e-30", "--format", "csv"]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(text.lines().any(|l| l.starts_with("potential_curl,") && l.ends_with(",1e-30,false,true")));
    assert_eq!(code(&o), 1);
}
