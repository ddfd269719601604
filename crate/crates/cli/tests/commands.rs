use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_radwave");

const MODEL_2D: &str = "[model]\ndim = 2\nb = 0.25\nkind = \"exp2d\"\n";
const MODEL_3D: &str = "[model]\ndim = 3\nb = 0.5\nkind = \"power3d\"\np = 3.8\n";

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn radwave(command: &str, config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("RADWAVE_OUT")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn fast_sweep(n_list: &str) -> String {
    format!(
        "{MODEL_2D}\n[run]\nt_final = 0.5\n\n[data]\namplitude = 1.0\nradius = 1.0\n\n[sweep]\nn_list = {n_list}\ncells_per_support = 16\nmax_spacing = 2e-3\n"
    )
}

#[test]
fn validate_reports_without_simulating() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "v.toml", MODEL_3D);
    let out = tmp.path().join("run");
    let res = radwave("validate", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));
    let stdout = text(&res.stdout);
    assert!(stdout.contains("inter-critical"), "{stdout}");
    assert!(stdout.contains("hypotheses: all hold"), "{stdout}");
    let names: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("manifest.json")]);
    assert_eq!(manifest(&out)["exit_code"], 0);
}

#[test]
fn hypothesis_violation_exits_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "bad.toml", "[model]\ndim = 3\nb = 0.5\nkind = \"power3d\"\np = 4.9\n");
    let res = radwave("validate", &cfg, &tmp.path().join("run"));
    assert_eq!(res.status.code(), Some(1));
    let stderr = text(&res.stderr);
    assert!(stderr.contains("N=3 power") && stderr.contains("p < 4 + b"), "{stderr}");
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn unknown_key_and_missing_file_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "k.toml", &format!("{MODEL_2D}dampening = 0.3\n"));
    let res = radwave("validate", &cfg, &tmp.path().join("a"));
    assert_eq!(res.status.code(), Some(1));
    assert!(text(&res.stderr).contains("dampening"));

    let res = radwave("validate", &tmp.path().join("absent.toml"), &tmp.path().join("b"));
    assert_eq!(res.status.code(), Some(1));
    assert!(text(&res.stderr).contains("cannot read"));
}

#[test]
fn usage_errors_exit_with_config_code() {
    let res = Command::new(BIN).args(["explode", "--config", "x.toml"]).output().unwrap();
    assert_eq!(res.status.code(), Some(1));
    let res = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn linearize_writes_one_row_per_n_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "lin.toml", &fast_sweep("[1, 2, 4]"));
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let res = radwave("linearize", &cfg, &first);
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));
    let res = Command::new(BIN)
        .args(["linearize", "--threads", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&second)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));

    let csv = std::fs::read_to_string(first.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "n,sup_diff_e0,u_l2_spacetime,u_l4b_spacetime,strichartz_qr,data_h1,data_l2,grid_cells,verdict"
    );
    assert_eq!(lines.len(), 4);
    for (line, n) in lines[1..].iter().zip(["1", "2", "4"]) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], n);
        assert_eq!(fields[4], "", "no Strichartz norm in 2D");
    }
    assert_eq!(
        std::fs::read(first.join("sweep.csv")).unwrap(),
        std::fs::read(second.join("sweep.csv")).unwrap()
    );

    let m = manifest(&first);
    assert_eq!(m["command"], "linearize");
    assert_eq!(m["config"]["sweep"]["n_list"], serde_json::json!([1, 2, 4]));
    let grid = &m["results"]["grid"];
    // the spacing cap binds before cells_per_support does
    let dr = grid["dr"].as_f64().unwrap();
    assert_eq!(dr, 2e-3);
    assert!(grid["r_max"].as_f64().unwrap() >= 1.0 + 0.5 + 8.0 * dr - 1e-12);
    assert!(m["platform"].is_string() && m["wall_time_seconds"].is_number());
}

#[test]
fn single_row_sweep_is_insufficient_not_failed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "one.toml", &fast_sweep("[1]"));
    let out = tmp.path().join("run");
    let res = radwave("linearize", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",insufficient"));
}

#[test]
fn simulate_writes_energy_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "sim.toml", &format!("{MODEL_3D}[run]\nt_final = 0.5\n[grid]\ndr = 4e-3\n"));
    let out = tmp.path().join("run");
    let res = radwave("simulate", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));
    let csv = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,total,kinetic_e0,potential,support_radius,l2_spacetime_partial");
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 0.5);
    assert!(manifest(&out)["results"]["max_relative_drift"].as_f64().unwrap() < 1e-3);
}

#[test]
fn drift_gate_failure_exits_two_and_keeps_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &tmp,
        "gate.toml",
        &format!("{MODEL_3D}[run]\nt_final = 0.5\ndrift_gate = 1e-14\n[grid]\ndr = 4e-3\n"),
    );
    let out = tmp.path().join("run");
    let res = radwave("simulate", &cfg, &out);
    assert_eq!(res.status.code(), Some(2), "{}", text(&res.stderr));
    assert!(out.join("energy.csv").exists());
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 2);
    assert!(m["error"].as_str().unwrap().contains("drift"));
}

#[test]
fn overflow_and_cfl_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &tmp,
        "big.toml",
        &format!("{MODEL_2D}[run]\nt_final = 0.1\n[data]\namplitude = 3000.0\n[grid]\ndr = 1e-2\n"),
    );
    let res = radwave("simulate", &cfg, &tmp.path().join("a"));
    assert_eq!(res.status.code(), Some(3), "{}", text(&res.stderr));
    assert!(text(&res.stderr).contains("overflow"));

    let cfg = write_config(&tmp, "cfl.toml", &format!("{MODEL_2D}[run]\ncfl = 1.5\n[grid]\ndr = 1e-2\n"));
    let res = radwave("simulate", &cfg, &tmp.path().join("b"));
    assert_eq!(res.status.code(), Some(3), "{}", text(&res.stderr));
    assert!(text(&res.stderr).contains("CFL"));
}

#[test]
fn inequalities_table_has_parseable_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &tmp,
        "ineq.toml",
        &format!("{MODEL_2D}[inequalities]\nnum_cells = 1000\nmoser_n = [2, 4]\nk_alpha = [1.0]\n"),
    );
    let out = tmp.path().join("run");
    let res = radwave("inequalities", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));
    let mut reader = csv::Reader::from_path(out.join("verdicts.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["name", "param_json", "lhs", "rhs_factor", "ratio", "grid_cells"]
    );
    let mut names = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let params: serde_json::Value = serde_json::from_str(&rec[1]).unwrap();
        assert!(params.is_object());
        let ratio: f64 = rec[4].parse().unwrap();
        assert!(ratio.is_finite() && ratio >= 0.0);
        names.push(rec[0].to_string());
    }
    for expected in ["strauss", "gagliardo_nirenberg", "moser_trudinger", "tech2d", "moser_sharpness", "k_alpha"] {
        assert!(names.iter().any(|n| n == expected), "{expected} missing from {names:?}");
    }
}

#[test]
fn output_root_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(&tmp, "study.toml", MODEL_2D);
    let root = tmp.path().join("root");
    let res = Command::new(BIN)
        .args(["validate", "--config"])
        .arg(&cfg)
        .env("RADWAVE_OUT", &root)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0), "{}", text(&res.stderr));
    assert!(root.join("study-validate").join("manifest.json").exists());
}
