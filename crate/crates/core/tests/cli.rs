//! End-to-end tests of the `attsim` binary: subcommands, exit codes, and
//! output formats.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn attsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_attsim"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is one JSON document")
}

const TUMBLING: &str = r#"{
    "inertia": [2.5, 2.0, 1.5],
    "omega0": [1.0, 2.0, 3.0],
    "h": 0.01,
    "steps": 500
}"#;

#[test]
fn simulate_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    let out = dir.path().join("traj.csv");
    write(&config, TUMBLING);

    let output = attsim()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let summary = stdout_json(&output);
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["steps"], 500);
    assert!(summary["conservation"]["max_ortho_defect"].as_f64().unwrap() < 1e-11);

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "step,t,r11,r12,r13,r21,r22,r23,r31,r32,r33,pi_x,pi_y,pi_z,energy,\
         ortho_defect,det_defect,spm_x,spm_y,spm_z,newton_iters,newton_residual"
    );
    assert_eq!(lines.count(), 501);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    write(&config, TUMBLING);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status = attsim()
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_error_exits_2_with_category_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    write(
        &config,
        r#"{"inertia": [2.5, 2.0, 1.5], "omega0": [1, 2, 3], "h": 0.0, "steps": 5}"#,
    );
    let output = attsim()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error: config:"), "{stderr}");
    assert!(stderr.contains("h must be positive"));
}

#[test]
fn missing_config_file_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let output = attsim()
        .args(["simulate", "--config"])
        .arg(dir.path().join("nope.json"))
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).starts_with("error: io:"));
}

#[test]
fn solver_failure_exits_3_with_residual() {
    let output = attsim()
        .args([
            "solve",
            "--inertia",
            "2.5,2.0,1.5",
            "--h",
            "0.01",
            "--pi",
            "1e7,0,0",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error: solver:"), "{stderr}");
}

#[test]
fn solve_prints_json_result() {
    let output = attsim()
        .args([
            "solve",
            "--inertia",
            "2.5,2.0,1.5",
            "--h",
            "0.01",
            "--pi",
            "0,0,0",
        ])
        .output()
        .unwrap();
    let summary = stdout_json(&output);
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["w"], serde_json::json!([0.0, 0.0, 0.0]));
    assert_eq!(summary["iterations"], 0);
    assert_eq!(summary["f"][0][0], 1.0);
}

#[test]
fn solve_recovers_manufactured_momentum() {
    // pi manufactured offline from w* = (0.1, -0.05, 0.2), h = 0.01,
    // J = diag(2.5, 2, 1.5) — see the solver unit tests.
    let jd = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(0.5, 1.0, 1.5));
    let w_star = nalgebra::Vector3::new(0.1, -0.05, 0.2);
    let f = attsim::so3::exp_so3(w_star);
    let m = f.matrix() * jd - jd * f.matrix().transpose();
    let pi = attsim::so3::SkewMat3::from_matrix(&m).unwrap().vee() / 0.01;

    let output = attsim()
        .args([
            "solve",
            "--inertia",
            "2.5,2.0,1.5",
            "--h",
            "0.01",
            "--pi",
            &format!("{},{},{}", pi.x, pi.y, pi.z),
        ])
        .output()
        .unwrap();
    let summary = stdout_json(&output);
    let w = summary["w"].as_array().unwrap();
    for (got, want) in w.iter().zip([0.1, -0.05, 0.2]) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn compare_reports_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    let out = dir.path().join("cmp.csv");
    write(
        &config,
        r#"{"inertia": [2.5, 2.0, 1.5], "omega0": [1, 2, 3], "h": 0.01, "steps": 2000}"#,
    );
    let output = attsim()
        .args(["compare", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .arg("--project")
        .output()
        .unwrap();
    let summary = stdout_json(&output);
    let var = summary["variational"]["max_ortho_defect"].as_f64().unwrap();
    let rk4 = summary["rk4"]["max_ortho_defect"].as_f64().unwrap();
    assert!(rk4 > var);
    assert!(summary["rk4_projected"]["max_ortho_defect"].as_f64().unwrap() < 1e-12);
    let header = std::fs::read_to_string(&out).unwrap();
    let header = header.lines().next().unwrap().to_string();
    assert!(header.contains("var_energy"));
    assert!(header.contains("rk4_energy"));
    assert!(header.contains("proj_energy"));
}

#[test]
fn sweep_runs_all_configs_concurrently() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("list.json");
    let out_dir = dir.path().join("runs");
    write(
        &config,
        r#"[
            {"inertia": [2.5, 2.0, 1.5], "omega0": [1, 2, 3], "h": 0.01, "steps": 50},
            {"inertia": [1.0, 1.0, 1.0], "omega0": [0, 0, 1], "h": 0.01, "steps": 80},
            {"inertia": [3.0, 2.0, 2.0], "pi0": [1, 0, 0], "h": 0.02, "steps": 30}
        ]"#,
    );
    let output = attsim()
        .args(["simulate", "--sweep", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    let entries = stdout_json(&output);
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for (i, entry) in entries.iter().enumerate() {
        assert_eq!(entry["run"], i as u64);
        assert_eq!(entry["status"], "ok");
        let csv = entry["csv"].as_str().unwrap();
        assert!(Path::new(csv).exists());
    }
    assert!(out_dir.join("run_000.csv").exists());
    assert!(out_dir.join("run_002.csv").exists());
}

#[test]
fn csv_numbers_roundtrip_through_text() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    let out = dir.path().join("t.csv");
    write(&config, TUMBLING);
    let status = attsim()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    // Re-parse every floating-point cell and re-serialize: shortest
    // round-trip form is a fixed point of parse -> format.
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let value: f64 = cell.parse().unwrap();
            if cell.contains('.') || cell.contains('e') {
                assert_eq!(format!("{value}"), cell);
            }
        }
    }
}
