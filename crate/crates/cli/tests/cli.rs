use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kerr_echo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerr-echo"))
        .args(args)
        .env_remove("KERR_ECHO_CONFIG")
        .env_remove("KERR_ECHO_OUT")
        .env_remove("KERR_ECHO_SEED")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_CLASSICAL: [&str; 6] = [
    "--set",
    "ensemble.n_samples=500",
    "--set",
    "grid.t_end=1.6",
    "--set",
    "grid.dt_out=0.004",
];

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = kerr_echo(&["quantum-evolve", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = kerr_echo(&["quantum-evolve", "--config", "/nonexistent/scenario.toml", "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/scenario.toml"), "{}", stderr(&o));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["status"], "failed");
    assert_eq!(m["exit_code"], 3);
    assert!(m["error"].as_str().unwrap().contains("scenario.toml"));
}

#[test]
fn invalid_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerr_echo(&["quantum-evolve", "--set", "grid.dt_out=-0.1", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("dt_out"), "{}", stderr(&o));
}

#[test]
fn non_empty_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("keep.txt"), "x").unwrap();
    let o = kerr_echo(&["revival-decompose", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--force"));
    assert!(!dir.path().join("manifest.json").exists());
    let o = kerr_echo(&["revival-decompose", "--force", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("keep.txt").exists());
}

#[test]
fn unwritable_output_is_an_engine_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    let o = kerr_echo(&["revival-decompose", "--out", &out_arg(&file.join("sub"))]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn large_master_equation_needs_long() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerr_echo(&["lindblad-evolve", "--set", "fock.n_max=96", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--long"), "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("manifest.json"))["status"], "failed");
}

#[test]
fn empty_sweep_writes_an_empty_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerr_echo(&["echo-sweep", "--set", "sweep.theta_points=0", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let index = json(&dir.path().join("index.json"));
    assert_eq!(index["entries"].as_array().unwrap().len(), 0);
    assert_eq!(json(&dir.path().join("manifest.json"))["status"], "ok");
}

#[test]
fn small_sweep_writes_both_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "echo-sweep",
        "--set",
        "state.alpha_re=3.0",
        "--set",
        "sweep.theta_points=2",
        "--set",
        "sweep.n_plus_sq=[0.5]",
        "--set",
        "sweep.engine=\"impulsive\"",
        "--out",
        &out_arg(dir.path()),
    ];
    let o = kerr_echo(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep_quantum.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), 3);
    assert!(dir.path().join("sweep_classical.csv").exists());
}

#[test]
fn classical_inventory() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["classical-ensemble", "--out"];
    let out = out_arg(dir.path());
    args.push(&out);
    args.extend(SMALL_CLASSICAL);
    let o = kerr_echo(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let index = json(&dir.path().join("index.json"));
    let files: Vec<&str> = index["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["file"].as_str().unwrap())
        .collect();
    assert_eq!(files.iter().filter(|f| f.starts_with("snapshot_")).count(), 4, "{files:?}");
    assert_eq!(files.iter().filter(|f| f.starts_with("mean_q_")).count(), 2, "{files:?}");
    for f in &files {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["scenario_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_makes_runs_reproducible() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = out_arg(dir.path());
        let mut args = vec!["classical-ensemble", "--seed", seed, "--threads", "2", "--out", &out];
        args.extend(SMALL_CLASSICAL);
        let o = kerr_echo(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = fs::read(dir.path().join("mean_q_kicked.csv")).unwrap();
        (dir, text)
    };
    let (_a, first) = run("11");
    let (_b, again) = run("11");
    let (_c, other) = run("12");
    assert_eq!(first, again);
    assert_ne!(first, other);
}

#[test]
fn manifest_reruns_identically() {
    let first = tempfile::tempdir().unwrap();
    let args = [
        "quantum-evolve",
        "--set",
        "state.alpha_re=3.0",
        "--set",
        "pulse.mode=\"impulsive\"",
        "--set",
        "grid.dt_out=0.01",
        "--out",
        &out_arg(first.path()),
    ];
    let o = kerr_echo(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = first.path().join("manifest.json");
    let second = tempfile::tempdir().unwrap();
    let o = kerr_echo(&[
        "quantum-evolve",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        &out_arg(second.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (m1, m2) = (json(&manifest), json(&second.path().join("manifest.json")));
    assert_eq!(m1["scenario_sha256"], m2["scenario_sha256"]);
    for f in ["trace_kicked.csv", "echoes_kicked.json", "final_state.csv"] {
        assert_eq!(
            fs::read(first.path().join(f)).unwrap(),
            fs::read(second.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn revival_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerr_echo(&["revival-decompose", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = json(&dir.path().join("revivals.json"));
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r["infidelity"].as_f64().unwrap() < 1e-10);
    }
    let nu23 = rows.iter().find(|r| r["nu"] == 23).unwrap();
    let l_of = |r: i64| {
        nu23["selection_rule"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["r_star"] == r)
            .unwrap()["l"]
            .clone()
    };
    assert_eq!(l_of(1), 2);
    assert_eq!(l_of(-1), 17);
}

#[test]
fn oracle_check_passes_on_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = kerr_echo(&[
        "oracle-check",
        "--set",
        "ensemble.n_samples=2000",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = json(&dir.path().join("oracle_report.json"));
    assert!(report.as_array().unwrap().iter().all(|e| e["pass"] == true));
}
