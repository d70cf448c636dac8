use std::fs;
use std::path::Path;
use std::process::Command;

const NOISE: &str = r#"{"t1_us": 100, "t2_us": 80,
  "gate_error": {"single": {"type": "depolarizing", "p": 0.001}, "cnot": {"type": "depolarizing", "p": 0.01}},
  "readout": {"p01": 0.02, "p10": 0.01}}"#;

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zne-lab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn t1_config(dir: &Path, out: &str) -> String {
    write(dir, "noise.json", NOISE);
    write(
        dir,
        &format!("{out}.json"),
        &format!(
            r#"{{"kind": "t1", "qubits": 2, "delays_us": [0, 20, 40], "stretch_factors": [1, 1.5, 2],
                "shots": 4000, "noise": "noise.json", "seed": 3, "output_dir": "{out}"}}"#
        ),
    )
}

#[test]
fn run_succeeds_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = lab(&["run", &t1_config(dir.path(), out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["counts.json", "mitigation.csv", "errors.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let manifest = fs::read_to_string(dir.path().join("a/manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seed\": 3"));
    assert!(!dir.path().join("a.partial").exists());
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(lab(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"kind": "t1", "qubits": 2, "delays_us": [0], "stretch_factors": [2, 1], "output_dir": "x"}"#,
    );
    let o = lab(&["run", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));
    assert_eq!(lab(&["run"]).status.code(), Some(2));
    let good = t1_config(dir.path(), "w");
    let o = Command::new(env!("CARGO_BIN_EXE_zne-lab"))
        .args(["run", &good])
        .env("ZNE_LAB_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_density_run_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "big.json",
        r#"{"kind": "quench", "ising": {"j": 0.5, "h": 1, "dt": 0.5, "steps": 1},
            "simulator": "density", "shots": 100, "output_dir": "big"}"#,
    );
    let o = lab(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("big").exists());
    assert!(!dir.path().join("big.partial").exists());
}

#[test]
fn sweep_keeps_going_past_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"kind": "quench", "ising": {"j": 0.5, "h": 1, "dt": 0.5, "steps": 1},
            "sublattice": {"bfs_from": 12, "size": 3}, "simulator": "density",
            "shots": 200, "resamples": 2, "output_dir": "grid"}"#,
    );
    let o = lab(&["sweep", &cfg, "--axis", "lattice_size", "--values", "3,12,4"]);
    assert_eq!(o.status.code(), Some(3));
    let grid = fs::read_to_string(dir.path().join("grid/grid.csv")).unwrap();
    let status: Vec<&str> = grid.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(status.iter().filter(|s| **s == "ok").count() >= 2);
    assert!(grid
        .lines()
        .any(|l| l.starts_with("lattice_size,12,") && l.contains("error")));
    assert!(dir.path().join("grid/lattice_size=4/summary.csv").exists());
}

#[test]
fn audit_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(
        dir.path(),
        "ch.json",
        r#"[["ZI", 0.095], ["IZ", 0.045], ["ZZ", 0.005]]"#,
    );
    let o = lab(&["audit-insertion", &ch, "--k", "1,2"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().count() > 2);
    assert_eq!(lab(&["audit-insertion", &ch]).status.code(), Some(2));
}
