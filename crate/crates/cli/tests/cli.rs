//! End-to-end runs of the `moldep` binary on small ensembles.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "simulation.trajectories=400";

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn recipe(name: &str) -> PathBuf {
    root().join("recipes").join(name)
}

fn moldep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moldep"))
        .args(args)
        .env_remove("MOLDEP_DATASET")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn unknown_key_names_it_and_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "[beam]\nt_intt = 1e-6\n");
    let o = moldep(&["validate", arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t_intt"), "{}", stderr(&o));
}

#[test]
fn out_of_range_value_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "[beam]\nt_int = -1.0\n");
    let o = moldep(&["validate", arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("beam.t_int"), "{}", stderr(&o));
}

#[test]
fn malformed_toml_and_missing_file_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "[beam\n");
    assert_eq!(moldep(&["validate", arg(&cfg)]).status.code(), Some(1));
    let missing = tmp.path().join("absent.toml");
    assert_eq!(moldep(&["validate", arg(&missing)]).status.code(), Some(1));
}

#[test]
fn bad_override_exits_one() {
    let o = moldep(&["validate", arg(&recipe("fig2.toml")), "--set", "field.no_such=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such"), "{}", stderr(&o));
}

#[test]
fn strict_resonance_check() {
    let detuned = moldep(&["validate", arg(&recipe("fig2.toml")), "--strict"]);
    assert_eq!(detuned.status.code(), Some(1));
    assert!(stderr(&detuned).contains("cm"), "{}", stderr(&detuned));
    assert_eq!(moldep(&["validate", arg(&recipe("fig2.toml"))]).status.code(), Some(0));
    assert_eq!(moldep(&["validate", arg(&recipe("fig3a.toml")), "--strict"]).status.code(), Some(0));
}

#[test]
fn validate_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = moldep(&["validate", arg(&recipe("fig3a.toml")), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn deposit_is_reproducible_across_workers() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let cfg = recipe("fig3c.toml");
    for (dir, w) in [(&a, "1"), (&b, "3")] {
        let o = moldep(&["deposit", arg(&cfg), "--set", SMALL, "--workers", w, "--out", arg(dir)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["histogram.csv", "peaks.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let ma = manifest(&a);
    assert_eq!(ma["command"], "deposit");
    assert_eq!(ma["trajectories"], 400);
    assert_eq!(ma["overrides"][0], SMALL);
    assert_eq!(ma["config"]["simulation"]["trajectories"], 400);
    let expected = {
        use sha2::Digest;
        let text = std::fs::read_to_string(root().join("crates/core/data/n2_synthetic.toml")).unwrap();
        hex::encode(sha2::Sha256::digest(text.as_bytes()))
    };
    assert_eq!(ma["dataset"]["sha256"], expected.as_str());
    assert_eq!(ma["dataset"]["source"], "builtin:n2_synthetic");
}

#[test]
fn manifest_replays_the_run() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = moldep(&["deposit", arg(&recipe("fig3d.toml")), "--set", SMALL, "--out", arg(&a)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = moldep(&["deposit", arg(&a.join("manifest.json")), "--out", arg(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(a.join("histogram.csv")).unwrap(),
        std::fs::read(b.join("histogram.csv")).unwrap()
    );

    let text = std::fs::read_to_string(a.join("manifest.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["dataset"]["sha256"] = "0".repeat(64).into();
    let tampered = tmp.path().join("tampered.json");
    std::fs::write(&tampered, doc.to_string()).unwrap();
    let o = moldep(&["validate", arg(&tampered)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sha256"), "{}", stderr(&o));
}

fn tallest_peak(csv: &Path) -> String {
    let text = std::fs::read_to_string(csv).unwrap();
    let mut best = (f64::NEG_INFINITY, String::new());
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let height = header.iter().position(|h| h.starts_with("height")).expect("height column");
    let centre = header.iter().position(|h| h.starts_with("x")).expect("position column");
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let h: f64 = cells[height].parse().unwrap();
        if h > best.0 {
            best = (h, cells[centre].to_string());
        }
    }
    best.1
}

#[test]
fn theta_f_sweep_moves_the_peaks() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    let o = moldep(&["sweep", arg(&recipe("fig3a.toml")), "--set", "simulation.trajectories=4000", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("sweep.csv").exists());
    let first = out.join("theta_f_000");
    let second = out.join("theta_f_001");
    let h0 = std::fs::read(first.join("histogram.csv")).unwrap();
    let h1 = std::fs::read(second.join("histogram.csv")).unwrap();
    assert_ne!(h0, h1);
    assert_ne!(tallest_peak(&first.join("peaks.csv")), tallest_peak(&second.join("peaks.csv")));
}

#[test]
fn dataset_falls_back_to_environment() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("model.toml");
    std::fs::copy(root().join("crates/core/data/n2_synthetic.toml"), &data).unwrap();
    let out = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_moldep"))
        .args(["potential", arg(&recipe("fig2.toml")), "--set", "potential.samples=201", "--out", arg(&out)])
        .env("MOLDEP_DATASET", &data)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(manifest(&out)["dataset"]["source"], arg(&data));

    let missing = tmp.path().join("nope.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_moldep"))
        .args(["validate", arg(&recipe("fig2.toml"))])
        .env("MOLDEP_DATASET", &missing)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn zero_workers_rejected() {
    let o = moldep(&["validate", arg(&recipe("fig2.toml")), "--workers", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
