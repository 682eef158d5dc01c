#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_appeval"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn appeval")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read_json(path: impl AsRef<Path>) -> Value {
    let p = path.as_ref();
    serde_json::from_str(&std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

const SCHEMAS: [&str; 5] = [
    "common.schema.json",
    "ctds_report.schema.json",
    "pose_report.schema.json",
    "gaze_report.schema.json",
    "clsmetrics_report.schema.json",
];
const BASE: &str = "https://appeval.invalid/schemas/";

/// Validation errors of `doc` against the named shipped schema.
pub fn schema_errors(schema_file: &str, doc: &Value) -> Vec<String> {
    let mut registry = jsonschema::Registry::new();
    for name in SCHEMAS {
        registry = registry
            .add(format!("{BASE}{name}"), read_json(schema_dir().join(name)))
            .expect("schema registers");
    }
    let registry = registry.prepare().expect("registry");
    let root = read_json(schema_dir().join(schema_file));
    let validator = jsonschema::options()
        .with_registry(&registry)
        .build(&root)
        .expect("schema compiles");
    validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect()
}

/// A camera-trap truth record as JSON.
pub fn ctds_truth(n_cameras: usize, operating_time_s: f64, seed: u64) -> Value {
    serde_json::json!({
        "true_density_km2": 0.5,
        "key": {"family": "half_normal", "sigma": 7.0},
        "truncation_radius_m": 20.0,
        "view_angle_deg": 42.0,
        "snapshot_interval_s": 2.0,
        "study_area_km2": 100.0,
        "n_cameras": n_cameras,
        "operating_time_s": operating_time_s,
        "manual_rate": 0.15,
        "auto_tp_rate": 0.75,
        "auto_fp_rate": 0.05,
        "seed": seed
    })
}

pub fn write_json(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

/// Generate a survey into `dir/survey` through the CLI and return that path.
pub fn synth_survey(dir: &Path, truth: &Value) -> PathBuf {
    let cfg = dir.join("truth.json");
    write_json(&cfg, truth);
    let out = dir.join("survey");
    let o = run(&["synth", "ctds", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

/// Generate a rig recording into `dir/rig` through the CLI and return that path.
pub fn synth_rig(dir: &Path, truth: &Value) -> PathBuf {
    let cfg = dir.join("rig.json");
    write_json(&cfg, truth);
    let out = dir.join("rig");
    let o = run(&["synth", "rig", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
