use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
seed = 7
scenario.frequency_hz = 40e9
scenario.rows = 3
scenario.cols = 3
scenario.sources = [{ position_mm = [0.0, 3000.0, 0.0], power_db = 10.0 }]
stage1.grid = { rows = 5, cols = 5 }
stage2.grid = { rows = 7, cols = 7 }
stage2.n_cg = 5
stage2.n_ap = 5
"#;

fn synthphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthphase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn validate_prints_effective_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = synthphase(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("ok\n"));
    assert!(text.contains("frequency_hz"));
    assert!(!text.contains("warning"));
}

#[test]
fn validate_warns_on_mismatched_k_hat() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}stage2.k_hat = 3\n"));
    let out = synthphase(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("warning: stage2.k_hat"));
}

#[test]
fn missing_required_field_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("scenario.frequency_hz = 40e9\n", "");
    let cfg = write_config(tmp.path(), &text);
    let out = synthphase(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("violation: scenario.frequency_hz"));
    let report: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(report["category"], "config");
    assert_eq!(report["violations"][0]["field"], "scenario.frequency_hz");
}

#[test]
fn missing_config_file_exits_two() {
    let out = synthphase(&["validate", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_run_leaves_no_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("40e9", "-40e9"));
    let dest = tmp.path().join("out");
    let out = synthphase(&["run", "--config", &cfg, "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dest.exists());
    assert_eq!(listing(tmp.path()), ["cfg.toml"]);
}

#[test]
fn simulate_writes_intensities_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let dest = tmp.path().join("sim");
    let out = synthphase(&["simulate", "--config", &cfg, "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(listing(&dest), ["intensity.csv"]);
    let text = fs::read_to_string(dest.join("intensity.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn run_without_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let dest = tmp.path().join("run");
    let out = synthphase(&["run", "--config", &cfg, "--out", dest.to_str().unwrap(), "--no-svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let names = listing(&dest);
    assert!(names.iter().all(|n| !n.ends_with(".svg")));
    for want in ["intensity.csv", "peaks.csv", "delta_trace.csv", "phase_est.csv", "run_report.json"] {
        assert!(names.iter().any(|n| n == want), "missing {want}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dest.join("run_report.json")).unwrap()).unwrap();
    assert_eq!(report["effective_config"]["seed"], 7);
}

#[test]
fn run_into_existing_dir_replaces_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let dest = tmp.path().join("run");
    fs::create_dir(&dest).unwrap();
    fs::write(dest.join("peaks.csv"), "stale").unwrap();
    fs::write(dest.join("keep.txt"), "mine").unwrap();
    let out = synthphase(&["run", "--config", &cfg, "--out", dest.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(fs::read_to_string(dest.join("peaks.csv")).unwrap(), "stale");
    assert_eq!(fs::read_to_string(dest.join("keep.txt")).unwrap(), "mine");
    assert!(dest.join("beam_est.svg").exists());
    // no staging directory is left next to the output
    assert_eq!(listing(tmp.path()), ["cfg.toml", "run"]);
}

#[test]
fn bundled_configs_validate() {
    for name in ["two_source.toml", "single_source.toml"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
        let out = synthphase(&["validate", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}
