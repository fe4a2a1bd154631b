use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ermakov"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn golden(name: &str) -> Vec<u8> {
    fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn solve_default(out: &Path, extra: &[&str]) -> Output {
    let cfg = default_config();
    let mut args = vec!["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn airy_rows() {
    let out = run(&["airy", "0", "1", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z,ai,aip,bi,bip,wronskian_defect");
    assert_eq!(lines.len(), 4);
    let ai0: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((ai0 - 0.355028053887817).abs() < 1e-15);
    for l in &lines[1..] {
        let defect: f64 = l.split(',').nth(5).unwrap().parse().unwrap();
        assert!(defect.abs() < 1e-12);
    }
}

#[test]
fn airy_accepts_negative_arguments() {
    let out = run(&["airy", "-3.5"]);
    assert!(out.status.success());
}

#[test]
fn airy_without_arguments_is_a_usage_error() {
    assert_eq!(run(&["airy"]).status.code(), Some(2));
    assert_eq!(run(&["airy", "abc"]).status.code(), Some(2));
}

#[test]
fn solve_reproduces_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_default(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(dir.path().join("problem.json")).unwrap(), golden("problem.json"));
    assert_eq!(fs::read(dir.path().join("residuals.json")).unwrap(), golden("residuals.json"));
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("x,t,u,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 50 * 50);
    assert!(dir.path().join("profile.svg").exists());
}

#[test]
fn solve_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(solve_default(a.path(), &[]).status.success());
    assert!(solve_default(b.path(), &[]).status.success());
    for f in ["solution.csv", "problem.json", "residuals.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn negative_lambda_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_default(dir.path(), &["--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positivity regime"));
}

#[test]
fn tolerance_breach_exits_one_and_names_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_default(dir.path(), &["--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("u_t + u_xxx"));
    let res: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("residuals.json")).unwrap()).unwrap();
    assert_eq!(res["passed"], false);
}

#[test]
fn front_given_by_pm_matches_gamma_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(solve_default(a.path(), &[]).status.success());
    let problem: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("problem.json")).unwrap()).unwrap();
    let pm = problem["problem"]["P_m"].as_f64().unwrap();
    let out = solve_default(b.path(), &["--pm", &format!("{pm:?}")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let back: serde_json::Value = serde_json::from_slice(&fs::read(b.path().join("problem.json")).unwrap()).unwrap();
    assert!((back["problem"]["gamma"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(back["front_input"]["P_m"].as_f64().unwrap(), pm);
    assert_eq!(fs::read(a.path().join("solution.csv")).unwrap(), fs::read(b.path().join("solution.csv")).unwrap());
}

#[test]
fn grid_beyond_front_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(solve_default(dir.path(), &["--gamma", "0.5"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"gamma": 1.0, "unknown": 3}"#).unwrap();
    assert_eq!(run(&["solve", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--gamma", "1", "--pm", "2"]).status.code(), Some(2));
    assert_eq!(run(&["inverse", "--gamma", "1"]).status.code(), Some(2));
}

#[test]
fn inverse_prints_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["inverse", "--pm", "2.542002291416762", "--emit", "csv", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["gamma"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(!dir.path().join("problem.json").exists());
}

#[test]
fn reciprocal_writes_image_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_config();
    let out = run(&["reciprocal", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("reciprocal.csv")).unwrap();
    assert!(csv.starts_with("x,t,x_star,u_star\n"));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("reciprocal.json")).unwrap()).unwrap();
    assert_eq!(doc["x_star_origin"], 0.0);
    assert!(doc["s_star_coeff"].as_f64().unwrap().abs() < 1e-10);
    assert!(doc["compatibility"]["max_abs"].as_f64().unwrap() < 1e-4);
    assert!(fs::read_to_string(dir.path().join("front.csv")).unwrap().starts_with("t,S,S_star,"));
}

#[test]
fn modulate_checks_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_config();
    let d = dir.path().to_str().unwrap();
    let out = run(&["modulate", "--config", cfg.to_str().unwrap(), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("involution.json")).unwrap()).unwrap();
    assert!(doc["involution"]["t_error"].as_f64().unwrap() < 1e-10);
    assert!(doc["ablation_ratio"].as_f64().unwrap() >= 10.0);
    assert!(fs::read_to_string(dir.path().join("modulated.csv")).unwrap().starts_with("x,t_star,t,u_star\n"));

    let constant = run(&["modulate", "--config", cfg.to_str().unwrap(), "--out", d, "--family", "constant", "--value", "2"]);
    assert!(constant.status.success());
    assert_eq!(run(&["modulate", "--config", cfg.to_str().unwrap(), "--out", d, "--family", "constant"]).status.code(), Some(2));
}

#[test]
fn plot_renders_svg() {
    let dir = tempfile::tempdir().unwrap();
    assert!(solve_default(dir.path(), &["--emit", "csv"]).status.success());
    let csv = dir.path().join("solution.csv");
    for kind in ["profile", "heatmap"] {
        let svg = dir.path().join(format!("{kind}.svg"));
        let out = run(&["plot", csv.to_str().unwrap(), "--kind", kind, "--out", svg.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    }
    assert!(!dir.path().join("problem.json").exists());
    assert_eq!(run(&["plot", csv.to_str().unwrap(), "--column", "nope"]).status.code(), Some(2));
}
