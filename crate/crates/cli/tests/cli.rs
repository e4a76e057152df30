use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_r13-verify"));
    c.env_remove("R13_OUTPUT_DIR");
    c
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn estimate_constants_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "estimate-constants",
            "--seed",
            "11",
            "--kn",
            "0.5",
            "--output-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["seed"], 11);
    assert_eq!(json["config"]["kn"], 0.5);
    assert_eq!(json["passed"], true);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("suite,quantity,value,tolerance,pass\n"));
    assert!(csv.lines().any(|l| l.starts_with("constants,alpha0,")));
}

#[test]
fn config_errors_name_the_field_and_exit_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [
        (r#"{"kn": 1.0, "degre": 2}"#, "degre"),
        (r#"{"suites": []}"#, "suites"),
        (r#"{"kn": 0}"#, "kn"),
    ] {
        let cfg = write_config(dir.path(), text);
        let out = bin()
            .args(["report", "--config"])
            .arg(&cfg)
            .arg("--output-dir")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(
            stderr(&out).contains(&format!("`{field}`")),
            "{text}: {}",
            stderr(&out)
        );
    }
    let out = bin()
        .args(["report", "--epsilon-w", "-0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon_w"), "{}", stderr(&out));
}

#[test]
fn output_directory_precedence() {
    let root = tempfile::tempdir().unwrap();
    let from_env = root.path().join("env");
    let from_cfg = root.path().join("cfg");
    let from_flag = root.path().join("flag");
    let cfg = write_config(
        root.path(),
        &format!(
            r#"{{"suites": ["constants"], "output_dir": {:?}}}"#,
            from_cfg
        ),
    );

    let run = |extra: &[&std::ffi::OsStr]| {
        bin()
            .arg("report")
            .arg("--config")
            .arg(&cfg)
            .env("R13_OUTPUT_DIR", &from_env)
            .args(extra)
            .output()
            .unwrap()
    };
    assert!(run(&["--output-dir".as_ref(), from_flag.as_os_str()])
        .status
        .success());
    assert!(from_flag.join("report.csv").exists() && !from_cfg.exists());
    assert!(run(&[]).status.success() && from_cfg.join("report.csv").exists());
    assert!(!from_env.exists());

    let env_cfg = write_config(root.path(), r#"{"suites": ["bc"]}"#);
    let out = bin()
        .args(["report", "--config"])
        .arg(&env_cfg)
        .env("R13_OUTPUT_DIR", &from_env)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(from_env.join("report.json").exists());
}

#[test]
fn failed_checks_exit_nonzero_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    // the bound-ratio drift from N = 2 to 3 exceeds its limit
    let out = bin()
        .args(["estimate-constants", "--degree", "2", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("korn/rinv_stf_e1_drift_n2"),
        "{}",
        stderr(&out)
    );
    assert!(dir.path().join("report.csv").exists());
}

#[test]
fn solve_exports_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"subdivisions": 1}"#);
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let fields = std::fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    assert!(fields.starts_with("point,x,y,z,component,value\n"));
    assert!(fields.lines().any(|l| l.contains(",theta,")));
}
