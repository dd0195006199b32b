//! End-to-end checks of the binary: exit codes, outputs, determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

static DIR_SEQ: AtomicU32 = AtomicU32::new(0);

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "canon-avg-test-{}-{}",
        std::process::id(),
        DIR_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn canon_avg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canon-avg"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn list_scenarios_names_every_scenario() {
    let out = canon_avg(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "abrupt-field",
        "two-level",
        "adiabatic-gaussian",
        "harmonic-nonresonant",
        "harmonic-resonant",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_writes_report_and_curves_and_exits_zero() {
    let dir = scratch_dir();
    let config = dir.join("run.conf");
    fs::write(&config, "scenario = abrupt_field\nseed = 7\ncompare = std-pt\n").unwrap();
    let out_dir = dir.join("out");

    let out = canon_avg(&["run", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["scenario"], "abrupt-field");
    assert_eq!(report["passed"], true);
    assert_eq!(report["params"]["seed"], 7);
    assert_eq!(report["params"]["n_modes"], 8);
    assert!(report["curves"].as_array().unwrap().len() >= 2);
    assert!(report["features"].as_array().unwrap().iter().all(|f| f["pass"] == true));

    for file in [
        "curve-order-1-vs-exact.csv",
        "curve-order-2-vs-exact.csv",
        "curve-standard-pt-vs-exact.csv",
        "error-vs-t-order-2.csv",
        "trajectory.csv",
    ] {
        let text = fs::read_to_string(out_dir.join(file)).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.contains(','), "{file} header: {header}");
        assert!(lines.next().is_some(), "{file} has no data rows");
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS abrupt-field/order-2-vs-exact"));
}

#[test]
fn identical_config_and_seed_give_bit_identical_reports() {
    let dir = scratch_dir();
    let config = dir.join("run.conf");
    fs::write(&config, "scenario = two_level\nepsilon = 0.05\ng = 1\ndelta0 = 0\nseed = 3\n")
        .unwrap();
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out_dir in [&a, &b] {
        let out = canon_avg(&["run", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ra = fs::read(a.join("report.json")).unwrap();
    let rb = fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb, "reports differ between identical runs");
}

#[test]
fn command_line_epsilon_overrides_the_config() {
    let dir = scratch_dir();
    let config = dir.join("run.conf");
    fs::write(&config, "scenario = abrupt_field\nepsilon = 0.1\n").unwrap();
    let out_dir = dir.join("out");
    let out = canon_avg(&[
        "run",
        config.to_str().unwrap(),
        "--epsilon",
        "0.07",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["params"]["epsilon"], 0.07);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = scratch_dir();
    let config = dir.join("bad.conf");
    fs::write(&config, "scenario = abrupt_field\nbanana = 3\n").unwrap();
    let out = canon_avg(&["run", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("banana"), "stderr: {err}");
}

#[test]
fn increasing_sweep_is_rejected() {
    let dir = scratch_dir();
    let config = dir.join("bad.conf");
    fs::write(&config, "scenario = abrupt_field\nepsilon = 0.05, 0.1\n").unwrap();
    let out = canon_avg(&["run", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("strictly decreasing"), "stderr: {err}");
}

#[test]
fn missing_config_fails_with_message() {
    let out = canon_avg(&["run", "/definitely/not/here.conf"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("cannot read config"), "stderr: {err}");
}

#[test]
fn unknown_scenario_fails_with_message() {
    let dir = scratch_dir();
    let config = dir.join("run.conf");
    fs::write(&config, "scenario = quartic_kick\n").unwrap();
    let out = canon_avg(&["run", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("quartic_kick"), "stderr: {err}");
}

#[test]
fn help_documents_the_csv_columns() {
    let out = canon_avg(&["run", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["epsilon, sup_error, t_end", "t, error", "re_c0, im_c0"] {
        assert!(text.contains(needle), "missing `{needle}` in --help");
    }
}
