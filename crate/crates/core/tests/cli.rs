//! The `faithless` binary: outputs, exit codes and manifest replay.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use faithless::cli::{RunManifest, EXIT_INSTABILITY, EXIT_OK, EXIT_TOLERANCE, EXIT_VALIDATION};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_faithless"));
    c.env_remove("FAITHLESS_SEED");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"))
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn short_config(dir: &Path, name: &str, steps: usize) -> PathBuf {
    let text = std::fs::read_to_string(config(name)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["n_steps"] = steps.into();
    let p = dir.join(format!("{name}_short.json"));
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

#[test]
fn bundled_configs_are_the_builtin_scenarios() {
    for name in faithless::experiments::SCENARIOS {
        let text = std::fs::read_to_string(config(name)).unwrap();
        let spec = faithless::plant::ScenarioSpec::from_json(&text).unwrap();
        let want = faithless::experiments::scenario(name, faithless::experiments::DEFAULT_SEED).unwrap();
        assert_eq!(spec, want, "{name}");
    }
}

#[test]
fn simulate_example1_writes_table1_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = run(bin().args(["simulate", "--config"]).arg(config("example1")).arg("--out").arg(&out));
    assert_eq!(code(&o), EXIT_OK);
    for f in ["trace.csv", "correlations.csv", "correlations.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: faithless::stats::CorrelationReport =
        serde_json::from_str(&std::fs::read_to_string(out.join("correlations.json")).unwrap()).unwrap();
    let od = report.value("O", "D").unwrap().unwrap();
    assert!((od + 0.999).abs() < 0.01);
    assert!(report.value("O", "P").unwrap().unwrap().abs() < 0.05);
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,"));
    assert!(!trace.contains(';'));

    let again = dir.path().join("again");
    run(bin().args(["simulate", "--config"]).arg(config("example1")).arg("--out").arg(&again));
    assert_eq!(std::fs::read(out.join("trace.csv")).unwrap(), std::fs::read(again.join("trace.csv")).unwrap());
}

#[test]
fn invalid_config_is_a_validation_failure_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("example1")).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"dt\": 0.001", "\"dt\": -0.001")).unwrap();
    let out = dir.path().join("out");
    let o = run(bin().args(["simulate", "--config"]).arg(&bad).arg("--out").arg(&out));
    assert_eq!(code(&o), EXIT_VALIDATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));
    assert!(!out.exists());

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"model\": \"integral_loop\",\n  \"gain\": \n}").unwrap();
    let o = run(bin().args(["simulate", "--config"]).arg(&broken).arg("--out").arg(&out));
    assert_eq!(code(&o), EXIT_VALIDATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = run(bin().args(["table", "12", "--out"]).arg(&out));
    assert_eq!(code(&o), EXIT_VALIDATION);
    assert!(!out.exists());
}

#[test]
fn unstable_loop_exits_with_instability() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(short_config(dir.path(), "example1", 20_000)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["lag"] = 0.02.into();
    let p = dir.path().join("unstable.json");
    std::fs::write(&p, v.to_string()).unwrap();
    let o = run(bin().args(["simulate", "--config"]).arg(&p).arg("--out").arg(dir.path().join("o")));
    assert_eq!(code(&o), EXIT_INSTABILITY);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('P') || err.contains('O'), "{err}");
}

#[test]
fn table_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["table", "3", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("table_3.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("table,row,column,computed,published,abs_diff,limit"));
    let or = csv.lines().find(|l| l.starts_with("3,O,R,")).unwrap();
    let fields: Vec<&str> = or.split(',').collect();
    let v: f64 = fields[3].parse().unwrap();
    assert!((0.65..=0.76).contains(&v));
    let limit: f64 = fields[6].parse().unwrap();
    assert!((limit - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

    let o = run(bin().args(["table", "2", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), EXIT_OK);

    let o = run(bin().args(["table", "7", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("table_7.csv")).unwrap();
    let oe = csv.lines().find(|l| l.starts_with("7,O,E,")).unwrap();
    let v: f64 = oe.split(',').nth(3).unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-9);

    let o = run(bin().args(["table", "9", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), EXIT_TOLERANCE);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn theorem_checks_print_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["verify-theorems", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), EXIT_OK);
    let s = stdout(&o);
    for name in ["endpoint_matched_forward", "endpoint_matched_midpoint", "exponential_counterexample", "telescoping"] {
        assert!(s.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{name}: {s}");
    }
}

#[test]
fn discover_and_tcv_on_example1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["discover", "--config"]).arg(config("example1")).arg("--out").arg(dir.path()));
    assert_eq!(code(&o), EXIT_OK);
    let diagram = std::fs::read_to_string(dir.path().join("discovery.txt")).unwrap();
    assert!(diagram.contains("D -> P") && diagram.contains("D -- O"));
    assert!(diagram.contains("learned skeleton: {D-O}"));

    let o = run(bin().args(["tcv", "--config"]).arg(config("example1")).arg("--out").arg(dir.path()));
    assert_eq!(code(&o), EXIT_OK);
    let s = stdout(&o);
    assert!(s.contains("P: CONTROLLED") && s.contains("opposed by O"), "{s}");
}

#[test]
fn seed_comes_from_the_environment_unless_given() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["calibrate", "--runs", "30", "--n-steps", "20000", "--coherence-time", "0.1"];
    let a = dir.path().join("a");
    run(bin().args(args).arg("--out").arg(&a).env("FAITHLESS_SEED", "42"));
    let b = dir.path().join("b");
    run(bin().args(args).args(["--seed", "7"]).arg("--out").arg(&b).env("FAITHLESS_SEED", "42"));
    let ma = RunManifest::read(&a.join("manifest.json")).unwrap();
    let mb = RunManifest::read(&b.join("manifest.json")).unwrap();
    assert_eq!(ma.seeds, vec![42]);
    assert_eq!(mb.seeds, vec![7]);
}

#[test]
fn replay_reproduces_outputs_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "example2", 50_001);
    let first = dir.path().join("first");
    let o = run(bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&first));
    assert_eq!(code(&o), EXIT_OK);
    let manifest = RunManifest::read(&first.join("manifest.json")).unwrap();
    assert_eq!(manifest.outputs.len(), 3);

    let second = dir.path().join("second");
    let o = run(bin().arg("replay").arg(first.join("manifest.json")).arg("--out").arg(&second));
    assert_eq!(code(&o), EXIT_OK);
    for f in &manifest.outputs {
        assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap(), "{f}");
    }
    let replayed = RunManifest::read(&second.join("manifest.json")).unwrap();
    assert_eq!(replayed.invocation, manifest.invocation);
}
