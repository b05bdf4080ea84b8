use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn grpauth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grpauth")).args(args).output().unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--scenario", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    grpauth(&args)
}

#[test]
fn bundled_scenarios_exit_zero() {
    for name in ["happy_path.toml", "tamper.toml", "handover.toml", "curve43.toml", "harn_baseline.toml"] {
        let out = run(&scenario(name), &[]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8(out.stdout).unwrap().starts_with("{\"seq\":0,\"event\":\"header\""));
    }
}

#[test]
fn malformed_scenario_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n[[groups]]\nid = \"one\"\n").unwrap();
    let out = run(&path, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn invalid_scenario_and_usage_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n[[groups]]\nid = 1\nt = 3\nm = 3\nmembers = [\"a\", \"b\", \"c\", \"d\"]\n")
        .unwrap();
    assert_eq!(run(&path, &[]).status.code(), Some(2));
    assert_eq!(run(&scenario("missing.toml"), &[]).status.code(), Some(2));
    assert_eq!(grpauth(&["run"]).status.code(), Some(2));
    assert_eq!(grpauth(&["run", "--scenario", "x", "--suite", "p256"]).status.code(), Some(2));
}

#[test]
fn expectation_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("tamper.toml")).unwrap();
    let path = dir.path().join("wrong.toml");
    std::fs::write(&path, text.replacen("expect = \"rejected\"", "expect = \"accepted\"", 1)).unwrap();
    let out = run(&path, &["--out", dir.path().join("t.ndjson").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("expected accepted, got rejected"));
    assert!(dir.path().join("t.ndjson").exists());
}

#[test]
fn seed_and_suite_overrides() {
    let path = scenario("happy_path.toml");
    let base = run(&path, &[]).stdout;
    let reseeded = run(&path, &["--seed", "3"]);
    assert_eq!(reseeded.status.code(), Some(0));
    assert_ne!(reseeded.stdout, base);
    let curve = run(&path, &["--suite", "curve43"]);
    assert_eq!(curve.status.code(), Some(0));
    assert!(String::from_utf8(curve.stdout).unwrap().contains("\"suite\":\"curve-43-11\""));
}

#[test]
fn secure_plaintext_only_on_request() {
    let path = scenario("happy_path.toml");
    let quiet = String::from_utf8(run(&path, &[]).stdout).unwrap();
    assert!(!quiet.contains("\"event\":\"secure_plaintext\""));
    let loud = String::from_utf8(run(&path, &["--include-secure-plaintext"]).stdout).unwrap();
    assert!(loud.contains("{\"seq\":") && loud.contains("\"event\":\"secure_plaintext\""));
}

#[test]
fn costs_ranges() {
    let out = grpauth(&["costs", "--m-min", "1", "--m-max", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "scheme,m,cost\nharn,1,1463\nchien,1,6792\nproposed,1,1189\n");
    assert_eq!(grpauth(&["costs", "--m-min", "5", "--m-max", "4"]).status.code(), Some(2));
    assert_eq!(grpauth(&["costs", "--m-min", "0"]).status.code(), Some(2));
    assert_eq!(grpauth(&["costs"]).stdout, grpauth(&["costs"]).stdout);
}

#[test]
fn demo_report_is_stable() {
    let a = grpauth(&["demo-attack", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, grpauth(&["demo-attack", "--seed", "9"]).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("[harn] recovered == actual: true"), "{text}");
}
