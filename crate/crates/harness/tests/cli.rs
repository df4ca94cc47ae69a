use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exswarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exswarm")).args(args).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn shipped_configs_validate() {
    for name in ["flagship", "misuse", "threshold_sweep", "coin"] {
        let o = exswarm(&["validate", "--config", config(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
}

#[test]
fn violations_exit_2_and_are_all_listed() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("coin"))
        .unwrap()
        .replace("schema_version = 1", "schema_version = 2")
        .replace("steps = 5", "steps = 0")
        .replace("scenario = \"coin_claim\"", "scenario = \"nowhere\"");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, &text).unwrap();
    let o = exswarm(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for field in ["schema_version", "limits.steps", "scenario"] {
        assert!(err.lines().any(|l| l.starts_with("line ") && l.contains(field)), "{field} missing in:\n{err}");
    }
}

#[test]
fn bad_overrides_exit_2() {
    let o = exswarm(&["run", "--config", config("coin").to_str().unwrap(), "--episodes", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = exswarm(&["run", "--config", config("coin").to_str().unwrap(), "--workers", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_port_env_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_exswarm"))
        .args(["serve", "--config", config("flagship").to_str().unwrap()])
        .env("SWARM_BRIDGE_PORT", "not-a-port")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn missing_config_is_runtime_failure() {
    let o = exswarm(&["run", "--config", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_then_replay_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = exswarm(&[
        "run",
        "--config",
        config("flagship").to_str().unwrap(),
        "--episodes",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("verdict:"));
    let trace = out.join("traces/joint-0.jsonl");
    let o = exswarm(&["replay", trace.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(1);
    let broken = dir.path().join("broken.jsonl");
    std::fs::write(&broken, lines.join("\n")).unwrap();
    let o = exswarm(&["replay", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_reports_cliff() {
    let dir = tempfile::tempdir().unwrap();
    let o = exswarm(&[
        "sweep",
        "--config",
        config("threshold_sweep").to_str().unwrap(),
        "--episodes",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("cliff between cells 4 and 5"));
    assert!(dir.path().join("brittleness.csv").exists());
}
