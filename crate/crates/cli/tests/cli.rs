use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCALAR: &str = r#"{
    "name": "scalar contraction",
    "variables": ["x"],
    "noise": [{"name": "w", "type": "normal", "mean": 0, "std": 1}],
    "dynamics": ["0.5*x + 0.1*w"],
    "regions": {
        "A": {"disjuncts": [["x >= -0.1", "x <= 0.1"]]},
        "B": {"disjuncts": [["x >= 1", "x <= 3"]]}
    },
    "propositions": ["p0", "p1", "p2"],
    "labels": {"A": "p0", "B": "p1"},
    "default_label": "p2",
    "formula": "p0 & G !p1",
    "horizon": 5,
    "synthesis": {"max_degree": 4},
    "monte_carlo": {"realizations": 2000, "confidence": 0.999, "seed": 3, "initial_regions": ["A"]}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stochbarrier"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("problem.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_succeeds_with_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--monte-carlo", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lower = r["lower_bound"].as_f64().unwrap();
    assert!(lower > 0.5, "{lower}");
    assert!(lower <= r["monte_carlo"]["upper"].as_f64().unwrap());
    assert_eq!(r["num_synthesized"], 1);
}

#[test]
fn verify_writes_artifacts_and_reuses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    let args = [
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--cache-dir",
        cache.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    for f in ["report.json", "report.txt", "certificate_0.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(run(&args).status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["tasks"][0]["cached"], true);
}

#[test]
fn vacuous_result_exits_with_one() {
    let o = run(&["verify", "--config", configs().join("lorenz.json").to_str().unwrap(), "--max-degree", "2"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("P(satisfaction)"));
}

#[test]
fn missing_dynamics_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = SCALAR.replace(r#""dynamics": ["0.5*x + 0.1*w"],"#, "");
    let cfg = write_config(dir.path(), &text);
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/dynamics"), "{}", stderr(&o));
}

#[test]
fn bad_expression_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCALAR.replace("0.5*x + 0.1*w", "0.5*x + * w"));
    let o = run(&["decompose", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("/dynamics/0") && e.contains("column"), "{e}");
}

#[test]
fn translate_true_gives_one_state() {
    let o = run(&["translate", "--formula", "true", "--props", "p0", "--no-negate"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("shape=").count(), 1, "{dot}");
    let o = run(&["translate", "--formula", "true", "--props", "p0"]);
    assert_eq!(stdout(&o).matches("shape=").count(), 1);
}

#[test]
fn translate_rejects_unknown_propositions() {
    let o = run(&["translate", "--formula", "G !p7", "--props", "p0,p1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decompose_given_automaton() {
    let o = run(&[
        "decompose",
        "--config",
        configs().join("running_example.json").to_str().unwrap(),
        "--dfa",
        configs().join("running_example.dfa.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(d["runs"].as_array().unwrap().len(), 4);
    assert_eq!(d["tasks"].as_array().unwrap().len(), 5);
}

#[test]
fn simulate_writes_estimate_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let csv = dir.path().join("trace.csv");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--realizations", "500", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let e: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(e["trials"], 500);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,x,label"));
    assert_eq!(text.lines().count(), 6);
    // same seed, same answer
    let again = run(&["simulate", "--config", cfg.to_str().unwrap(), "--realizations", "500"]);
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn certificate_round_trip_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("out");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cert = out.join("certificate_0.json");
    let o = run(&["check-certificate", "--config", cfg.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(c["status"], "verified");

    // a barrier that is zero everywhere cannot certify anything
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    v["barrier"]["terms"] = serde_json::json!([]);
    let broken = dir.path().join("broken.json");
    fs::write(&broken, v.to_string()).unwrap();
    let o = run(&["check-certificate", "--config", cfg.to_str().unwrap(), "--certificate", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn export_sdp_writes_sdpa_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("sdp");
    let o = run(&["export-sdp", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--max-degree", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("task_0.dat-s")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let m: usize = lines[1].trim().parse().unwrap();
    assert!(m > 0);
    assert_eq!(lines[4].split_whitespace().count(), m);
}

#[test]
fn zero_horizon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--horizon", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
