use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn hfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfb"))
        .args(args)
        .output()
        .expect("hfb runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn small_config() -> Value {
    json!({
        "env": {"type": "stochastic", "k": 4,
                "losses": {"bernoulli": [0.3, 0.5, 0.5, 0.6]},
                "graphs": {"type": "iid_erdos_renyi", "p": 0.4}},
        "learner": {"type": "elimination"},
        "t": 3000, "replicates": 3, "seed": 11,
        "checkpoints": {"every": 1000}
    })
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hfb(&args)
}

#[test]
fn run_writes_report_checkpoints_and_phase_log() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &small_config());
    let before = std::fs::read(&config).unwrap();
    let out = dir.path().join("out");
    let o = run(&config, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&config).unwrap(), before);

    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["horizon"], 3000);
    assert_eq!(report["replicates"], 3);
    assert_eq!(report["master_seed"], 11);
    assert_eq!(report["per_replicate"].as_array().unwrap().len(), 3);
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);

    let checkpoints = std::fs::read_to_string(out.join("checkpoints.csv")).unwrap();
    let lines: Vec<&str> = checkpoints.lines().collect();
    assert_eq!(lines[0], "replicate,round,cum_pseudo_regret,cum_realized_regret");
    assert_eq!(lines.len(), 1 + 3 * 3);
    assert!(lines[3].starts_with("0,3000,"));

    let phases = std::fs::read_to_string(out.join("phase_log.csv")).unwrap();
    assert!(phases.starts_with("replicate,phase,eps_r,n_r,rounds_spent,surviving_actions\n0,1,0.25,"));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &small_config());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&config, &a, &["--jobs", "1"]).status.success());
    assert!(run(&config, &b, &["--jobs", "3"]).status.success());
    for f in ["report.json", "checkpoints.csv", "phase_log.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &small_config());
    let out = dir.path().join("out");
    assert!(run(&config, &out, &["--seed", "99"]).status.success());
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["master_seed"], 99);
}

#[test]
fn missing_horizon_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.as_object_mut().unwrap().remove("t");
    let config = write_config(dir.path(), "c.json", &cfg);
    let o = run(&config, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(".t"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["env"]["graphs"]["p"] = json!(1.5);
    let config = write_config(dir.path(), "c.json", &cfg);
    assert_eq!(run(&config, &dir.path().join("out"), &[]).status.code(), Some(2));

    let mut cfg = small_config();
    cfg["learner"]["bogus"] = json!(1);
    let config = write_config(dir.path(), "d.json", &cfg);
    assert_eq!(run(&config, &dir.path().join("out"), &[]).status.code(), Some(2));

    let o = run(&dir.path().join("missing.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_summary_and_cell_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = small_config();
    base["replicates"] = json!(2);
    let sweep = json!({
        "base": base,
        "axes": [
            {"name": "p", "path": "/env/graphs/p", "values": [0.2, 0.8]},
            {"name": "learner", "path": "/learner/type", "values": ["elimination", "ucb"]}
        ]
    });
    let config = write_config(dir.path(), "s.json", &sweep);
    let out = dir.path().join("out");
    let o = hfb(&["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "p,learner,mean_regret,se");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.2,elimination,"));
    for i in 0..4 {
        assert!(out.join(format!("cells/cell_{i:03}/report.json")).exists());
    }
}

#[test]
fn sweep_with_a_bad_cell_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = json!({
        "base": small_config(),
        "axes": [{"name": "p", "path": "/env/graphs/p", "values": [0.5, "x"]}]
    });
    let config = write_config(dir.path(), "s.json", &sweep);
    let o = hfb(&["sweep", "--config", config.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p"));
}

#[test]
fn verify_single_check() {
    let o = hfb(&["verify", "--only", "fig1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let results: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["name"], "fig1");
    assert_eq!(results[0]["status"], "pass");
    for key in ["property", "measured", "bound", "tolerance", "sample_size", "seed", "config"] {
        assert!(results[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn verify_writes_to_file_and_rejects_unknown_checks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let o = hfb(&["verify", "--only", "fig2", "--only", "turan", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let results: Vec<Value> = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(hfb(&["verify", "--only", "nope"]).status.code(), Some(2));
}

#[test]
fn graphgen_cliques() {
    let o = hfb(&["graphgen", "--cliques", "12", "4"]);
    assert!(o.status.success());
    let g: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(g["k"], 12);
    // Four cliques of three with self-loops: 4 * 3 * 3 edges.
    assert_eq!(g["edges"].as_array().unwrap().len(), 36);
    assert!(g["edges"].as_array().unwrap().contains(&json!([1, 3])));
    assert!(!g["edges"].as_array().unwrap().contains(&json!([3, 4])));
}

#[test]
fn graphgen_roundtrips_through_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let gpath = dir.path().join("g.json");
    let o = hfb(&["graphgen", "--er", "4", "0.5", "--seed", "3", "--out", gpath.to_str().unwrap()]);
    assert!(o.status.success());
    let graph: Value = serde_json::from_slice(&std::fs::read(&gpath).unwrap()).unwrap();
    let mut cfg = small_config();
    cfg["env"]["graphs"] = json!({"type": "fixed", "graph": graph});
    let config = write_config(dir.path(), "c.json", &cfg);
    assert!(run(&config, &dir.path().join("out"), &[]).status.success());
}

#[test]
fn graphgen_rejects_bad_arguments() {
    assert_eq!(hfb(&["graphgen", "--cliques", "5", "0"]).status.code(), Some(2));
    assert_eq!(hfb(&["graphgen", "--er", "5", "2.0"]).status.code(), Some(2));
    assert_eq!(hfb(&["graphgen"]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let example = dir.join("run_example.json");
    let out = tempfile::tempdir().unwrap();
    let o = run(&example, out.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        assert!(v.get("env").is_some() || v.get("base").is_some(), "{}", path.display());
    }
}
