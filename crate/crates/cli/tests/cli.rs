//! Runs the `shortpath-lab` binary end to end.

use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shortpath-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn params_reports_both_families() {
    let o = lab(&["params", "--k", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k"], 3);
    let c = v["k_spin"]["report"]["c"].as_f64().unwrap();
    assert!(c > 0.0 && c < 0.5);
    assert!(v["max_k_csp"]["b_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn spectrum_scan_to_stdout() {
    let o = lab(&["spectrum-scan", "--n", "5", "--seed", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("seed,index,n,k,eta,b,tol,e0,e1,e2,residual,status\n"));
    // Default grid: 101 values of b.
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn config_file_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"kind":"conditions","ensemble":"k-cnf","n":6,"b_grid":[0.1,0.2],"instances":2}"#).unwrap();
    let out = dir.path().join("out");
    let o = lab(&["conditions", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("conditions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("conditions.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["ensemble"], "k-cnf");

    // The same config through a different subcommand is refused.
    let o = lab(&["scaling", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn run_prints_one_json_line_per_instance() {
    let o = lab(&["run", "--ensemble", "csp", "--k", "2", "--n", "6", "--b", "0.3", "--instances", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    for (i, v) in lines.iter().enumerate() {
        assert_eq!(v["index"], i as u64);
        assert!(v["run"]["optimal"].is_boolean());
    }
}

#[test]
fn bad_arguments_fail() {
    assert!(!lab(&["spectrum-scan"]).status.success());
    assert!(!lab(&["spectrum-scan", "--n", "5", "--ensemble", "nope"]).status.success());
    assert!(!lab(&["spectrum-scan", "--n", "5", "--eta", "1.5"]).status.success());
}
