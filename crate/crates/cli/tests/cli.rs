use std::process::{Command, Output};

use forkjoin_evt_cli::record::{read_csv, RunRecord};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forkjoin-evt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn single_json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let v = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(lines.next().is_none());
    v
}

#[test]
fn exact_solve_reproduces_balanced_row() {
    let v = single_json(&["solve", "--n", "10", "--out", "json"]);
    assert!((v["inventory"].as_f64().unwrap() - 1.35178).abs() < 1e-5);
    assert!((v["capacity"].as_f64().unwrap() - 1.19648).abs() < 1e-5);
    assert!((v["cost_f"].as_f64().unwrap() - 23.9296).abs() < 1e-3);
    assert_eq!(v["gamma"].as_f64().unwrap(), 0.5);
    assert!(v["seed"].is_null());
    assert_eq!(v["config_digest"].as_str().unwrap().len(), 16);
}

#[test]
fn normal_solve_uses_closed_form_level() {
    let v = single_json(&[
        "solve",
        "--n",
        "10",
        "--sigma-a",
        "1",
        "--method",
        "normal",
        "--out",
        "json",
    ]);
    assert!((v["inventory"].as_f64().unwrap() - 1.15129).abs() < 1e-5);
    assert_eq!(v["method"], "normal");
}

#[test]
fn incompatible_method_is_a_usage_error() {
    for args in [
        &["solve", "--n", "10", "--sigma-a", "0.5"][..],
        &["solve", "--n", "10", "--method", "normal"][..],
        &["solve", "--n", "10", "--method", "simulate"][..],
        &["solve", "--n", "10", "--b", "quadratic:1"][..],
        &["solve", "--n", "10", "--method", "bogus"][..],
        &["table", "1"][..],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let dir = std::env::temp_dir().join(format!("forkjoin-evt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("runs.csv");
    let o = run(&[
        "solve",
        "--n",
        "2,10,100",
        "--b",
        "power:1:2",
        "--method",
        "gumbel",
        "--out",
        "csv",
        "--file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let original = std::fs::read(&path).unwrap();
    let records: Vec<RunRecord> = read_csv(original.as_slice()).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[2].b_rule, "power:1:2");
    let mut rewritten = Vec::new();
    forkjoin_evt_cli::record::write_csv(&mut rewritten, &records).unwrap();
    assert_eq!(rewritten, original);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn closed_form_tables_pass() {
    for id in ["2", "4"] {
        let o = run(&["table", id]);
        assert_eq!(o.status.code(), Some(0), "table {id}:\n{}", stdout(&o));
        assert!(stdout(&o).contains("42 checked, 0 failed"));
    }
}

#[test]
fn table_filter_and_json_lines() {
    let o = run(&["table", "4", "--n", "10", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r["n"] == 10 && r["status"] == "PASS"));
}

#[test]
fn design_table_is_informational() {
    let o = run(&["table", "5", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 25);
}

#[test]
fn sample_is_seed_deterministic() {
    let args = ["sample", "--n", "3", "--sigma-a", "0.5", "--reps", "20", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("rep_index,max_backlog,demand_at_d,argmax_time,truncated_flag\n"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn simulated_solve_records_seed() {
    let v = single_json(&[
        "solve",
        "--n",
        "5",
        "--sigma-a",
        "0.5",
        "--method",
        "simulate",
        "--reps",
        "400",
        "--quantile-reps",
        "10",
        "--grid-step",
        "0.01",
        "--seed",
        "11",
        "--out",
        "json",
    ]);
    assert_eq!(v["seed"].as_u64(), Some(11));
    assert!(v["stderr_f"].as_f64().unwrap() > 0.0);
    assert!(v["inventory"].as_f64().unwrap() > 0.0);
}
