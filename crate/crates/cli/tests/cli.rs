//! End-to-end tests of the `stubborn` binary: flag parsing, output shapes,
//! exit codes and file round trips.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn stubborn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stubborn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stubborn-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn analytic_reports_the_worked_point() {
    let out = stubborn(&["analytic", "--q", "0.4", "--gamma", "0", "--a", "2", "--json"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["strategy"], "tsm:2");
    let close = |key: &str, expected: f64| {
        let got = doc[key].as_f64().unwrap();
        assert!((got - expected).abs() < 1e-12, "{key}: {got} vs {expected}");
    };
    close("revenue_ratio", 328.0 / 1387.0);
    close("delta", 365.0 / 239.0);
    close("apparent_hashrate", 1640.0 / 4541.0);
    close("e_duration", 73.0 / 19.0);
}

#[test]
fn analytic_applies_scales() {
    let out = stubborn(&[
        "analytic", "--q", "0.4", "--gamma", "0", "--a", "2", "--tau0", "600", "--reward", "6.25",
        "--json",
    ]);
    let doc = stdout_json(&out);
    let duration = doc["e_duration"].as_f64().unwrap();
    assert!((duration - 600.0 * 73.0 / 19.0).abs() < 1e-9);
    let ratio = doc["revenue_ratio"].as_f64().unwrap();
    assert!((ratio - (328.0 / 1387.0) * 6.25 / 600.0).abs() < 1e-12);
}

#[test]
fn domain_errors_exit_with_code_two() {
    let bad_q = stubborn(&["analytic", "--q", "0.6", "--gamma", "0", "--a", "2"]);
    assert_eq!(bad_q.status.code(), Some(2));
    let bad_a = stubborn(&["analytic", "--q", "0.3", "--gamma", "0", "--a", "0"]);
    assert_eq!(bad_a.status.code(), Some(2));
    let missing_a = stubborn(&[
        "simulate", "--strategy", "tsm", "--q", "0.3", "--gamma", "0", "--cycles", "10", "--seed", "1",
    ]);
    assert_eq!(missing_a.status.code(), Some(2));
    let stray_a = stubborn(&[
        "simulate", "--strategy", "lsm", "--a", "2", "--q", "0.3", "--gamma", "0", "--cycles", "10",
        "--seed", "1",
    ]);
    assert_eq!(stray_a.status.code(), Some(2));
    // clap usage errors share the same code
    let unknown_flag = stubborn(&["analytic", "--nope"]);
    assert_eq!(unknown_flag.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_and_thread_count_invariant() {
    let run = |threads: &str| {
        let out = stubborn(&[
            "simulate", "--strategy", "tsm", "--a", "2", "--q", "0.35", "--gamma", "0.5",
            "--cycles", "30000", "--seed", "9", "--threads", threads, "--json",
        ]);
        assert!(out.status.success());
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"), "different worker counts changed the output");
    let doc: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(doc["strategy"], "tsm:2");
    assert_eq!(doc["n_cycles"], 30000);
    assert!(doc["apparent_hashrate"]["mean"].as_f64().unwrap() > 0.0);
}

#[test]
fn hiker_prints_closed_forms_and_oracle() {
    let out = stubborn(&[
        "hiker", "--m", "2", "--capital-m", "4", "--p", "0.6", "--oracle", "--json",
    ]);
    let doc = stdout_json(&out);
    let closed = &doc["closed_forms"];
    assert!((closed["exit_prob_low"].as_f64().unwrap() - 4.0 / 13.0).abs() < 1e-12);
    assert!((closed["e_exit_time"].as_f64().unwrap() - 50.0 / 13.0).abs() < 1e-12);
    let oracle = &doc["oracle"];
    assert!((oracle["e_exit_time_given_low"].as_f64().unwrap() - 50.0 / 13.0).abs() < 1e-10);
    // degenerate conditioning is a domain error
    let degenerate = stubborn(&["hiker", "--m", "0", "--capital-m", "4", "--p", "0.6"]);
    assert_eq!(degenerate.status.code(), Some(2));
}

#[test]
fn mixed_composes_and_checks_the_bound() {
    let out = stubborn(&["mixed", "--pattern", "tsm:2,honest", "--q", "0.4", "--gamma", "0", "--json"]);
    let doc = stdout_json(&out);
    assert!((doc["composed"]["d"].as_f64().unwrap() - 230.0 / 167.0).abs() < 1e-12);
    assert!((doc["composed"]["gamma_tilde"].as_f64().unwrap() - 1181.0 / 3173.0).abs() < 1e-12);
    assert_eq!(doc["no_advantage"]["holds"], true);
    let sm = stubborn(&["mixed", "--pattern", "sm,honest", "--q", "0.4", "--gamma", "0"]);
    assert_eq!(sm.status.code(), Some(2));
}

#[test]
fn sweep_round_trips_through_files() {
    let dir = temp_dir("sweep");
    let config = dir.join("grid.conf");
    fs::write(
        &config,
        "q_min = 0.1\nq_max = 0.4\nq_steps = 3\ngamma_min = 0\ngamma_max = 1\ngamma_steps = 2\nstrategies = honest, tsm:1, tsm:2\n",
    )
    .unwrap();
    let csv_path = dir.join("map.csv");
    let out = stubborn(&[
        "sweep", "--grid", config.to_str().unwrap(), "--out", csv_path.to_str().unwrap(),
        "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cells = stubborn_mining::sweep::parse_csv(&csv_path).unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells.iter().all(|c| c.values.len() == 3));

    let json_path = dir.join("map.json");
    let out = stubborn(&[
        "sweep", "--grid", config.to_str().unwrap(), "--out", json_path.to_str().unwrap(),
        "--format", "json", "--mode", "fig1", "--a-values", "1,2,3",
    ]);
    assert!(out.status.success());
    let fig1 = stubborn_mining::sweep::parse_json(&json_path).unwrap();
    assert_eq!(fig1.len(), 6);
    assert!(fig1.iter().all(|c| c.values.len() == 3), "tsm:1 plus A in {{2, 3}}");

    // CLI overrides shrink the grid from the same config
    let small_path = dir.join("small.csv");
    let out = stubborn(&[
        "sweep", "--grid", config.to_str().unwrap(), "--out", small_path.to_str().unwrap(),
        "--format", "csv", "--q-steps", "1", "--gamma-steps", "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stubborn_mining::sweep::parse_csv(&small_path).unwrap().len(), 1);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_io_failures_exit_with_code_three() {
    let dir = temp_dir("io");
    let config = dir.join("grid.conf");
    fs::write(&config, "q_steps = 2\ngamma_steps = 2\n").unwrap();
    let out = stubborn(&[
        "sweep", "--grid", config.to_str().unwrap(), "--out", "/nonexistent-dir/map.csv",
        "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let missing_config = stubborn(&[
        "sweep", "--grid", "/nonexistent-dir/grid.conf", "--out",
        dir.join("x.csv").to_str().unwrap(), "--format", "csv",
    ]);
    assert_eq!(missing_config.status.code(), Some(3));
    // selfish mining off gamma = 0 under the analytic backend is a domain error
    fs::write(&config, "strategies = honest, sm\nq_steps = 2\ngamma_steps = 2\n").unwrap();
    let mismatch = stubborn(&[
        "sweep", "--grid", config.to_str().unwrap(), "--out", dir.join("y.csv").to_str().unwrap(),
        "--format", "csv",
    ]);
    assert_eq!(mismatch.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}
