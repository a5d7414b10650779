//! End-to-end tests running the built binary.

use std::collections::HashMap;
use std::process::{Command, Output};

fn exwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exwalk_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exwalk"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

/// Parses CSV output into one map per row, keyed by header names.
fn parse_csv(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), header.len(), "ragged row: {line}");
            header
                .iter()
                .zip(fields)
                .map(|(h, f)| (h.to_string(), f.to_string()))
                .collect()
        })
        .collect()
}

#[test]
fn prob_reach_emits_expected_record() {
    let out = exwalk(&["prob-reach", "--r", "1.0", "--N", "2"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row["quantity"], "prob_reach");
    assert_eq!(row["source"], "analytic");
    assert_eq!(row["N"], "2");
    let value: f64 = row["value"].parse().unwrap();
    assert!((value - 1.0 / 3.0).abs() < 1e-9);
    let bound: f64 = row["error_bound"].parse().unwrap();
    assert!((0.0..1e-9).contains(&bound));
}

#[test]
fn depth_tail_at_one_is_half() {
    let out = exwalk(&["max-depth-tail", "--r", "1.0", "--k", "1"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out));
    let value: f64 = rows[0]["value"].parse().unwrap();
    assert!((value - 0.5).abs() < 1e-9);
    // k is independent of any boundary; no N column is set.
    assert_eq!(rows[0]["N"], "");
}

#[test]
fn analytic_quantities_report_closed_forms() {
    for (args, expected) in [
        (vec!["expected-duration", "--r", "1.0", "--N", "2"], 1.5),
        (vec!["expected-hitting-time", "--r", "1.0", "--N", "2"], 4.5),
        (
            vec!["local-time-pmf", "--r", "1.0", "--N", "2", "--n", "1"],
            2.0 / 9.0,
        ),
        (
            vec!["pgf-failed", "--r", "1.0", "--N", "2", "--q", "0.5"],
            7.0 / 24.0,
        ),
        (
            vec!["pgf-success", "--r", "1.0", "--N", "2", "--q", "0.5"],
            1.0 / 12.0,
        ),
        (
            vec!["pgf-tau-n", "--r", "1.0", "--N", "2", "--q", "0.5"],
            2.0 / 17.0,
        ),
        (vec!["green", "--r", "1.0", "--N", "2", "--k", "1"], 0.5),
    ] {
        let out = exwalk(&args);
        assert!(out.status.success(), "{args:?} failed");
        let rows = parse_csv(&stdout(&out));
        let value: f64 = rows[0]["value"].parse().unwrap();
        assert!(
            (value - expected).abs() < 1e-8,
            "{args:?}: {value} vs {expected}"
        );
    }
}

#[test]
fn divergent_expected_max_uses_sentinels() {
    let out = exwalk(&["expected-max", "--r", "1.0"]);
    assert!(out.status.success(), "divergence is a result, not a failure");
    let rows = parse_csv(&stdout(&out));
    assert_eq!(rows[0]["quantity"], "E_max_depth");
    assert_eq!(rows[0]["value"], "inf");
    let note = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(note.contains("plateau"), "stderr should note the plateau");

    let out = exwalk(&["expected-max", "--r", "1.0", "--format", "json"]);
    let parsed: serde_json::Value = stdout(&out).lines().next().unwrap().parse().unwrap();
    assert_eq!(parsed["value"]["divergent"], true);
    let plateau = parsed["value"]["plateau"].as_f64().unwrap();
    assert!((plateau - 0.25).abs() < 1e-3);

    // Convergent case for contrast.
    let out = exwalk(&["expected-max", "--r", "0.5"]);
    let rows = parse_csv(&stdout(&out));
    let value: f64 = rows[0]["value"].parse().unwrap();
    assert!(value.is_finite() && value > 0.5 && value < 2.0);
}

#[test]
fn simulate_output_is_byte_identical_across_worker_counts() {
    let args = ["simulate", "--r", "0.8", "--N", "5", "--samples", "20000", "--seed", "7"];
    let one = exwalk_with_env(&args, "RAYON_NUM_THREADS", "1");
    let four = exwalk_with_env(&args, "RAYON_NUM_THREADS", "4");
    let again = exwalk_with_env(&args, "RAYON_NUM_THREADS", "4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout, "thread count changed output bytes");
    assert_eq!(four.stdout, again.stdout, "repeat run changed output bytes");
}

#[test]
fn simulate_json_lines_parse_and_describe_themselves() {
    let out = exwalk(&[
        "simulate", "--r", "0.9", "--N", "3", "--samples", "5000", "--seed", "3", "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut quantities = Vec::new();
    for line in text.lines() {
        let parsed: serde_json::Value = line.parse().expect("valid json line");
        assert_eq!(parsed["source"], "monte_carlo");
        assert_eq!(parsed["seed"], 3);
        quantities.push(parsed["quantity"].as_str().unwrap().to_string());
    }
    for expected in ["prob_reach", "E_D1", "green", "max_depth_tail", "E_tau_N", "local_time_pmf"] {
        assert!(
            quantities.iter().any(|quantity| quantity == expected),
            "missing {expected} in {quantities:?}"
        );
    }
}

#[test]
fn unkilled_simulation_measures_depth_past_the_boundary() {
    let out = exwalk(&[
        "simulate", "--unkilled", "--r", "0.5", "--N", "2", "--samples", "100000", "--seed", "1",
    ]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout(&out));
    let tail1 = rows
        .iter()
        .find(|row| row["quantity"] == "max_depth_tail" && row["k"] == "1")
        .expect("tail row at k=1");
    let freq: f64 = tail1["value"].parse().unwrap();
    let half_width: f64 = tail1["error_bound"].parse().unwrap();
    // First-step-right probability is exactly 1/2.
    assert!((freq - 0.5).abs() <= half_width + 1e-6, "{freq} vs 0.5");
    // Unkilled mode reports depth beyond the nominal boundary.
    assert!(rows
        .iter()
        .any(|row| row["quantity"] == "max_depth_tail" && row["k"] == "5"));
    // No hitting statistics without killing.
    assert!(!rows.iter().any(|row| row["quantity"] == "E_tau_N"));
}

#[test]
fn compare_passes_on_healthy_run_and_fails_on_absurd_sigma() {
    let args = [
        "compare", "--r", "1.0", "--N", "2", "--samples", "200000", "--seed", "42", "--q", "0.5",
    ];
    let out = exwalk(&args);
    let verdicts = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(
        out.status.code() == Some(0),
        "expected all PASS, stderr:\n{verdicts}"
    );
    assert!(verdicts.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
    assert!(!verdicts.contains("FAIL"));

    // Paired records: every monte_carlo row has an analytic sibling.
    let rows = parse_csv(&stdout(&out));
    for row in rows.iter().filter(|row| row["source"] == "monte_carlo") {
        assert!(
            rows.iter().any(|other| other["source"] == "analytic"
                && other["quantity"] == row["quantity"]
                && other["k"] == row["k"]
                && other["q"] == row["q"]),
            "unpaired row {row:?}"
        );
    }

    let out = exwalk(&[
        "compare", "--r", "1.0", "--N", "2", "--samples", "100", "--seed", "1", "--sigma", "0.001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let verdicts = String::from_utf8(out.stderr).unwrap();
    assert!(verdicts.contains("FAIL"));
}

#[test]
fn second_seeded_compare_grid_point_passes() {
    let out = exwalk(&["compare", "--r", "0.9", "--N", "3", "--samples", "200000", "--seed", "9"]);
    let verdicts = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr:\n{verdicts}");
    assert!(!verdicts.contains("FAIL"));
}

#[test]
fn invalid_parameters_exit_with_usage_code() {
    for args in [
        vec!["prob-reach", "--r", "1.5", "--N", "2"],
        vec!["prob-reach", "--r", "0.9", "--N", "0"],
        vec!["pgf-failed", "--r", "0.9", "--N", "2", "--q", "1.5"],
        vec!["green", "--r", "0.9", "--N", "2", "--k", "2"],
        vec!["simulate", "--r", "0.9", "--N", "2", "--samples", "0"],
    ] {
        let out = exwalk(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    // Unknown flags are clap usage errors, also exit code 2.
    let out = exwalk(&["prob-reach", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
