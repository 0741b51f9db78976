//! End-to-end tests of the `phaselab` binary: documented examples, exit
//! codes, byte-level reproducibility, and schema conformance of the JSON
//! envelope.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_phaselab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_with_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env(key, val)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

/// Stdout bytes with the wall-clock line removed; everything else must
/// be reproducible bit for bit.
fn without_wall_time(out: &Output) -> Vec<u8> {
    let text = String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8");
    text.lines()
        .filter(|l| !l.contains("\"wall_time_s\""))
        .flat_map(|l| l.bytes().chain(std::iter::once(b'\n')))
        .collect()
}

fn unique_tmp(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("phaselab-test-{}-{}", std::process::id(), tag))
}

#[test]
fn verify_reports_zero_difference() {
    let out = run(&["series", "verify", "--order", "40"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["max_coeff_diff"], "0");
}

#[test]
fn conjugation_is_not_holomorphic() {
    let out = run(&[
        "moduli",
        "check-cr",
        "--n",
        "1",
        "--matrix",
        "[[1,0],[0,-1]]",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["result"]["holomorphic"], Value::Bool(false));
    assert_eq!(v["result"]["s_norm"].as_f64().unwrap(), 1.0);
}

#[test]
fn zero_step_size_is_an_exact_no_op() {
    let evolve = stdout_json(&run(&[
        "mm", "evolve", "--N", "2", "--dt", "0", "--steps", "5", "--seed", "1",
    ]));
    let energy = stdout_json(&run(&["mm", "energy", "--N", "2", "--seed", "1"]));
    // Same seed and defaults, so the evolve must hand back exactly the
    // configuration that `mm energy` reports, digit for digit.
    assert_eq!(
        evolve["result"]["final_config"],
        energy["result"]["configuration"]
    );
    assert_eq!(evolve["result"]["relative_energy_drift"].as_f64(), Some(0.0));
}

#[test]
fn same_seed_gives_byte_identical_output() {
    for args in [
        vec!["fermion", "crosscheck", "--n", "3", "--seed", "11"],
        vec![
            "mm", "evolve", "--N", "2", "--dt", "0.001", "--steps", "40", "--seed", "7",
        ],
        vec!["moduli", "sample", "--n", "4", "--seed", "123"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(exit_code(&a), 0);
        assert_eq!(
            without_wall_time(&a),
            without_wall_time(&b),
            "non-reproducible output for {args:?}"
        );
    }
}

#[test]
fn missing_input_source_exits_2() {
    let out = run(&["moduli", "rs-residuals", "--n", "2"]);
    assert_eq!(exit_code(&out), 2);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["kind"], "invalid-arguments");
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(&["series", "verify", "--order", "40", "--bogus"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn budget_override_exits_3() {
    let out = run_with_env(
        &[
            "fock", "coherent", "--modes", "2", "--cutoff", "20", "--z", "[1,1]",
        ],
        "PHASELAB_BUDGET_BYTES",
        "1000",
    );
    assert_eq!(exit_code(&out), 3);
    let v = stdout_json(&out);
    assert_eq!(v["error"]["kind"], "resource-budget");
}

#[test]
fn budget_override_is_echoed_in_config() {
    let out = run_with_env(
        &["fock", "squeeze", "--r", "0.1", "--cutoff", "20"],
        "PHASELAB_BUDGET_BYTES",
        "2000000",
    );
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["config"]["budget_bytes"].as_u64(), Some(2_000_000));
}

#[test]
fn invalid_budget_value_exits_2() {
    let out = run_with_env(
        &["fock", "squeeze", "--r", "0.1", "--cutoff", "20"],
        "PHASELAB_BUDGET_BYTES",
        "not-a-number",
    );
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "invalid-arguments");
}

#[test]
fn validation_failure_exits_4_with_residual() {
    // r = 3 leaks far past any cutoff of 6.
    let out = run(&["fock", "squeeze", "--r", "3.0", "--cutoff", "6"]);
    assert_eq!(exit_code(&out), 4);
    let v = stdout_json(&out);
    assert_eq!(v["error"]["kind"], "numerical-validation");
    let residual = v["error"]["residual"].as_f64().expect("residual present");
    assert!(residual > 1e-8, "reported residual {residual}");
}

#[test]
fn non_orthogonal_matrix_exits_4() {
    let out = run(&[
        "moduli",
        "check-cr",
        "--n",
        "1",
        "--matrix",
        "[[1,1],[0,1]]",
    ]);
    assert_eq!(exit_code(&out), 4);
    let v = stdout_json(&out);
    assert!(v["error"]["residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn resolution_tolerance_gate_exits_4() {
    let out = run(&[
        "fock",
        "resolution",
        "--modes",
        "1",
        "--cutoff",
        "30",
        "--radial",
        "64",
        "--angular",
        "128",
        "--k-max",
        "10",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(exit_code(&out), 4);
    let v = stdout_json(&out);
    assert!(v["error"]["residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn envelopes_conform_to_shipped_schema() {
    let schema_path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/result-schema.json"
    );
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).expect("schema readable"))
            .expect("schema parses");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");

    let samples: Vec<Vec<&str>> = vec![
        vec!["series", "verify", "--order", "20"],
        vec!["series", "poincare", "--order", "10"],
        vec!["series", "theta", "--which", "3", "--order", "8"],
        vec!["moduli", "sample", "--n", "2", "--seed", "5"],
        vec!["moduli", "check-cr", "--n", "1", "--matrix", "[[1,0],[0,-1]]"],
        vec!["moduli", "rs-residuals", "--n", "2", "--seed", "8"],
        vec!["fock", "coherent", "--modes", "1", "--cutoff", "30", "--z", "[[0.5,0]]"],
        vec!["fock", "squeeze", "--r", "0.3", "--cutoff", "40"],
        vec!["fermion", "vacuum", "--n", "3", "--seed", "2"],
        vec!["fermion", "crosscheck", "--n", "3", "--seed", "2"],
        vec!["mm", "energy", "--N", "2", "--seed", "4"],
        vec!["mm", "evolve", "--N", "2", "--dt", "0.01", "--steps", "3", "--seed", "4"],
        // Error envelopes must conform too.
        vec!["fock", "squeeze", "--r", "3.0", "--cutoff", "6"],
        vec!["moduli", "rs-residuals", "--n", "2"],
        vec!["moduli", "check-cr", "--n", "1", "--matrix", "[[1,1],[0,1]]"],
    ];
    for args in samples {
        let v = stdout_json(&run(&args));
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "schema violations for {args:?}: {errors:?}");
    }
}

#[test]
fn trajectory_csv_has_expected_shape() {
    let out = run(&[
        "mm", "evolve", "--N", "2", "--dt", "0.01", "--steps", "4", "--seed", "3", "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,time,energy,tr_x_sq,gauss_norm");
    assert_eq!(lines.len(), 1 + 5, "header plus steps 0..=4");
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 5);
    }
}

#[test]
fn coefficient_csv_counts_distinct_partitions() {
    let out = run(&["series", "poincare", "--order", "12", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("exponent,numerator,denominator"));
    // Distinct-partition counts of 0..=6 sit at exponents 0, 2, ..., 12.
    let expected = [1u64, 1, 1, 2, 2, 3, 4];
    for (k, want) in expected.iter().enumerate() {
        let row = lines.next().expect("row present");
        assert_eq!(row, format!("{},{},1", 2 * k, want));
    }
}

#[test]
fn output_flag_writes_file_and_keeps_stdout_quiet() {
    let path = unique_tmp("output.json");
    let out = run(&[
        "series",
        "verify",
        "--order",
        "10",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty(), "result went to the file, not stdout");
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).expect("file written")).unwrap();
    assert_eq!(v["status"], "ok");
    // The temp file used for the atomic rename must be gone.
    let dir = path.parent().unwrap();
    let stem = path.file_name().unwrap().to_str().unwrap().to_owned();
    let leftovers: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|name| name.starts_with(&stem) && name.contains(".tmp."))
        .collect();
    assert!(leftovers.is_empty(), "stale temp files: {leftovers:?}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn config_file_round_trip_preserves_the_run() {
    let cfg_path = unique_tmp("roundtrip-config.json");
    let first = stdout_json(&run(&["mm", "energy", "--N", "2", "--seed", "9"]));
    std::fs::write(
        &cfg_path,
        serde_json::to_string(&first["result"]["configuration"]).unwrap(),
    )
    .unwrap();
    let second = stdout_json(&run(&[
        "mm",
        "energy",
        "--config",
        cfg_path.to_str().unwrap(),
    ]));
    assert_eq!(exit_code(&run(&["mm", "energy", "--config", cfg_path.to_str().unwrap()])), 0);
    // 17-digit serialisation makes the reload exact, so every reported
    // number must agree digit for digit.
    assert_eq!(first["result"]["energy"], second["result"]["energy"]);
    assert_eq!(first["result"]["gauss_norm"], second["result"]["gauss_norm"]);
    assert_eq!(first["result"]["tr_x_sq"], second["result"]["tr_x_sq"]);
    std::fs::remove_file(&cfg_path).ok();
}

#[test]
fn seed_and_config_conflict_exits_2() {
    let out = run(&[
        "mm", "energy", "--N", "2", "--seed", "1", "--config", "{\"x\":[],\"v\":[]}",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn random_data_without_seed_exits_2() {
    let out = run(&["mm", "evolve", "--N", "2", "--dt", "0", "--steps", "5"]);
    assert_eq!(exit_code(&out), 2);
    let v = stdout_json(&out);
    assert!(v["error"]["message"]
        .as_str()
        .unwrap()
        .contains("--seed"));
}

#[test]
fn squeeze_matches_the_hyperbolic_prediction() {
    let v = stdout_json(&run(&["fock", "squeeze", "--r", "0.5", "--cutoff", "60"]));
    let mean = v["result"]["mean_old_quanta"].as_f64().unwrap();
    let predicted = v["result"]["predicted_mean"].as_f64().unwrap();
    assert!((mean - predicted).abs() < 1e-10);
    assert!((predicted - 0.5f64.sinh().powi(2)).abs() < 1e-15);
}
