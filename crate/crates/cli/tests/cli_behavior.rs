//! Black-box checks of the command-line contract: exit codes, error
//! messages, artifact round-trips, and partial benchmark failure.

use std::io::BufReader;
use std::path::PathBuf;
use std::process::{Command, Output};

use helixq_core::kernel::read_gram_csv;

fn helixq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helixq"))
        .args(args)
        .output()
        .expect("helixq binary should spawn")
}

fn bundled_data() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/sequences_1k.csv")
        .display()
        .to_string()
}

#[test]
fn missing_data_file_names_the_path_and_fails() {
    let out = helixq(&["train", "--data", "/no/such/file.csv"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/no/such/file.csv"), "stderr was: {stderr}");
}

#[test]
fn train_without_data_is_a_usage_error() {
    let out = helixq(&["train"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "no-such-knob = 3\n").unwrap();
    let out = helixq(&["train", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no-such-knob"), "stderr was: {stderr}");
}

#[test]
fn flags_override_config_file_values() {
    // config asks for 2 qubits; the flag bumps it to 3, which shows up in
    // the run summary line
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        format!("data = {}\nqubits = 2\nlimit = 60\nmodel = qsvc\n", bundled_data()),
    )
    .unwrap();
    let out = helixq(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--qubits",
        "3",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 qubits"), "stdout was: {stdout}");
}

#[test]
fn predict_round_trips_a_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let data = bundled_data();
    let trained = helixq(&[
        "train", "--data", &data, "--model", "qsvc", "--qubits", "3", "--limit", "100",
        "--seed", "3", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(trained.status.success(), "{}", String::from_utf8_lossy(&trained.stderr));

    // a small unlabeled batch in the same format, header only "sequence"
    let batch = dir.path().join("batch.csv");
    std::fs::write(&batch, "sequence\nACGTACGTACGTACGTACGT\nGCGCGCGCGCGCGCGCGCGC\nATATATATATATATATATAT\n")
        .unwrap();
    let preds_path = dir.path().join("preds.csv");
    let predicted = helixq(&[
        "predict",
        "--model-file",
        out_dir.join("model.json").to_str().unwrap(),
        "--data",
        batch.to_str().unwrap(),
        "--out",
        preds_path.to_str().unwrap(),
    ]);
    assert!(predicted.status.success(), "{}", String::from_utf8_lossy(&predicted.stderr));

    let preds = std::fs::read_to_string(&preds_path).unwrap();
    let mut lines = preds.lines();
    assert_eq!(lines.next(), Some("sequence_index,score,label"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], i.to_string());
        assert!(fields[1].parse::<f64>().unwrap().is_finite());
        assert!(matches!(fields[2], "0" | "1"));
    }
}

#[test]
fn kernel_output_reads_back_as_a_valid_gram_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let data = bundled_data();
    let out = helixq(&[
        "kernel", "--data", &data, "--qubits", "3", "--limit", "40", "--seed", "9",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = std::fs::File::open(dir.path().join("gram.csv")).unwrap();
    // the reader re-validates symmetry, unit diagonal, and the [0, 1] range
    let gram = read_gram_csv(BufReader::new(file)).unwrap();
    assert!(gram.n() > 0);
}

#[test]
fn benchmark_records_failing_cells_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let data = bundled_data();
    // the pauli cell carries an invalid word; the z cell still completes
    let out = helixq(&[
        "benchmark",
        "--data",
        &data,
        "--qubits",
        "3",
        "--limit",
        "60",
        "--models",
        "qsvc",
        "--feature-maps",
        "z,pauli",
        "--pauli-strings",
        "QQ",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "summary was: {summary}");
    assert!(rows[0].starts_with("qsvc,z,"));

    let failures = std::fs::read_to_string(dir.path().join("failures.csv")).unwrap();
    assert_eq!(failures.lines().next(), Some("model,feature_map,error"));
    let failed: Vec<&str> = failures.lines().skip(1).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].starts_with("qsvc,pauli,"), "failures were: {failures}");
}
