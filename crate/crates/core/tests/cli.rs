use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::Path;
use std::process::{Command, Output};

use flaker::dataset::{read_dataset_file, OdLabel};

fn flaker(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flaker"))
        .args(args)
        .env_remove("FLAKER_OUT")
        .output()
        .expect("binary runs")
}

fn campaign(command: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        command,
        "--adapter",
        "sim",
        "--corpus",
        "listings",
        "--seed",
        "7",
        "--isolation-runs",
        "10",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let output = flaker(&args);
    assert!(
        output.status.success(),
        "{command} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn listings_run_produces_expected_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let output = campaign("run", dir.path(), &[]);
    assert!(stdout(&output).contains("dataset entries: 3"), "{}", stdout(&output));

    let entries = read_dataset_file(&dir.path().join("dataset.jsonl")).unwrap();
    let labelled: Vec<(&str, &str, OdLabel)> = entries
        .iter()
        .map(|e| (e.mutant_id.as_str(), e.test.test_name(), e.label))
        .collect();
    assert!(labelled.contains(&(
        "listings.EndpointSession::testCloseReason#0",
        "testCloseReason",
        OdLabel::Brittle
    )));
    assert!(labelled.contains(&(
        "listings.PathGlob::testAbsoluteGlob#0",
        "testAbsoluteGlob",
        OdLabel::Victim
    )));
    assert!(entries.iter().all(|e| e.seed == 7));

    let report = fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(report.contains("1 class(es) excluded."));
    assert!(report.contains("listings.HttpRequestFactory"));
    for file in ["metrics.json", "excluded.json", "campaign.json", "stability.json", "mutants.json", "evaluation.json"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
}

#[test]
fn warm_rerun_executes_nothing_and_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    campaign("run", dir.path(), &[]);
    let dataset = fs::read(dir.path().join("dataset.jsonl")).unwrap();
    let metrics = fs::read(dir.path().join("metrics.json")).unwrap();

    let rerun = campaign("run", dir.path(), &[]);
    assert!(stdout(&rerun).contains("adapter executions: 0"), "{}", stdout(&rerun));
    assert_eq!(fs::read(dir.path().join("dataset.jsonl")).unwrap(), dataset);
    assert_eq!(fs::read(dir.path().join("metrics.json")).unwrap(), metrics);
}

#[test]
fn staged_commands_match_a_single_run() {
    let whole = tempfile::tempdir().unwrap();
    let staged = tempfile::tempdir().unwrap();
    campaign("run", whole.path(), &[]);
    for step in ["stabilize", "mutate", "evaluate", "report"] {
        campaign(step, staged.path(), &[]);
    }
    for file in ["dataset.jsonl", "metrics.json", "excluded.json"] {
        assert_eq!(
            fs::read(whole.path().join(file)).unwrap(),
            fs::read(staged.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn mutate_without_stability_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let output = flaker(&["mutate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn changed_configuration_rejects_stage_files() {
    let dir = tempfile::tempdir().unwrap();
    campaign("stabilize", dir.path(), &[]);
    let output = flaker(&[
        "mutate",
        "--corpus",
        "listings",
        "--seed",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = flaker(&["run", "--config", "/nonexistent/flaker.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_key = dir.path().join("bad.toml");
    fs::write(&bad_key, "sede = 3\n").unwrap();
    let output = flaker(&["run", "--config", bad_key.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));

    let output = flaker(&["run", "--adapter", "python"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_file_values_reach_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = dir.path().join("flaker.toml");
    fs::write(
        &config,
        format!("seed = 7\nisolation_runs = 10\ncorpus = \"listings\"\nout = \"{}\"\n", out.display()),
    )
    .unwrap();
    let output = flaker(&["run", "--config", config.to_str().unwrap()]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let entries = read_dataset_file(&out.join("dataset.jsonl")).unwrap();
    assert_eq!(entries.len(), 3);
    assert!(entries.iter().all(|e| e.seed == 7));
}

#[test]
fn exec_adapter_matches_in_process_sim() {
    let dir = tempfile::tempdir().unwrap();
    let adapter = dir.path().join("adapter.sh");
    fs::write(
        &adapter,
        format!("#!/bin/sh\nexec '{}' serve-sim --corpus listings\n", env!("CARGO_BIN_EXE_flaker")),
    )
    .unwrap();
    fs::set_permissions(&adapter, fs::Permissions::from_mode(0o755)).unwrap();

    let sim_out = dir.path().join("sim");
    let exec_out = dir.path().join("exec");
    campaign("run", &sim_out, &[]);
    let output = flaker(&[
        "run",
        "--adapter",
        &format!("exec:{}", adapter.display()),
        "--seed",
        "7",
        "--isolation-runs",
        "10",
        "--out",
        exec_out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let labels = |dir: &Path| -> Vec<(String, String, OdLabel)> {
        read_dataset_file(&dir.join("dataset.jsonl"))
            .unwrap()
            .into_iter()
            .map(|e| (e.mutant_id.as_str().to_owned(), e.test.test_name().to_owned(), e.label))
            .collect()
    };
    assert_eq!(labels(&sim_out), labels(&exec_out));
}

#[test]
fn conformance_command_passes_for_sim() {
    let output = flaker(&["conformance", "--adapter", "sim"]);
    assert!(output.status.success(), "{}", stdout(&output));
    assert!(!stdout(&output).contains("FAIL"));
}
