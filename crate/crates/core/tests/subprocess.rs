use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use flaker::model::{make_order, Outcome};
use flaker::protocol::conformance::run_conformance;
use flaker::protocol::{AdapterCommand, SessionError, SessionFactory};

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn serve_sim(dir: &Path) -> PathBuf {
    script(
        dir,
        "serve-sim.sh",
        &format!("exec '{}' serve-sim --corpus \"${{1:-listings}}\"", env!("CARGO_BIN_EXE_flaker")),
    )
}

#[test]
fn served_sim_passes_conformance() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_conformance(&AdapterCommand::new(serve_sim(dir.path())), Duration::from_secs(10));
    assert!(report.passed(), "{:?}", report.failures());
}

#[test]
fn served_sim_runs_orders() {
    let dir = tempfile::tempdir().unwrap();
    let mut session = AdapterCommand::new(serve_sim(dir.path())).open().unwrap();
    let classes = session.list_classes().unwrap();
    let glob = classes
        .iter()
        .find(|c| c.class_id.class_name() == "PathGlob")
        .expect("listings has PathGlob");
    let tests = session.list_tests(&glob.class_id).unwrap();
    let universe = tests.iter().cloned().collect();
    let order = make_order(&glob.class_id, tests.clone(), &universe).unwrap();
    let result = session.run_order(&order, None, Duration::from_secs(5)).unwrap();
    assert!(result.outcomes.values().all(|o| *o == Outcome::Pass), "{result:?}");
    session.close();
}

#[test]
fn newer_protocol_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let adapter = script(
        dir.path(),
        "v2.sh",
        r#"read line
echo '{"id":1,"type":"capabilities","protocol_version":2,"can_mutate":true,"failure_kinds":true}'
read line"#,
    );
    match AdapterCommand::new(adapter).open() {
        Err(SessionError::VersionMismatch { expected: 1, got: 2 }) => {}
        other => panic!("expected a version mismatch, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn adapter_exiting_before_handshake_is_a_crash() {
    let dir = tempfile::tempdir().unwrap();
    let adapter = script(dir.path(), "dies.sh", "exit 3");
    match AdapterCommand::new(adapter).open() {
        Err(SessionError::AdapterCrashed(_)) => {}
        other => panic!("expected a crash, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn missing_program_is_unavailable() {
    match AdapterCommand::new("/nonexistent/adapter").open() {
        Err(SessionError::Unavailable(_)) => {}
        other => panic!("expected spawn failure, got {:?}", other.map(|_| ())),
    }
}
