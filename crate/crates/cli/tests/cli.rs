use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str], files: &[PathBuf]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symdesign")).args(args).args(files).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_accepts_a_design() {
    let o = run(&["verify"], &[fixture("fano.dmat")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2-(7,3,1)"), "{}", stdout(&o));
}

#[test]
fn verify_rejects_a_non_design() {
    let path = scratch("pairs.dmat", "1100\n0011\n");
    assert_eq!(run(&["verify"], &[path]).status.code(), Some(1));
}

#[test]
fn malformed_input_is_an_input_failure() {
    let path = scratch("garbage.dmat", "101\n10\n");
    let o = run(&["verify"], &[path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(run(&["verify"], &[fixture("no-such-file.dmat")]).status.code(), Some(2));
}

#[test]
fn non_isomorphic_pair() {
    let o = run(&["iso"], &[fixture("d2.dmat"), fixture("d3.dmat")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("non-isomorphic"));
}

#[test]
fn node_budget_is_reported() {
    let o = run(&["aut", "--budget-nodes", "2"], &[fixture("higman.dmat")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn orbit_matrix_check() {
    assert_eq!(run(&["checkom"], &[fixture("m1.om")]).status.code(), Some(0));
    let perturbed = std::fs::read_to_string(fixture("m1.om")).unwrap().replace("26 24", "27 23");
    assert_eq!(run(&["checkom"], &[scratch("bad.om", &perturbed)]).status.code(), Some(1));
}

#[test]
fn expand_small_case() {
    let o = run(&["expand", "--json"], &[fixture("fano.om"), fixture("z7.perms")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exhausted"], true, "{v}");
}

#[test]
fn report_json_is_byte_identical_across_runs() {
    let a = run(&["report", "--json"], &[fixture("designs176.dmat")]);
    let b = run(&["report", "--json"], &[fixture("designs176.dmat")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
