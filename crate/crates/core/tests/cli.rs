use std::path::{Path, PathBuf};
use std::process::Command;

use eventb_core::cli::{run, ExitStatus};
use tempfile::TempDir;

fn cli(args: &[&str]) -> (ExitStatus, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let status = run(std::iter::once("eventb").chain(args.iter().copied()), &mut out, &mut err);
    (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn final_state(log: &str) -> String {
    let start = log.find("# final state\n").expect("final state section");
    log[start..].to_string()
}

#[test]
fn run_reports_ok_and_violations() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "ok.txt", "add_user A\nadd_user B\ncreate_chat_session A B\nexpect ok\n");
    assert_eq!(cli(&["run", s(&ok)]).0, ExitStatus::Ok);

    let literal = write(
        &dir,
        "literal.txt",
        "option add_content=literal\nadd_user A\nadd_content c1\nexpect invariant-violation inv4\n",
    );
    let (status, out, _) = cli(&["run", s(&literal)]);
    assert_eq!(status, ExitStatus::Ok);
    assert!(out.contains("# violated: inv4\n"));

    // Flags override the header.
    let (status, out, _) = cli(&["run", s(&literal), "--option", "add_content=pointwise"]);
    assert_eq!(status, ExitStatus::ExpectationMismatch);
    assert!(out.contains("expected `invariant-violation inv4`, observed `ok`"));

    let unexpected = write(&dir, "plain.txt", "option add_content=literal\nadd_user A\nadd_content c1\n");
    assert_eq!(cli(&["run", s(&unexpected)]).0, ExitStatus::InvariantViolation);
}

#[test]
fn run_names_the_rejected_step() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.txt", "# setup\nadd_user A\n\nselect_chat A B\n");
    let (status, _, err) = cli(&["run", s(&p)]);
    assert_eq!(status, ExitStatus::StepRejected);
    assert!(err.contains("line 4: step 2: guard of `select_chat` not satisfied"), "{err}");

    let p = write(&dir, "unknown.txt", "add_user A\nfly A\n");
    let (status, _, err) = cli(&["run", s(&p)]);
    assert_eq!(status, ExitStatus::StepRejected);
    assert!(err.contains("line 2: step 2: unknown event `fly`"), "{err}");
}

#[test]
fn scenario_parse_errors_are_positioned() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "parse.txt", "add_user A\nadd_user u=(B\n");
    let (status, _, err) = cli(&["run", s(&p)]);
    assert_eq!(status, ExitStatus::InputError);
    assert!(err.contains("line 2, column"), "{err}");
    assert_eq!(cli(&["run", "/nonexistent/scenario"]).0, ExitStatus::InputError);
}

#[test]
fn deadlock_expectation_and_flag() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "stuck.txt", "users 0\ncontents 0\nexpect deadlock\n");
    assert_eq!(cli(&["run", s(&p)]).0, ExitStatus::Ok);
    let p = write(&dir, "stuck2.txt", "users 0\ncontents 0\n");
    assert_eq!(cli(&["run", s(&p)]).0, ExitStatus::Ok);
    assert_eq!(cli(&["run", s(&p), "--deadlock-is-error"]).0, ExitStatus::Deadlock);
}

#[test]
fn simulate_is_reproducible_and_replays() {
    let dir = TempDir::new().unwrap();
    for machine in ["m0", "m2"] {
        let args = ["simulate", "--steps", "300", "--seed", "9", "--machine", machine, "--users", "3", "--contents", "5"];
        let (status, first, _) = cli(&args);
        assert_eq!(status, ExitStatus::Ok);
        assert_eq!(cli(&args).1, first, "byte-identical log");
        let p = write(&dir, &format!("{machine}.txt"), &first);
        let (status, replayed, _) = cli(&["run", s(&p)]);
        assert_eq!(status, ExitStatus::Ok);
        assert_eq!(final_state(&replayed), final_state(&first));
    }
    let (status, out, _) = cli(&["simulate", "--steps", "0"]);
    assert_eq!(status, ExitStatus::Ok);
    let steps: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(steps.len(), 5, "header and expect only: {steps:?}");
}

#[test]
fn simulate_reports_violations_as_replayable_scenarios() {
    let dir = TempDir::new().unwrap();
    let (status, log, _) = cli(&["simulate", "--steps", "50", "--seed", "1", "--option", "add_content=literal"]);
    assert_eq!(status, ExitStatus::InvariantViolation);
    assert!(log.contains("expect invariant-violation inv4\n"));
    let p = write(&dir, "violation.txt", &log);
    let (status, replayed, _) = cli(&["run", s(&p)]);
    assert_eq!(status, ExitStatus::Ok);
    assert_eq!(final_state(&replayed), final_state(&log));
}

#[test]
fn check_and_refine_exit_statuses() {
    assert_eq!(cli(&["check", "--users", "2", "--contents", "2", "--depth", "4"]).0, ExitStatus::Ok);
    let (status, out, _) = cli(&["check", "--mutant", "delete-content-shrinks", "--depth", "6"]);
    assert_eq!(status, ExitStatus::InvariantViolation);
    assert!(out.starts_with("verdict: invariant-violation inv4\n"));
    let (status, out, _) = cli(&["check", "--deadlock", "--users", "0", "--contents", "0"]);
    assert_eq!(status, ExitStatus::Deadlock);
    assert!(out.contains("depth_reached: 0\n"));
    assert_eq!(cli(&["check", "--max-states", "10"]).0, ExitStatus::BoundExhausted);

    assert_eq!(cli(&["refine", "--depth", "3"]).0, ExitStatus::Ok);
    let (status, out, _) = cli(&["refine", "--depth", "5", "--mutant", "chatting-without-reverse-chat"]);
    assert_eq!(status, ExitStatus::RefinementFailure);
    assert!(out.contains("simulation-failure"));
    let (status, out, _) = cli(&["refine", "--depth", "5", "--mutant", "chatting-without-contents"]);
    assert_eq!(status, ExitStatus::InvariantViolation);
    assert!(out.contains("invr23"));
}

#[test]
fn check_from_a_dumped_initial_state() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "muted.dump",
        "user = {A,B}\ncontent = {c1}\nchat = {(A,B),(B,A)}\nactive = {(A,B)}\n\
         muted = {(A,B),(B,A)}\nchatcontent = {(A,{(c1,{B})}),(B,{(c1,{})})}\n",
    );
    let args = ["check", "--deadlock", "--initial-state", s(&p), "--users", "2", "--contents", "1"];
    let mut with_filter = args.to_vec();
    with_filter.extend(["--keep-event", "chatting", "--keep-event", "select_chat"]);
    assert_eq!(cli(&with_filter).0, ExitStatus::Deadlock);
    assert_eq!(cli(&args).0, ExitStatus::Ok);
}

#[test]
fn read_lists_a_cell_in_index_order() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "state.dump",
        "user = {A,B}\ncontent = {c1,c2}\nchat = {(A,B),(B,A)}\nactive = {(A,B)}\nmuted = {}\n\
         chatcontent = {(A,{(c1,{B}),(c2,{B})}),(B,{(c1,{}),(c2,{})})}\ncsize = 2\n\
         contents = {(1,c1),(2,c2)}\nscreen = {(A,{(B,{(1,c2),(2,c1)})}),(B,{(A,{})})}\n",
    );
    let (status, out, _) = cli(&["read", "--state-dump", s(&p), "--u1", "A", "--u2", "B"]);
    assert_eq!(status, ExitStatus::Ok);
    assert_eq!(out, "c2\nc1\n");
    let (status, out, _) = cli(&["read", "--state-dump", s(&p), "--u1", "B", "--u2", "A"]);
    assert_eq!((status, out.as_str()), (ExitStatus::Ok, ""));
    let (status, _, err) = cli(&["read", "--state-dump", s(&p), "--u1", "A", "--u2", "A"]);
    assert_eq!(status, ExitStatus::MissingCell);
    assert!(err.contains("A -> A"), "{err}");
}

#[test]
fn binary_exit_codes_and_seed_variable() {
    let bin = env!("CARGO_BIN_EXE_eventb");
    let simulate = |seed_env: Option<&str>| {
        let mut c = Command::new(bin);
        c.args(["simulate", "--steps", "40"]);
        if let Some(seed) = seed_env {
            c.env("EVENTB_SEED", seed);
        } else {
            c.env_remove("EVENTB_SEED");
        }
        c.output().unwrap()
    };
    let a = simulate(Some("5"));
    assert_eq!(a.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("# simulate seed=5 steps=40\n"));
    assert_eq!(simulate(Some("5")).stdout, a.stdout);
    assert_ne!(simulate(None).stdout, a.stdout);

    let out = Command::new(bin).args(["check", "--mutant", "select-chat-union", "--depth", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin).args(["check", "--machine", "m3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
}
