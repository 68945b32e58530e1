//! End-to-end tests of the command-line interface: exit codes, file
//! round-trips, and output formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_locsim")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
    topology: PathBuf,
}

fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let topology = root.join("topo.csv");
    std::fs::write(
        &topology,
        "# three-area world\nH1, HOME, MSC_H\nT1, TRANSIT, MSC_T\nW1, WORK, MSC_W\n",
    )
    .unwrap();
    Workspace {
        _dir: dir,
        root,
        topology,
    }
}

fn write_config(ws: &Workspace, name: &str, extra: &str) -> PathBuf {
    let path = ws.root.join(name);
    std::fs::write(
        &path,
        format!(
            "topology = {}\n\
             gen_home_la = HOME\ngen_work_la = WORK\ngen_transit_las = TRANSIT\n{extra}",
            ws.topology.display()
        ),
    )
    .unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_writes_metrics_and_exits_zero() {
    let ws = workspace();
    let cfg = write_config(&ws, "run.conf", "scheme = baseline\n");
    let out_path = ws.root.join("metrics.csv");
    let out = run(&["simulate", "--config", p(&cfg), "--out", p(&out_path)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("scope,key,hlr_profile_requests,"));
    assert!(csv.contains("\ntotal,,"));
    assert!(csv.contains("\nmsc,MSC_T,"));
}

#[test]
fn simulate_scheme_flag_overrides_config() {
    let ws = workspace();
    let cfg = write_config(&ws, "run.conf", "scheme = baseline\n");
    let base = run(&["simulate", "--config", p(&cfg)]);
    let intel = run(&["simulate", "--config", p(&cfg), "--scheme", "intelligent"]);
    assert_eq!(code(&base), 0);
    assert_eq!(code(&intel), 0);
    assert_ne!(stdout(&base), stdout(&intel));
}

#[test]
fn missing_topology_file_exits_one_naming_it() {
    let ws = workspace();
    let cfg = ws.root.join("bad.conf");
    std::fs::write(
        &cfg,
        "topology = /nonexistent/topo.csv\ngen_home_la = HOME\ngen_work_la = WORK\ngen_transit_las = TRANSIT\n",
    )
    .unwrap();
    let out = run(&["simulate", "--config", p(&cfg)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("/nonexistent/topo.csv"));
}

#[test]
fn malformed_config_exits_two() {
    let ws = workspace();
    let cfg = ws.root.join("broken.conf");
    std::fs::write(&cfg, "topology\n").unwrap();
    let out = run(&["simulate", "--config", p(&cfg)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_time_of_day_exits_two() {
    let ws = workspace();
    let cfg = write_config(&ws, "run.conf", "gen_leave = 8am\n");
    let out = run(&["simulate", "--config", p(&cfg)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("gen_leave"));
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_reports_commuter_delta() {
    let ws = workspace();
    let cfg = write_config(&ws, "run.conf", "");
    let out = run(&["compare", "--config", p(&cfg)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("hlr_profile_requests"));
    assert!(text.contains("dominance (hlr profile+location queries): holds"));
    assert!(text.contains("routing equivalence: holds"));
}

#[test]
fn compare_dominance_test_hook_exits_nonzero() {
    let ws = workspace();
    let cfg = write_config(&ws, "run.conf", "");
    let out = run(&["compare", "--config", p(&cfg), "--test-corrupt-dominance"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("dominance"));
}

#[test]
fn fuzzy_eval_prints_anchor_degrees() {
    let cases = [
        (["--label", "low", "--visits", "5"], "0.600000"),
        (["--label", "medium", "--visits", "12"], "0.400000"),
        (["--label", "high", "--visits", "17"], "0.200000"),
    ];
    for (args, want) in cases {
        let mut full = vec!["fuzzy-eval", "--spec", "observation"];
        full.extend(args);
        let out = run(&full);
        assert_eq!(code(&out), 0);
        assert!(
            stdout(&out).starts_with(want),
            "args {args:?}: got {}",
            stdout(&out)
        );
    }
    // Weekly crisp classification: a total of 4 is Medium.
    let out = run(&["fuzzy-eval", "--spec", "weekly", "--label", "medium", "--visits", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().nth(1) == Some("Medium"));
}

#[test]
fn trace_gen_round_trips_and_counts_transit_days() {
    let ws = workspace();
    let cfg = write_config(&ws, "gen.conf", "seed = 3\n");
    let trace_path = ws.root.join("trace.csv");
    let out = run(&["trace-gen", "--config", p(&cfg), "--out", p(&trace_path)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let text = std::fs::read_to_string(&trace_path).unwrap();
    let events = locsim::trace::parse_trace(&text).unwrap();
    assert_eq!(locsim::trace::write_trace(&events), text);
    let transit_moves = events
        .iter()
        .filter(|e| matches!(&e.kind, locsim::trace::EventKind::MoveToCell(c) if c.as_str() == "T1"))
        .count();
    assert_eq!(transit_moves, 7);

    // The generated file feeds straight back into simulate.
    let sim_cfg = ws.root.join("sim.conf");
    std::fs::write(
        &sim_cfg,
        format!(
            "topology = {}\ntrace = {}\nscheme = intelligent\n",
            ws.topology.display(),
            trace_path.display()
        ),
    )
    .unwrap();
    let out = run(&["simulate", "--config", p(&sim_cfg)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
}

#[test]
fn validate_accepts_good_and_rejects_bad() {
    let ws = workspace();
    let out = run(&["validate", "--topology", p(&ws.topology)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("3 cells"));

    let bad_topo = ws.root.join("bad_topo.csv");
    std::fs::write(&bad_topo, "H1, HOME\n").unwrap();
    let out = run(&["validate", "--topology", p(&bad_topo)]);
    assert_eq!(code(&out), 1);

    let bad_trace = ws.root.join("bad_trace.csv");
    std::fs::write(&bad_trace, "0, SUB0, move, NOWHERE\n").unwrap();
    let out = run(&[
        "validate",
        "--topology",
        p(&ws.topology),
        "--trace",
        p(&bad_trace),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("NOWHERE"));
}

#[test]
fn verbose_log_writes_message_log() {
    let ws = workspace();
    let cfg = write_config(&ws, "run.conf", "scheme = baseline\n");
    let out_path = ws.root.join("metrics.csv");
    let out = run(&[
        "simulate",
        "--config",
        p(&cfg),
        "--out",
        p(&out_path),
        "--verbose-log",
    ]);
    assert_eq!(code(&out), 0);
    let log = std::fs::read_to_string(ws.root.join("metrics.log")).unwrap();
    assert!(log.contains("profile_request"));
    assert!(log.contains("MSC_T"));
}

#[test]
fn seed_flag_changes_jittered_traces() {
    let ws = workspace();
    let cfg = write_config(&ws, "gen.conf", "gen_jitter_secs = 300\n");
    let a = run(&["trace-gen", "--config", p(&cfg), "--seed", "1"]);
    let b = run(&["trace-gen", "--config", p(&cfg), "--seed", "2"]);
    let a2 = run(&["trace-gen", "--config", p(&cfg), "--seed", "1"]);
    assert_eq!(code(&a), 0);
    assert_ne!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&a2));
}
