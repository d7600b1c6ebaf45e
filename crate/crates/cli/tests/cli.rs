use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xcore(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xcore")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_line(o: &Output) -> String {
    stdout(o).lines().find_map(|l| l.strip_prefix("v ").or(if l == "v" { Some("") } else { None })).expect("v line").to_string()
}

#[test]
fn solve_takuzu_two_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(xcore(&["generate", "takuzu", "--params", "2", "-o", "t.xml"], d).status.success());
    let s = xcore(&["solve", "t.xml"], d);
    assert_eq!(s.status.code(), Some(0));
    assert!(stdout(&s).starts_with("s SATISFIABLE\n"));
    let c = xcore(&["check", "t.xml", "--values", &value_line(&s)], d);
    assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
    fs::write(d.join("out.txt"), &s.stdout).unwrap();
    assert_eq!(xcore(&["check", "t.xml", "--solution", "out.txt"], d).status.code(), Some(0));
}

#[test]
fn check_reports_violated_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(xcore(&["generate", "pyramid", "--params", "3,20", "-o", "p.xml"], d).status.success());
    // All zeros breaks the non-zero apex and the all-different rule.
    let c = xcore(&["check", "p.xml", "--values", "0 0 0 0 0 0"], d);
    assert_eq!(c.status.code(), Some(1));
    assert!(stdout(&c).contains("violated: [0, 1"), "{}", stdout(&c));
    let s = xcore(&["solve", "p.xml"], d);
    assert!(stdout(&s).contains("s OPTIMUM FOUND"));
    assert_eq!(xcore(&["check", "p.xml", "--values", &value_line(&s)], d).status.code(), Some(0));
}

#[test]
fn generate_hamming_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(xcore(&["generate", "hamming", "--params", "20,10,3,5", "-o", "h.xml"], d).status.success());
    let s = xcore(&["solve", "h.xml", "--budget-wall", "60"], d);
    assert_eq!(s.status.code(), Some(0));
    assert_eq!(xcore(&["check", "h.xml", "--values", &value_line(&s)], d).status.code(), Some(0));
}

#[test]
fn unknown_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(xcore(&["generate", "takuzu", "--params", "30", "-o", "t.xml"], d).status.success());
    let s = xcore(&["solve", "t.xml", "--budget-nodes", "1"], d);
    assert_eq!(s.status.code(), Some(1));
    assert_eq!(stdout(&s), "s UNKNOWN\n");
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.xml"), "<instance format=\"XCSP3\" type=\"CSP\"><variables>").unwrap();
    assert_eq!(xcore(&["solve", "bad.xml"], d).status.code(), Some(2));
    assert_eq!(xcore(&["solve", "missing.xml"], d).status.code(), Some(2));
    assert_eq!(xcore(&["solve", "bad.xml", "--restarts", "maybe"], d).status.code(), Some(2));
    assert_eq!(xcore(&["generate", "sudoku", "--params", "3"], d).status.code(), Some(2));
    assert_eq!(xcore(&["generate", "takuzu", "--params", "3"], d).status.code(), Some(2));
    assert_eq!(xcore(&["check", "bad.xml"], d).status.code(), Some(2));
    assert_eq!(xcore(&[], d).status.code(), Some(2));
}

#[test]
fn mini_profile_rejects_other_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Pyramid uses only allDifferent and intension; bin packing needs more.
    assert!(xcore(&["generate", "pyramid", "--params", "3,20", "-o", "p.xml"], d).status.success());
    assert_eq!(xcore(&["solve", "p.xml", "--profile", "mini"], d).status.code(), Some(0));
    assert!(xcore(&["generate", "bin-packing-v2", "--params", "10,2,3,4,5,6,7", "-o", "b.xml"], d).status.success());
    assert_eq!(xcore(&["solve", "b.xml", "--profile", "mini"], d).status.code(), Some(2));
}

#[test]
fn campaign_then_score() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir(d.join("set")).unwrap();
    for (p, params) in [("takuzu", "4"), ("lit-puzzle", "3"), ("pyramid", "3,20")] {
        let out = format!("set/{p}.xml");
        assert!(xcore(&["generate", p, "--params", params, "-o", &out], d).status.success());
    }
    let solver = env!("CARGO_BIN_EXE_xcore");
    fs::write(
        d.join("campaign.toml"),
        format!(
            r#"
track = "cop"
instances = ["set/*.xml"]
wall_budget = 30

[[solvers]]
id = "cli"
team = "xcore"
command = ["{solver}", "solve", "{{instance}}", "--budget-wall", "{{wall}}"]

[[solvers]]
id = "inproc"
team = "xcore"
builtin = {{ restarts = true }}
"#
        ),
    )
    .unwrap();
    let c = Command::new(solver)
        .args(["campaign", "campaign.toml", "--json", "report.json"])
        .env("XCORE_WORKERS", "1")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(c.status.code(), Some(0), "{}", String::from_utf8_lossy(&c.stderr));
    let report = stdout(&c);
    assert!(report.contains("set/pyramid.xml"));
    let records = fs::read_to_string(d.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 6);
    assert!(!records.contains("INVALID"));
    let json = fs::read_to_string(d.join("report.json")).unwrap();
    assert!(json.starts_with('{') && json.contains("\"ranking\""));
    // Re-scoring the records reproduces the report byte for byte.
    let s = xcore(&["score", "records.jsonl", "--config", "campaign.toml"], d);
    assert_eq!(s.status.code(), Some(0));
    assert_eq!(stdout(&s), report);
    assert_eq!(xcore(&["score", "records.jsonl", "--config", "campaign.toml", "--track", "csp"], d).status.code(), Some(2));
}

