use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use xcore::engine::{Budget, SolverOptions};
use xcore::generators::{generate, Problem, ProblemSpec};
use xcore::harness::{
    engine_transcript, rank, read_output, read_records, run_campaign, write_records, CampaignConfig, Claim, RankOptions,
    Report, RunRecord, ScoreTable, SolverEntry, Track,
};
use xcore::model::{Assignment, Sense};
use xcore::xcsp::emit_instance;

/// One small instance of each of the twelve models (both bin packing
/// variants share data).
const DESK: &[(Problem, &[i64])] = &[
    (Problem::AverageAvoiding, &[6]),
    (Problem::Hamming, &[4, 5, 2, 2]),
    (Problem::HyperSudoku, &[2]),
    (Problem::Takuzu, &[4]),
    (Problem::PoolballTriangle, &[3]),
    (Problem::LitPuzzle, &[3]),
    (Problem::Pyramid, &[3, 20]),
    (Problem::Drinking, &[15]),
    (Problem::SameQueensKnights, &[3]),
    (Problem::BinPackingV1, &[10, 2, 3, 4, 5, 6, 7]),
    (Problem::BinPackingV2, &[10, 2, 3, 4, 5, 6, 7]),
    (Problem::SocialGolfers, &[2, 2, 3]),
    (Problem::StillLife, &[3, 3]),
];

fn write_desk(dir: &Path, subset: Option<&[Problem]>) {
    for (p, params) in DESK {
        if subset.is_some_and(|s| !s.contains(p)) {
            continue;
        }
        let s = ProblemSpec::new(*p, params);
        fs::write(dir.join(format!("{}.xml", s.label())), emit_instance(&generate(&s).unwrap())).unwrap();
    }
}

fn config(text: &str) -> CampaignConfig {
    CampaignConfig::from_toml(text).unwrap()
}

#[test]
fn builtin_engine_over_desk_instances() {
    let dir = tempfile::tempdir().unwrap();
    write_desk(dir.path(), None);
    let cfg = config(
        r#"
        track = "cop"
        instances = ["*.xml"]
        wall_budget = 30
        workers = 2
        [[solvers]]
        id = "engine"
        builtin = {}
        "#,
    );
    let out = run_campaign(&cfg, dir.path()).unwrap();
    assert_eq!(out.records.len(), DESK.len());
    assert!(out.records.iter().all(|r| r.claim != Claim::Invalid), "{:#?}", out.records);
    // Alone, the engine scores a point on every instance it decides.
    let decided = out.records.iter().filter(|r| matches!(r.claim, Claim::Sat | Claim::Optimum | Claim::Unsat)).count();
    assert_eq!(out.report.table.totals["engine"], decided as f64);
    assert_eq!(decided, DESK.len());
    let text = out.report.text();
    assert!(text.contains("takuzu-4.xml"));
    assert!(text.contains("1. engine"));
}

#[cfg(unix)]
#[test]
fn lying_stub_is_invalid_everywhere() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    write_desk(dir.path(), Some(&[Problem::LitPuzzle, Problem::Pyramid, Problem::Drinking]));
    let stub = dir.path().join("liar.sh");
    fs::write(&stub, "#!/bin/sh\necho 'o 0'\necho 's OPTIMUM FOUND'\necho 'v 0'\n").unwrap();
    fs::set_permissions(&stub, fs::Permissions::from_mode(0o755)).unwrap();
    let cfg = config(&format!(
        r#"
        track = "cop"
        instances = ["*.xml"]
        wall_budget = 30
        [[solvers]]
        id = "liar"
        command = ["{}", "{{instance}}"]
        [[solvers]]
        id = "engine"
        builtin = {{}}
        "#,
        stub.display()
    ));
    let out = run_campaign(&cfg, dir.path()).unwrap();
    let liar: Vec<&RunRecord> = out.records.iter().filter(|r| r.solver == "liar").collect();
    assert_eq!(liar.len(), 3);
    assert!(liar.iter().all(|r| r.claim == Claim::Invalid));
    assert_eq!(out.report.table.totals["liar"], 0.0);
    assert_eq!(out.report.table.totals["engine"], 3.0);
}

#[test]
fn missing_command_is_recorded_as_unknown() {
    let dir = tempfile::tempdir().unwrap();
    write_desk(dir.path(), Some(&[Problem::Takuzu]));
    let cfg = config(
        r#"
        track = "csp"
        instances = ["*.xml"]
        [[solvers]]
        id = "ghost"
        command = ["/nonexistent/solver", "{instance}"]
        "#,
    );
    let out = run_campaign(&cfg, dir.path()).unwrap();
    assert_eq!(out.records[0].claim, Claim::Unknown);
    assert!(out.records[0].diagnostics[0].contains("cannot start"));
}

#[test]
fn engine_variants_of_one_team_rank_once() {
    let dir = tempfile::tempdir().unwrap();
    write_desk(dir.path(), Some(&[Problem::Takuzu, Problem::HyperSudoku, Problem::LitPuzzle]));
    let cfg = config(
        r#"
        track = "cop"
        instances = ["*.xml"]
        wall_budget = 30
        [[solvers]]
        id = "engine-plain"
        team = "xcore"
        builtin = { restarts = false }
        [[solvers]]
        id = "engine-luby"
        team = "xcore"
        builtin = { restarts = true, seed = 7 }
        "#,
    );
    let out = run_campaign(&cfg, dir.path()).unwrap();
    assert_eq!(out.records.len(), 6);
    assert_eq!(out.report.ranking.len(), 1);
    assert_eq!(out.report.table.totals.len(), 2);
}

#[test]
fn records_round_trip_and_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_desk(dir.path(), Some(&[Problem::Takuzu, Problem::Pyramid]));
    let cfg = config(
        r#"
        track = "cop"
        instances = ["*.xml"]
        [[solvers]]
        id = "engine"
        builtin = {}
        "#,
    );
    let out = run_campaign(&cfg, dir.path()).unwrap();
    let mut buf = Vec::new();
    write_records(&out.records, &mut buf).unwrap();
    let back = read_records(&mut &buf[..]).unwrap();
    assert_eq!(back, out.records);
    let mut shuffled = back.clone();
    shuffled.reverse();
    let a = Report::build(Track::Cop, back, &cfg.entries(), &cfg.ranking);
    let b = Report::build(Track::Cop, shuffled, &cfg.entries(), &cfg.ranking);
    assert_eq!(a.text(), b.text());
    assert_eq!(a.json(), b.json());
}

#[test]
fn engine_output_always_parses() {
    for (p, params) in DESK {
        let inst = generate(&ProblemSpec::new(*p, params)).unwrap();
        for nodes in [0, 3, 1_000_000] {
            let mut buf = Vec::new();
            let opts = SolverOptions { budget: Budget::nodes(nodes), seed: 0, restarts: false };
            engine_transcript(&inst, opts, &mut buf).unwrap();
            let out = read_output(std::str::from_utf8(&buf).unwrap());
            assert!(out.violations.is_empty(), "{p} {nodes}: {:?}", out.violations);
            assert!(out.status.is_some());
        }
    }
}

// Random score tables over a handful of solvers and instances.

fn arb_record(instance: usize, solver: usize) -> impl Strategy<Value = RunRecord> {
    (0..5usize, 0..6i64, prop::bool::ANY, 0..10u32).prop_map(move |(k, bound, cop, wall)| {
        let claim = [Claim::Sat, Claim::Unsat, Claim::Optimum, Claim::Bound, Claim::Unknown][k];
        let mut r = RunRecord::new(&format!("i{instance}"), &format!("s{solver}"), claim);
        r.wall_time = wall as f64;
        if cop || instance % 2 == 0 {
            r.sense = Some(if instance % 3 == 0 { Sense::Maximize } else { Sense::Minimize });
        }
        if claim.has_solution() {
            r.assignment = Some(Assignment::new(vec![]));
            r.verified = true;
            r.bound = r.sense.map(|_| bound);
        }
        r
    })
}

fn arb_records() -> impl Strategy<Value = Vec<RunRecord>> {
    (1..4usize, 1..5usize).prop_flat_map(|(ni, ns)| {
        let cells: Vec<_> = (0..ni).flat_map(|i| (0..ns).map(move |s| arb_record(i, s))).collect();
        cells
    })
}

fn arb_entries() -> impl Strategy<Value = Vec<SolverEntry>> {
    prop::collection::vec((0..3usize, prop::bool::weighted(0.2)), 4).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (team, off))| SolverEntry { id: format!("s{i}"), team: format!("t{team}"), off_competition: off })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn points_are_whole_or_half(records in arb_records()) {
        let t = ScoreTable::build(records);
        for (inst, ps) in &t.points {
            let cop = t.records.iter().any(|r| &r.instance == inst && r.sense.is_some());
            let proved = t.records.iter().any(|r| &r.instance == inst && r.claim == Claim::Optimum);
            for &p in ps.values() {
                prop_assert!(p == 0.0 || p == 0.5 || p == 1.0);
                if p == 0.5 {
                    prop_assert!(cop && proved);
                }
            }
        }
    }

    #[test]
    fn better_bound_never_scores_less(records in arb_records()) {
        let t = ScoreTable::build(records);
        for a in &t.records {
            for b in &t.records {
                let (Some(sense), Some(x), Some(y)) = (a.sense, a.bound, b.bound) else { continue };
                if a.instance == b.instance && a.claim.has_solution() && b.claim.has_solution() && sense.better(x, y) {
                    prop_assert!(t.points[&a.instance][&a.solver] >= t.points[&b.instance][&b.solver]);
                }
            }
        }
    }

    #[test]
    fn unverified_claims_score_nothing(mut records in arb_records(), pick in any::<prop::sample::Index>()) {
        let k = pick.index(records.len());
        records[k].verified = false;
        let (inst, solver, had) = (records[k].instance.clone(), records[k].solver.clone(), records[k].claim.has_solution());
        let t = ScoreTable::build(records);
        if had {
            prop_assert_eq!(t.points[&inst][&solver], 0.0);
        }
    }

    #[test]
    fn ranking_filter_is_idempotent(records in arb_records(), entries in arb_entries(), mini in prop::bool::ANY) {
        let t = ScoreTable::build(records);
        let track = if mini { Track::MiniCop } else { Track::Cop };
        let opts = RankOptions { main_ranking: vec!["s0".into()], ..Default::default() };
        let first = rank(track, &t, &entries, &opts);
        let kept: BTreeSet<String> = first.iter().map(|s| s.solver.clone()).collect();
        let again = rank(track, &t.retain(&kept), &entries, &opts);
        prop_assert_eq!(first, again);
    }

    #[test]
    fn report_ignores_record_order(records in arb_records()) {
        let mut rev = records.clone();
        rev.reverse();
        let a = Report::build(Track::Cop, records, &[], &RankOptions::default());
        let b = Report::build(Track::Cop, rev, &[], &RankOptions::default());
        prop_assert_eq!(a.text(), b.text());
    }
}
