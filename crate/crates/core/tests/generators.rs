use std::time::{Duration, Instant};

use xcore::checker::check;
use xcore::engine::{count_solutions, solve_cop, Budget, Solver, SolverOptions, Status};
use xcore::generators::{generate, presets, reference_oracle, OracleResult, Problem, ProblemSpec};
use xcore::model::validation_errors;
use xcore::xcsp::{emit_instance, parse_instance, Profile};

fn spec(p: Problem, params: &[i64]) -> ProblemSpec {
    ProblemSpec::new(p, params)
}

/// Engine answer in the same shape as the reference oracle.
fn engine_answer(s: &ProblemSpec) -> OracleResult {
    let inst = generate(s).unwrap();
    if inst.objective.is_some() {
        let r = solve_cop(&inst, Budget::wall(Duration::from_secs(60)), 0);
        assert!(r.proved_optimal, "{} not closed", s.label());
        if let Some((a, v)) = &r.best {
            assert!(check(&inst, a).satisfied());
            assert_eq!(xcore::checker::objective_value(&inst, a).unwrap(), *v);
        }
        OracleResult::Optimum(r.best.map(|(_, v)| v))
    } else {
        OracleResult::Count(count_solutions(&inst, Budget::wall(Duration::from_secs(60))).expect("count finishes"))
    }
}

const SMALL: &[(Problem, &[i64])] = &[
    (Problem::AverageAvoiding, &[5]),
    (Problem::Hamming, &[3, 4, 2, 2]),
    (Problem::HyperSudoku, &[2]),
    (Problem::Takuzu, &[2]),
    (Problem::Takuzu, &[4]),
    (Problem::PoolballTriangle, &[3]),
    (Problem::LitPuzzle, &[3]),
    (Problem::Pyramid, &[3, 20]),
    (Problem::Drinking, &[15]),
    (Problem::SameQueensKnights, &[3]),
    (Problem::BinPackingV1, &[10, 2, 3, 4, 5, 6, 7]),
    (Problem::BinPackingV2, &[10, 2, 3, 4, 5, 6, 7]),
    (Problem::SocialGolfers, &[2, 2, 3]),
    (Problem::SocialGolfers, &[3, 2, 2]),
    (Problem::StillLife, &[3, 3]),
];

#[test]
fn engine_agrees_with_reference_oracle_on_small_sizes() {
    for (p, params) in SMALL {
        let s = spec(*p, params);
        let want = reference_oracle(&s).unwrap_or_else(|e| panic!("{}: {e}", s.label()));
        assert_eq!(engine_answer(&s), want, "{}", s.label());
    }
}

#[test]
fn known_small_answers() {
    let bp = [10, 2, 3, 4, 5, 6, 7];
    assert_eq!(reference_oracle(&spec(Problem::BinPackingV1, &bp)).unwrap(), OracleResult::Optimum(Some(3)));
    assert_eq!(reference_oracle(&spec(Problem::BinPackingV2, &bp)).unwrap(), OracleResult::Optimum(Some(3)));
    assert_eq!(reference_oracle(&spec(Problem::Takuzu, &[2])).unwrap(), OracleResult::Count(2));
}

#[test]
fn generated_documents_round_trip() {
    for (p, params) in SMALL {
        let inst = generate(&spec(*p, params)).unwrap();
        assert!(validation_errors(&inst).is_empty());
        let text = emit_instance(&inst);
        let back = parse_instance(&text, Profile::Main).unwrap();
        assert_eq!(emit_instance(&back), text, "{p:?}");
    }
}

#[test]
fn generation_is_deterministic() {
    for (p, tuples) in presets() {
        let s = spec(p, &tuples[0]);
        assert_eq!(emit_instance(&generate(&s).unwrap()), emit_instance(&generate(&s).unwrap()));
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(generate(&spec(Problem::Hamming, &[20, 10])).is_err());
    assert!(generate(&spec(Problem::Takuzu, &[3])).is_err());
    assert!(generate(&spec(Problem::Pyramid, &[0, 5])).is_err());
    assert!(generate(&spec(Problem::BinPackingV1, &[10])).is_err());
    assert!(generate(&spec(Problem::BinPackingV1, &[10, 11])).is_err());
}

#[test]
fn first_presets_of_satisfaction_models_solve_within_a_minute() {
    for (p, params) in [
        (Problem::AverageAvoiding, &[20][..]),
        (Problem::Hamming, &[20, 10, 3, 5]),
        (Problem::HyperSudoku, &[3]),
        (Problem::Takuzu, &[30]),
    ] {
        let inst = generate(&spec(p, params)).unwrap();
        let t = Instant::now();
        let r = Solver::new(&inst, SolverOptions { budget: Budget::wall(Duration::from_secs(60)), seed: 0, restarts: true }).solve();
        match r.status {
            Status::Sat(a) => assert!(check(&inst, &a).satisfied(), "{p}"),
            other => panic!("{p} {params:?}: {other:?} after {:?}", t.elapsed()),
        }
    }
}
