mod common;

use std::fs;
use std::path::PathBuf;

use common::*;
use proptest::prelude::*;
use xcore::generators::{generate, presets, ProblemSpec};
use xcore::model::*;
use xcore::xcsp::{emit_instance, parse_instance, Profile};

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/roundtrip");
    let mut files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.into_iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())).collect()
}

fn parse(text: &str) -> Instance {
    parse_instance(text, Profile::Main).unwrap_or_else(|ds| panic!("{}", ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")))
}

/// Parsing the emitted form gives back the same instance, and emission is a
/// fixed point.
fn assert_round_trip(label: &str, inst: &Instance) {
    let text = emit_instance(inst);
    let back = parse(&text);
    assert_eq!(&back, inst, "{label}:\n{text}");
    assert_eq!(emit_instance(&back), text, "{label}");
}

#[test]
fn hand_written_corpus_round_trips() {
    let files = corpus();
    assert_eq!(files.len(), 20);
    for (name, text) in &files {
        assert_round_trip(name, &parse(text));
    }
}

#[test]
fn corpus_keeps_tags_and_objectives() {
    let files = corpus();
    let get = |n: &str| parse(&files.iter().find(|(f, _)| f.starts_with(n)).unwrap().1);
    let blocks = get("04");
    assert!(blocks.constraints.iter().any(|c| c.tags.iter().any(|t| t == "symmetry-breaking")));
    assert!(blocks.constraints.iter().any(|c| c.tags.iter().any(|t| t == "redundant")));
    let cop = get("19");
    assert_eq!(cop.objective.as_ref().map(|o| o.sense), Some(Sense::Minimize));
    assert_eq!(get("20").objective.as_ref().map(|o| o.sense), Some(Sense::Maximize));
}

#[test]
fn corpus_solutions_survive_the_round_trip() {
    for (name, text) in corpus() {
        let inst = parse(&text);
        let back = parse(&emit_instance(&inst));
        let sols = brute_solutions(&inst);
        assert_eq!(sols, brute_solutions(&back), "{name}");
    }
}

#[test]
fn generated_presets_round_trip() {
    for (problem, sets) in presets() {
        for params in sets {
            let spec = ProblemSpec::new(problem, &params);
            assert_round_trip(&spec.label(), &generate(&spec).unwrap());
        }
    }
}

#[test]
fn mini_profile_accepts_only_its_elements() {
    for (name, text) in corpus() {
        let inst = parse(&text);
        let mini = parse_instance(&text, Profile::Mini);
        let allowed = inst.constraints.iter().all(|c| Profile::Mini.allows(&c.kind));
        assert_eq!(mini.is_ok(), allowed, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn random_instances_round_trip(seed in any::<u64>(), cop in prop::bool::ANY) {
        let inst = if cop { random_cop(seed) } else { random_csp(seed) };
        let text = emit_instance(&inst);
        let back = parse_instance(&text, Profile::Main).map_err(|ds| TestCaseError::fail(format!("{:?}\n{text}", ds.iter().map(|d| d.to_string()).collect::<Vec<_>>())))?;
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(emit_instance(&back), text);
    }
}
