//! Parameterized builders for a dozen benchmark models.
//!
//! Every builder is deterministic: the same [`ProblemSpec`] always produces
//! the same instance, and therefore the same emitted document.

mod binpacking;
mod oracle;
mod problems;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Instance;

pub use binpacking::{lb2, max_items_per_bin, n_bins, series};
pub use oracle::{enumerate, reference_oracle, OracleError, OracleResult, ORACLE_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    AverageAvoiding,
    Hamming,
    HyperSudoku,
    Takuzu,
    PoolballTriangle,
    LitPuzzle,
    Pyramid,
    Drinking,
    SameQueensKnights,
    BinPackingV1,
    BinPackingV2,
    SocialGolfers,
    StillLife,
}

impl Problem {
    pub const ALL: [Problem; 13] = [
        Problem::AverageAvoiding,
        Problem::Hamming,
        Problem::HyperSudoku,
        Problem::Takuzu,
        Problem::PoolballTriangle,
        Problem::LitPuzzle,
        Problem::Pyramid,
        Problem::Drinking,
        Problem::SameQueensKnights,
        Problem::BinPackingV1,
        Problem::BinPackingV2,
        Problem::SocialGolfers,
        Problem::StillLife,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::AverageAvoiding => "average-avoiding",
            Problem::Hamming => "hamming",
            Problem::HyperSudoku => "hyper-sudoku",
            Problem::Takuzu => "takuzu",
            Problem::PoolballTriangle => "poolball-triangle",
            Problem::LitPuzzle => "lit-puzzle",
            Problem::Pyramid => "pyramid",
            Problem::Drinking => "drinking",
            Problem::SameQueensKnights => "same-queens-knights",
            Problem::BinPackingV1 => "bin-packing-v1",
            Problem::BinPackingV2 => "bin-packing-v2",
            Problem::SocialGolfers => "social-golfers",
            Problem::StillLife => "still-life",
        }
    }

    /// Parameter names in positional order. Bin packing takes the capacity
    /// followed by any number of item weights.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Problem::AverageAvoiding => &["n"],
            Problem::Hamming => &["n", "m", "d", "k"],
            Problem::HyperSudoku => &["base"],
            Problem::Takuzu => &["n"],
            Problem::PoolballTriangle => &["n"],
            Problem::LitPuzzle => &["n"],
            Problem::Pyramid => &["n", "k"],
            Problem::Drinking => &["n"],
            Problem::SameQueensKnights => &["n"],
            Problem::BinPackingV1 | Problem::BinPackingV2 => &["capacity", "weights..."],
            Problem::SocialGolfers => &["groups", "size", "weeks"],
            Problem::StillLife => &["n", "m"],
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Problem::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| GenError::UnknownProblem(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("invalid parameters for {problem}: {rule}")]
    InvalidParams { problem: Problem, rule: String },
}

/// A problem name with positional integer parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub problem: Problem,
    pub params: Vec<i64>,
    /// Recorded for reproducibility; the twelve models are not randomized.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ProblemSpec {
    pub fn new(problem: Problem, params: &[i64]) -> Self {
        ProblemSpec { problem, params: params.to_vec(), seed: None }
    }

    /// Short file-friendly label such as `hamming-20-10-3-5`.
    pub fn label(&self) -> String {
        let mut s = self.problem.name().to_string();
        for p in &self.params {
            s.push('-');
            s.push_str(&p.to_string());
        }
        s
    }
}

pub fn generate(spec: &ProblemSpec) -> Result<Instance, GenError> {
    problems::build(spec.problem, &spec.params).map_err(|rule| GenError::InvalidParams { problem: spec.problem, rule })
}

const PRESETS: &str = include_str!("presets.toml");

/// Competition parameter tuples per problem, in listing order.
pub fn presets() -> BTreeMap<Problem, Vec<Vec<i64>>> {
    let raw: BTreeMap<String, Vec<Vec<i64>>> = toml::from_str(PRESETS).expect("bundled presets parse");
    raw.into_iter().map(|(k, v)| (k.parse().expect("preset names are problems"), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validation_errors;

    #[test]
    fn names_round_trip() {
        for p in Problem::ALL {
            assert_eq!(p.name().parse::<Problem>().unwrap(), p);
        }
        assert!("sudoku".parse::<Problem>().is_err());
    }

    #[test]
    fn presets_cover_every_parameterized_problem() {
        let ps = presets();
        assert_eq!(ps[&Problem::Hamming][0], vec![20, 10, 3, 5]);
        assert_eq!(ps[&Problem::AverageAvoiding][0], vec![20]);
        for (p, tuples) in &ps {
            for t in tuples {
                if p.param_names().len() == t.len() {
                    continue;
                }
                panic!("{p} preset {t:?} has the wrong arity");
            }
        }
    }

    #[test]
    fn small_presets_validate() {
        for (p, tuples) in presets() {
            let t = &tuples[0];
            let inst = generate(&ProblemSpec::new(p, t)).unwrap();
            assert!(validation_errors(&inst).is_empty(), "{p} {t:?}");
        }
    }
}
