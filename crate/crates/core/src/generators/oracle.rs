use super::{generate, GenError, ProblemSpec};
use crate::checker::{constraint_holds, objective_value};
use crate::model::Instance;

/// Most search nodes (partial assignments) the oracle will visit.
pub const ORACLE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("search space exceeds {0} nodes")]
    SpaceTooLarge(u64),
    #[error(transparent)]
    Generate(#[from] GenError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleResult {
    /// Number of solutions of a satisfaction problem.
    Count(u64),
    /// Best objective value, `None` when infeasible.
    Optimum(Option<i64>),
}

/// Solution count and, for optimization problems, the best objective value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub solutions: u64,
    pub optimum: Option<i64>,
    pub nodes: u64,
}

/// Exhaustive enumeration in variable-id order. Constraints are evaluated
/// by the checker once their last variable is assigned, so only partial
/// assignments consistent with every fully assigned constraint are extended.
pub fn enumerate(inst: &Instance, limit: u64) -> Result<Enumeration, OracleError> {
    let n = inst.num_vars();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (ci, c) in inst.constraints.iter().enumerate() {
        let last = c.kind.var_occurrences().into_iter().max().map_or(0, |v| v + 1);
        at[last].push(ci);
    }
    let holds = |level: usize, vals: &[i64]| at[level].iter().all(|&ci| constraint_holds(&inst.constraints[ci].kind, vals));
    let doms: Vec<Vec<i64>> = inst.variables.iter().map(|v| v.domain.iter().collect()).collect();
    let sense = inst.objective.as_ref().map(|o| o.sense);
    let mut out = Enumeration { solutions: 0, optimum: None, nodes: 0 };
    let mut vals = vec![0i64; n];
    if !holds(0, &vals) {
        return Ok(out);
    }
    // Explicit stack of next-value indices per level.
    let mut idx = vec![0usize; n];
    let mut level = 0usize;
    loop {
        if level == n {
            out.solutions += 1;
            if let Some(sense) = sense {
                if let Ok(v) = objective_value(inst, &vals) {
                    if out.optimum.map_or(true, |b| sense.better(v, b)) {
                        out.optimum = Some(v);
                    }
                }
            }
            if n == 0 {
                return Ok(out);
            }
            level -= 1;
            continue;
        }
        if idx[level] == doms[level].len() {
            idx[level] = 0;
            if level == 0 {
                return Ok(out);
            }
            level -= 1;
            continue;
        }
        out.nodes += 1;
        if out.nodes > limit {
            return Err(OracleError::SpaceTooLarge(limit));
        }
        vals[level] = doms[level][idx[level]];
        idx[level] += 1;
        if holds(level + 1, &vals) {
            level += 1;
        }
    }
}

/// Solution count for satisfaction problems, optimum for optimization
/// problems, computed without the engine.
pub fn reference_oracle(spec: &ProblemSpec) -> Result<OracleResult, OracleError> {
    let inst = generate(spec)?;
    let e = enumerate(&inst, ORACLE_LIMIT)?;
    Ok(match inst.objective {
        Some(_) => OracleResult::Optimum(e.optimum),
        None => OracleResult::Count(e.solutions),
    })
}
