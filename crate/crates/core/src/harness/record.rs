use std::fmt;

use serde::{Deserialize, Serialize};

use super::protocol::{ProtocolStatus, SolverOutput};
use crate::checker::{check, objective_value};
use crate::model::{Assignment, Instance, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Claim {
    Sat,
    Unsat,
    Optimum,
    Bound,
    Unknown,
    /// A claim that failed verification; worth no points.
    Invalid,
}

impl Claim {
    pub fn has_solution(self) -> bool {
        matches!(self, Claim::Sat | Claim::Optimum | Claim::Bound)
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Claim::Sat => "SAT",
            Claim::Unsat => "UNSAT",
            Claim::Optimum => "OPTIMUM",
            Claim::Bound => "BOUND",
            Claim::Unknown => "UNKNOWN",
            Claim::Invalid => "INVALID",
        })
    }
}

/// Outcome of one solver on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub solver: String,
    pub claim: Claim,
    /// Objective direction of the instance, absent for satisfaction problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<Sense>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
    /// Seconds.
    pub wall_time: f64,
    /// The assignment was checked and satisfies the instance.
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl RunRecord {
    pub fn new(instance: &str, solver: &str, claim: Claim) -> Self {
        RunRecord {
            instance: instance.to_string(),
            solver: solver.to_string(),
            claim,
            sense: None,
            bound: None,
            assignment: None,
            wall_time: 0.0,
            verified: false,
            diagnostics: Vec::new(),
        }
    }

    pub fn invalidate(&mut self, why: impl Into<String>) {
        self.claim = Claim::Invalid;
        self.verified = false;
        self.diagnostics.push(why.into());
    }
}

/// Turns protocol output into a claim. A protocol violation yields
/// `UNKNOWN`; an optimization answer without `OPTIMUM FOUND` is a bound.
pub fn claim_from_output(out: &SolverOutput, is_cop: bool) -> (Claim, Vec<String>) {
    if !out.violations.is_empty() {
        return (Claim::Unknown, out.violations.iter().map(|v| format!("protocol violation: {v}")).collect());
    }
    let claim = match (out.status, is_cop) {
        (Some(ProtocolStatus::Unsatisfiable), _) => Claim::Unsat,
        (Some(ProtocolStatus::OptimumFound), true) => Claim::Optimum,
        (Some(ProtocolStatus::OptimumFound | ProtocolStatus::Satisfiable), false) => Claim::Sat,
        (Some(ProtocolStatus::Satisfiable), true) => Claim::Bound,
        // Interrupted optimizers often print solutions before any status.
        (Some(ProtocolStatus::Unknown) | None, true) if out.values.is_some() => Claim::Bound,
        (Some(ProtocolStatus::Unknown), _) => Claim::Unknown,
        (None, _) => return (Claim::Unknown, vec!["no status line".to_string()]),
    };
    (claim, Vec::new())
}

/// Checks a solution-bearing claim against the instance: the assignment
/// must exist and satisfy every constraint, and a reported bound must equal
/// the objective value of the assignment. Failures downgrade to `INVALID`.
pub fn verify(inst: &Instance, rec: &mut RunRecord) {
    rec.sense = inst.objective.as_ref().map(|o| o.sense);
    if !rec.claim.has_solution() {
        rec.verified = false;
        return;
    }
    let Some(a) = &rec.assignment else {
        return rec.invalidate("no solution given");
    };
    let verdict = check(inst, a);
    if !verdict.satisfied() {
        let why = if let Some((expected, given)) = verdict.length_mismatch {
            format!("solution has {given} values for {expected} variables")
        } else if !verdict.violated.is_empty() {
            format!("violated constraints {:?}", verdict.violated)
        } else {
            format!("values outside domains of variables {:?}", verdict.domain_violations)
        };
        return rec.invalidate(why);
    }
    if inst.objective.is_some() {
        match objective_value(inst, a) {
            Ok(v) if rec.bound.is_none_or(|b| b == v) => rec.bound = Some(v),
            Ok(v) => return rec.invalidate(format!("claimed bound {} but the solution has objective {v}", rec.bound.unwrap_or(v))),
            Err(e) => return rec.invalidate(format!("objective cannot be evaluated: {e}")),
        }
    } else {
        rec.bound = None;
    }
    rec.verified = true;
}
