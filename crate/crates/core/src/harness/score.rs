use std::collections::{BTreeMap, BTreeSet};

use super::record::{Claim, RunRecord};
use crate::model::Sense;

/// Points of every solver on one instance, after invalidating claims
/// contradicted by verified solutions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceScore {
    pub points: BTreeMap<String, f64>,
    pub discrepancies: Vec<String>,
}

/// Invalidates solution claims that were never verified.
fn gate(records: &mut [RunRecord]) {
    for r in records.iter_mut() {
        if r.claim.has_solution() && !r.verified {
            r.invalidate("solution claim without verified assignment");
        }
    }
}

/// Invalidates UNSAT claims when some solver exhibited a verified solution.
fn contradict_unsat(records: &mut [RunRecord], out: &mut InstanceScore) {
    let Some(witness) = records.iter().find(|r| r.claim.has_solution()).map(|r| r.solver.clone()) else {
        return;
    };
    for r in records.iter_mut().filter(|r| r.claim == Claim::Unsat) {
        out.discrepancies.push(format!("{}: {} claims UNSAT but {} gave a verified solution", r.instance, r.solver, witness));
        r.invalidate(format!("UNSAT contradicted by the verified solution of {witness}"));
    }
}

/// One point per solver deciding the instance, by a verified solution or
/// an uncontradicted unsatisfiability claim.
pub fn score_csp(records: &mut [RunRecord]) -> InstanceScore {
    let mut out = InstanceScore::default();
    gate(records);
    contradict_unsat(records, &mut out);
    for r in records.iter() {
        let p = if r.claim.has_solution() || r.claim == Claim::Unsat { 1.0 } else { 0.0 };
        out.points.insert(r.solver.clone(), p);
    }
    out
}

/// Competition points for an optimization instance: 1 for an unsat proof
/// or a proved optimum; for the best bound found, 1 if nobody proved it
/// optimal and 0.5 otherwise; 0 for anything worse.
pub fn score_cop(records: &mut [RunRecord], sense: Sense) -> InstanceScore {
    let mut out = InstanceScore::default();
    gate(records);
    contradict_unsat(records, &mut out);
    let best = records.iter().filter(|r| r.claim.has_solution()).filter_map(|r| r.bound).reduce(|a, b| if sense.better(b, a) { b } else { a });
    if let Some(best) = best {
        let better_by = records.iter().find(|r| r.claim.has_solution() && r.bound == Some(best)).map(|r| r.solver.clone()).unwrap_or_default();
        for r in records.iter_mut().filter(|r| r.claim == Claim::Optimum) {
            if r.bound.is_some_and(|b| sense.better(best, b)) {
                out.discrepancies.push(format!(
                    "{}: {} claims optimum {} but {} found {best}",
                    r.instance,
                    r.solver,
                    r.bound.unwrap_or_default(),
                    better_by
                ));
                r.invalidate(format!("claimed optimum beaten by the verified bound {best} of {better_by}"));
            }
        }
    }
    let proved = records.iter().any(|r| r.claim == Claim::Optimum && r.bound == best);
    for r in records.iter() {
        let p = match r.claim {
            Claim::Unsat | Claim::Optimum => 1.0,
            Claim::Sat | Claim::Bound if r.bound == best => {
                if proved {
                    0.5
                } else {
                    1.0
                }
            }
            _ => 0.0,
        };
        out.points.insert(r.solver.clone(), p);
    }
    out
}

/// Scored records of a campaign: points per instance and solver.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable {
    /// instance → solver → points.
    pub points: BTreeMap<String, BTreeMap<String, f64>>,
    pub totals: BTreeMap<String, f64>,
    /// Summed wall time per solver, in seconds.
    pub wall: BTreeMap<String, f64>,
    pub discrepancies: Vec<String>,
    /// Records after invalidation, sorted by (instance, solver).
    pub records: Vec<RunRecord>,
    /// Records as given, kept so that subsets of solvers can be re-scored.
    original: Vec<RunRecord>,
}

impl ScoreTable {
    /// Scores every instance; an instance is an optimization one when any
    /// of its records carries an objective sense.
    pub fn build(records: Vec<RunRecord>) -> Self {
        let mut original = records;
        original.sort_by(|a, b| (&a.instance, &a.solver).cmp(&(&b.instance, &b.solver)));
        let mut t = ScoreTable { original: original.clone(), ..Default::default() };
        let mut by_instance: BTreeMap<String, Vec<RunRecord>> = BTreeMap::new();
        for r in original {
            by_instance.entry(r.instance.clone()).or_default().push(r);
        }
        for (inst, mut recs) in by_instance {
            let score = match recs.iter().find_map(|r| r.sense) {
                Some(sense) => score_cop(&mut recs, sense),
                None => score_csp(&mut recs),
            };
            for (s, p) in &score.points {
                *t.totals.entry(s.clone()).or_default() += p;
            }
            for r in &recs {
                *t.wall.entry(r.solver.clone()).or_default() += r.wall_time;
            }
            t.points.insert(inst, score.points);
            t.discrepancies.extend(score.discrepancies);
            t.records.extend(recs);
        }
        t
    }

    pub fn solvers(&self) -> BTreeSet<String> {
        self.totals.keys().cloned().collect()
    }

    /// Scores recomputed as if only `solvers` had competed.
    pub fn restricted(&self, solvers: &BTreeSet<String>) -> ScoreTable {
        ScoreTable::build(self.original.iter().filter(|r| solvers.contains(&r.solver)).cloned().collect())
    }

    /// The same points with every other solver removed.
    pub fn retain(&self, solvers: &BTreeSet<String>) -> ScoreTable {
        let keep = |s: &String| solvers.contains(s);
        ScoreTable {
            points: self
                .points
                .iter()
                .map(|(i, ps)| (i.clone(), ps.iter().filter(|(s, _)| keep(s)).map(|(s, p)| (s.clone(), *p)).collect()))
                .collect(),
            totals: self.totals.iter().filter(|(s, _)| keep(s)).map(|(s, p)| (s.clone(), *p)).collect(),
            wall: self.wall.iter().filter(|(s, _)| keep(s)).map(|(s, w)| (s.clone(), *w)).collect(),
            discrepancies: self.discrepancies.clone(),
            records: self.records.iter().filter(|r| keep(&r.solver)).cloned().collect(),
            original: self.original.iter().filter(|r| keep(&r.solver)).cloned().collect(),
        }
    }
}
