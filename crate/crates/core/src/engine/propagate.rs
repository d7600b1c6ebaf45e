use std::collections::VecDeque;

use super::store::{DomainStore, Empty};
use crate::checker::constraint_holds;
use crate::model::{ConstraintKind, VarId};

/// Filtering level a propagator guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strength {
    Gac,
    Bounds,
    Fc,
    CheckOnly,
}

pub trait Propagator: Send {
    /// Removes values that cannot take part in a solution of this
    /// constraint given the other current domains.
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty>;

    fn strength(&self) -> Strength;

    /// Whether one run always reaches the propagator's own fixpoint.
    fn idempotent(&self) -> bool {
        false
    }

    /// 0 for cheap propagators, 1 for expensive ones; cheap ones run first.
    fn priority(&self) -> u8 {
        0
    }
}

/// A propagator together with the constraint it enforces.
pub struct PropEntry {
    pub prop: Box<dyn Propagator>,
    /// Id of the instance constraint it came from; `None` for the objective.
    pub owner: Option<usize>,
    /// Primitive constraint checked exactly once all its variables are fixed.
    pub check: ConstraintKind,
    pub vars: Vec<VarId>,
}

impl PropEntry {
    pub fn new(prop: Box<dyn Propagator>, owner: Option<usize>, check: ConstraintKind) -> Self {
        let mut vars = check.scope();
        vars.sort_unstable();
        vars.dedup();
        PropEntry { prop, owner, check, vars }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixpoint {
    Consistent,
    /// A domain was emptied or a fully fixed constraint was violated;
    /// carries the owning constraint id when known.
    Failure(Option<usize>),
}

/// Propagation queue over a fixed set of propagators.
pub struct Propagation {
    pub entries: Vec<PropEntry>,
    watchers: Vec<Vec<usize>>,
    queues: [VecDeque<usize>; 2],
    queued: Vec<bool>,
    pub propagations: u64,
    /// Failures caused by each variable's constraints, used to break ties
    /// between equal domain sizes.
    pub var_weight: Vec<u64>,
}

impl Propagation {
    pub fn new(entries: Vec<PropEntry>, num_vars: usize) -> Self {
        let mut watchers = vec![Vec::new(); num_vars];
        for (i, e) in entries.iter().enumerate() {
            for &v in &e.vars {
                watchers[v].push(i);
            }
        }
        let n = entries.len();
        Propagation { entries, watchers, queues: [VecDeque::new(), VecDeque::new()], queued: vec![false; n], propagations: 0, var_weight: vec![0; num_vars] }
    }

    fn enqueue(&mut self, e: usize) {
        if !self.queued[e] {
            self.queued[e] = true;
            let p = self.entries[e].prop.priority().min(1) as usize;
            self.queues[p].push_back(e);
        }
    }

    pub fn enqueue_all(&mut self) {
        for e in 0..self.entries.len() {
            self.enqueue(e);
        }
    }

    fn enqueue_watchers(&mut self, changed: &[VarId], skip: Option<usize>) {
        for &v in changed {
            for i in 0..self.watchers[v].len() {
                let e = self.watchers[v][i];
                if Some(e) != skip {
                    self.enqueue(e);
                }
            }
        }
    }

    fn clear(&mut self) {
        for q in &mut self.queues {
            for e in q.drain(..) {
                self.queued[e] = false;
            }
        }
    }

    /// Runs queued propagators, plus watchers of variables changed since the
    /// last call, until nothing changes.
    pub fn fixpoint(&mut self, s: &mut DomainStore) -> Fixpoint {
        let changed = s.take_changed();
        self.enqueue_watchers(&changed, None);
        loop {
            let Some(e) = self.queues[0].pop_front().or_else(|| self.queues[1].pop_front()) else {
                return Fixpoint::Consistent;
            };
            self.queued[e] = false;
            self.propagations += 1;
            let entry = &mut self.entries[e];
            let failed = entry.prop.propagate(s).is_err()
                || (entry.vars.iter().all(|&v| s.is_fixed(v)) && !constraint_holds(&entry.check, s));
            if failed {
                let owner = entry.owner;
                for &v in &entry.vars {
                    self.var_weight[v] += 1;
                }
                self.clear();
                s.take_changed();
                return Fixpoint::Failure(owner);
            }
            let idem = entry.prop.idempotent();
            let changed = s.take_changed();
            self.enqueue_watchers(&changed, if idem { Some(e) } else { None });
        }
    }
}
