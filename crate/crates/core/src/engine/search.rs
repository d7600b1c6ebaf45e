use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::compile::{compile, Compiled};
use super::propagate::{Fixpoint, Propagation};
use super::store::DomainStore;
use crate::checker::{check, objective_value};
use crate::model::{Assignment, Domain, Instance, Sense, VarId};

/// Wall-clock is polled once per this many nodes.
const WALL_POLL: u64 = 1 << 12;
/// Failures per unit of the restart sequence.
const RESTART_SCALE: u64 = 100;

/// Search limits; `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub wall: Option<Duration>,
    pub nodes: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(n: u64) -> Self {
        Budget { wall: None, nodes: Some(n) }
    }

    pub fn wall(d: Duration) -> Self {
        Budget { wall: Some(d), nodes: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: u64,
    pub failures: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Sat(Assignment),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub stats: Stats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopResult {
    /// Best solution found with its objective value.
    pub best: Option<(Assignment, i64)>,
    /// The search space was exhausted: `best` is optimal, or absent because
    /// there is no solution.
    pub proved_optimal: bool,
    /// `Sat` with the best solution, `Unsat` when proved infeasible,
    /// `Unknown` when the budget ran out before any solution.
    pub status: Status,
    pub stats: Stats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Luby restarts with randomized tie-breaking among equal domain sizes.
    pub restarts: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { budget: Budget::unlimited(), seed: 0, restarts: false }
    }
}

enum Outcome {
    Exhausted,
    OutOfBudget,
    Halted,
}

enum OnSolution {
    Stop,
    Continue,
}

/// `i`-th term (1-based) of the Luby sequence.
pub fn luby(i: u64) -> u64 {
    let mut k = 1u32;
    while (1u64 << k) - 1 < i {
        k += 1;
    }
    if (1u64 << k) - 1 == i {
        1u64 << (k - 1)
    } else {
        luby(i - (1u64 << (k - 1)) + 1)
    }
}

/// Depth-first search with binary branching over a compiled instance.
pub struct Solver<'a> {
    inst: &'a Instance,
    num_original: usize,
    objective: Option<(VarId, Sense)>,
    store: DomainStore,
    prop: Propagation,
    options: SolverOptions,
    rng: ChaCha8Rng,
    bound: Option<i64>,
    stats: Stats,
    started: Instant,
}

impl<'a> Solver<'a> {
    pub fn new(inst: &'a Instance, options: SolverOptions) -> Self {
        let Compiled { doms, entries, num_original, objective } = compile(inst);
        let n = doms.len();
        Solver {
            inst,
            num_original,
            objective,
            store: DomainStore::new(doms),
            prop: Propagation::new(entries, n),
            options,
            rng: ChaCha8Rng::seed_from_u64(options.seed),
            bound: None,
            stats: Stats::default(),
            started: Instant::now(),
        }
    }

    /// Root propagation only: the filtered domains of the original
    /// variables, or the owning constraint of a failure.
    pub fn propagate_root(mut self) -> Result<Vec<Domain>, Option<usize>> {
        self.prop.enqueue_all();
        match self.prop.fixpoint(&mut self.store) {
            Fixpoint::Consistent => Ok((0..self.num_original).map(|v| self.store.dom(v).to_domain()).collect()),
            Fixpoint::Failure(owner) => Err(owner),
        }
    }

    fn consistent(&mut self) -> bool {
        if let (Some((o, sense)), Some(b)) = (self.objective, self.bound) {
            let r = match sense {
                Sense::Minimize => self.store.set_max_wide(o, b as i128 - 1),
                Sense::Maximize => self.store.set_min_wide(o, b as i128 + 1),
            };
            if r.is_err() {
                return false;
            }
        }
        let r = self.prop.fixpoint(&mut self.store);
        self.stats.propagations = self.prop.propagations;
        r == Fixpoint::Consistent
    }

    /// Smallest domain first, then the variable whose constraints failed
    /// most often, then the lowest id (or a random one under restarts).
    fn select(&mut self) -> Option<VarId> {
        for range in [0..self.num_original, self.num_original..self.store.len()] {
            let mut best: Option<(u64, u64, VarId)> = None;
            let mut ties = 0u32;
            for v in range {
                let size = self.store.size(v);
                if size <= 1 {
                    continue;
                }
                let w = self.prop.var_weight[v];
                match best {
                    Some((b, bw, _)) if size > b || (size == b && w < bw) => {}
                    Some((b, bw, _)) if size == b && w == bw => {
                        if self.options.restarts {
                            ties += 1;
                            if self.rng.gen_range(0..=ties) == 0 {
                                best = Some((size, w, v));
                            }
                        }
                    }
                    _ => {
                        best = Some((size, w, v));
                        ties = 0;
                    }
                }
            }
            if let Some((_, _, v)) = best {
                return Some(v);
            }
        }
        None
    }

    fn out_of_budget(&self) -> bool {
        if self.options.budget.nodes.is_some_and(|n| self.stats.nodes >= n) {
            return true;
        }
        match self.options.budget.wall {
            Some(w) if self.stats.nodes % WALL_POLL == 0 => self.started.elapsed() >= w,
            _ => false,
        }
    }

    fn run(&mut self, on_solution: &mut dyn FnMut(&mut Self, Assignment) -> OnSolution) -> Outcome {
        self.started = Instant::now();
        self.prop.enqueue_all();
        if !self.consistent() {
            return Outcome::Exhausted;
        }
        let mut decisions: Vec<(VarId, i64)> = Vec::new();
        let mut restart_index = 1u64;
        let mut restart_limit = luby(1) * RESTART_SCALE;
        let mut since_restart = 0u64;
        loop {
            let failed = match self.select() {
                Some(x) => {
                    if self.out_of_budget() {
                        return Outcome::OutOfBudget;
                    }
                    self.stats.nodes += 1;
                    let v = self.store.min(x);
                    self.store.push_level();
                    decisions.push((x, v));
                    !(self.store.fix(x, v).is_ok() && self.consistent())
                }
                None => {
                    let a = Assignment::new((0..self.num_original).map(|v| self.store.value(v)).collect());
                    let verdict = check(self.inst, &a);
                    debug_assert!(verdict.satisfied(), "propagation accepted a violating assignment: {verdict:?}");
                    if verdict.satisfied() {
                        if let OnSolution::Stop = on_solution(self, a) {
                            return Outcome::Halted;
                        }
                    }
                    true
                }
            };
            if !failed {
                continue;
            }
            self.stats.failures += 1;
            since_restart += 1;
            if self.options.restarts && since_restart >= restart_limit {
                since_restart = 0;
                restart_index += 1;
                restart_limit = luby(restart_index) * RESTART_SCALE;
                self.stats.restarts += 1;
                decisions.clear();
                self.store.backtrack_to(0);
                if !self.consistent() {
                    return Outcome::Exhausted;
                }
                continue;
            }
            loop {
                let Some((x, v)) = decisions.pop() else {
                    return Outcome::Exhausted;
                };
                self.store.backtrack_to(decisions.len());
                if self.out_of_budget() {
                    return Outcome::OutOfBudget;
                }
                self.stats.nodes += 1;
                if self.store.remove(x, v).is_ok() && self.consistent() {
                    break;
                }
                self.stats.failures += 1;
            }
        }
    }

    fn finish_stats(&mut self) -> Stats {
        self.stats.propagations = self.prop.propagations;
        self.stats.wall_time = self.started.elapsed();
        self.stats.clone()
    }

    /// First solution, a proof of infeasibility, or `Unknown`.
    pub fn solve(mut self) -> SolveResult {
        let mut found = None;
        let outcome = self.run(&mut |_, a| {
            found = Some(a);
            OnSolution::Stop
        });
        let status = match outcome {
            Outcome::Halted => Status::Sat(found.expect("solution recorded")),
            Outcome::Exhausted => Status::Unsat,
            Outcome::OutOfBudget => Status::Unknown,
        };
        SolveResult { status, stats: self.finish_stats() }
    }

    /// Branch and bound; `on_incumbent` sees every improving solution.
    pub fn optimize(mut self, on_incumbent: &mut dyn FnMut(&Assignment, i64)) -> CopResult {
        let inst = self.inst;
        let mut best: Option<(Assignment, i64)> = None;
        let has_objective = self.objective.is_some();
        let outcome = self.run(&mut |solver, a| {
            let Ok(value) = objective_value(inst, &a) else {
                return OnSolution::Continue;
            };
            on_incumbent(&a, value);
            best = Some((a, value));
            if !has_objective {
                return OnSolution::Stop;
            }
            solver.bound = Some(value);
            OnSolution::Continue
        });
        // An exhausted search proves optimality, or infeasibility when
        // nothing was found.
        let proved_optimal = matches!(outcome, Outcome::Exhausted | Outcome::Halted);
        let status = match (&best, outcome) {
            (Some((a, _)), _) => Status::Sat(a.clone()),
            (None, Outcome::Exhausted) => Status::Unsat,
            (None, _) => Status::Unknown,
        };
        CopResult { best, proved_optimal, status, stats: self.finish_stats() }
    }

    /// Number of distinct solutions, or `None` when the budget ran out.
    pub fn count(mut self) -> Option<u64> {
        let mut seen: HashSet<Assignment> = HashSet::new();
        match self.run(&mut |_, a| {
            seen.insert(a);
            OnSolution::Continue
        }) {
            Outcome::Exhausted => Some(seen.len() as u64),
            _ => None,
        }
    }
}

pub fn solve_csp(inst: &Instance, budget: Budget, seed: u64) -> SolveResult {
    Solver::new(inst, SolverOptions { budget, seed, restarts: false }).solve()
}

pub fn solve_cop(inst: &Instance, budget: Budget, seed: u64) -> CopResult {
    Solver::new(inst, SolverOptions { budget, seed, restarts: false }).optimize(&mut |_, _| {})
}

pub fn count_solutions(inst: &Instance, budget: Budget) -> Option<u64> {
    Solver::new(inst, SolverOptions { budget, seed: 0, restarts: false }).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }
}
