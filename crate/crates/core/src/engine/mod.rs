//! Propagation-based solver: trailed domains, a propagator per constraint
//! (or per piece of a decomposition), depth-first binary search and
//! branch and bound.
//!
//! Every propagator also carries the exact constraint it enforces, which is
//! re-checked once all of its variables are fixed, so weak filtering never
//! lets a violating assignment through.

pub mod compile;
pub mod dom;
pub mod propagate;
pub mod props;
pub mod search;
pub mod store;

pub use compile::{compile, decompose, Compiled, VarPool};
pub use dom::Dom;
pub use propagate::{Fixpoint, PropEntry, Propagation, Propagator, Strength};
pub use search::{
    count_solutions, luby, solve_cop, solve_csp, Budget, CopResult, SolveResult, Solver, SolverOptions, Stats, Status,
};
pub use store::{DomainStore, Empty};
