//! In-memory representation of constraint problems.

mod constraint;
mod domain;
mod expr;
mod instance;
mod validate;

pub use constraint::{
    Automaton, Cell, CondOp, Condition, ConstraintKind, Occurs, Operand, OrderOp, Transition,
};
pub use domain::{normalize_ranges, Domain};
pub use expr::{Arity, EvalError, Expr, Op};
pub use instance::{
    Assignment, Constraint, Instance, Objective, ObjectiveBody, ProblemKind, Sense, Values, Variable,
    TAG_REDUNDANT, TAG_SYMMETRY_BREAKING,
};
pub use validate::{split_array_name, validate_instance, validation_errors, Rule, Severity, ValidationIssue};

/// Index of a variable in [`Instance::variables`].
pub type VarId = usize;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("empty domain")]
    EmptyDomain,
}
