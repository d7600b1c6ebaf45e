use rustc_hash::{FxHashMap, FxHashSet};
use std::fmt;

use super::{ConstraintKind, Instance, ObjectiveBody, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    ArityMismatch,
    TupleArity,
    UnknownVariable,
    ExprArity,
    InvalidCondition,
    RaggedLists,
    DuplicateValues,
    NegativeLength,
    BadDiagram,
    BadSlide,
    DuplicateName,
    BadName,
    ArrayLayout,
    /// Warning: a repeated variable inside an allDifferent-family scope.
    DuplicateInAllDifferent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub severity: Severity,
    /// Offending constraint id; `None` for variable or objective issues.
    pub constraint: Option<usize>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.constraint {
            Some(c) => write!(f, "{sev}: constraint {c}: {:?}: {}", self.rule, self.message),
            None => write!(f, "{sev}: {:?}: {}", self.rule, self.message),
        }
    }
}

/// Splits `x[1][2]` into `("x", [1, 2])`; plain names yield no indices.
/// Returns `None` for names outside the accepted syntax.
pub fn split_array_name(name: &str) -> Option<(&str, Vec<usize>)> {
    let base_end = name.find('[').unwrap_or(name.len());
    let base = &name[..base_end];
    let mut chars = base.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return None,
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let mut idx = Vec::new();
    let mut rest = &name[base_end..];
    while !rest.is_empty() {
        let close = rest.find(']')?;
        if !rest.starts_with('[') {
            return None;
        }
        let digits = &rest[1..close];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        idx.push(digits.parse().ok()?);
        rest = &rest[close + 1..];
    }
    Some((base, idx))
}

struct Ctx<'a> {
    n: usize,
    out: &'a mut Vec<ValidationIssue>,
    cid: Option<usize>,
}

impl Ctx<'_> {
    fn err(&mut self, rule: Rule, message: impl Into<String>) {
        self.out.push(ValidationIssue { severity: Severity::Error, constraint: self.cid, rule, message: message.into() });
    }

    fn warn(&mut self, rule: Rule, message: impl Into<String>) {
        self.out.push(ValidationIssue { severity: Severity::Warning, constraint: self.cid, rule, message: message.into() });
    }

    fn len_eq(&mut self, what: &str, a: usize, b: usize) {
        if a != b {
            self.err(Rule::ArityMismatch, format!("{what}: {a} vs {b}"));
        }
    }
}

/// Checks every structural invariant of an instance. Errors make the
/// instance unusable; warnings are informational.
pub fn validate_instance(inst: &Instance) -> Vec<ValidationIssue> {
    let mut out = Vec::new();
    validate_names(inst, &mut out);
    for (cid, c) in inst.constraints.iter().enumerate() {
        let mut ctx = Ctx { n: inst.variables.len(), out: &mut out, cid: Some(cid) };
        validate_kind(&c.kind, &mut ctx);
    }
    if let Some(obj) = &inst.objective {
        let mut ctx = Ctx { n: inst.variables.len(), out: &mut out, cid: None };
        for v in obj.vars() {
            if v >= ctx.n {
                ctx.err(Rule::UnknownVariable, format!("objective references variable {v}"));
            }
        }
        match &obj.body {
            ObjectiveBody::Expr(e) => {
                if let Some((op, n)) = e.arity_error() {
                    ctx.err(Rule::ExprArity, format!("objective: {} applied to {n} arguments", op.name()));
                }
            }
            ObjectiveBody::WeightedSum { scope, coeffs } => ctx.len_eq("objective coeffs", coeffs.len(), scope.len()),
        }
    }
    out
}

/// Only the error-severity issues of [`validate_instance`].
pub fn validation_errors(inst: &Instance) -> Vec<ValidationIssue> {
    validate_instance(inst).into_iter().filter(|i| i.severity == Severity::Error).collect()
}

fn validate_names(inst: &Instance, out: &mut Vec<ValidationIssue>) {
    let mut seen = FxHashSet::default();
    let mut ctx = Ctx { n: inst.variables.len(), out, cid: None };
    // base name -> (dims, last index, run closed?)
    let mut arrays: FxHashMap<String, (usize, Vec<usize>, bool)> = FxHashMap::default();
    let mut plain: FxHashSet<String> = FxHashSet::default();
    let mut current: Option<String> = None;
    for var in &inst.variables {
        if !seen.insert(var.name.as_str()) {
            ctx.err(Rule::DuplicateName, format!("variable name {} used twice", var.name));
            continue;
        }
        let Some((base, idx)) = split_array_name(&var.name) else {
            ctx.err(Rule::BadName, format!("variable name {:?} is not an identifier or array cell", var.name));
            current = None;
            continue;
        };
        if idx.is_empty() {
            if arrays.contains_key(base) {
                ctx.err(Rule::ArrayLayout, format!("{base} is both a variable and an array"));
            }
            plain.insert(base.to_string());
            current = None;
            continue;
        }
        if plain.contains(base) {
            ctx.err(Rule::ArrayLayout, format!("{base} is both a variable and an array"));
        }
        let continuing = current.as_deref() == Some(base);
        match arrays.get_mut(base) {
            Some((dims, last, closed)) => {
                if !continuing || *closed {
                    *closed = true;
                    ctx.err(Rule::ArrayLayout, format!("cells of array {base} are not contiguous"));
                } else if *dims != idx.len() {
                    ctx.err(Rule::ArrayLayout, format!("array {base} mixes dimensions"));
                } else if idx <= *last {
                    ctx.err(Rule::ArrayLayout, format!("cells of array {base} are not in row-major order"));
                } else {
                    *last = idx;
                }
            }
            None => {
                if let Some(prev) = current.take() {
                    if let Some(e) = arrays.get_mut(&prev) {
                        e.2 = true;
                    }
                }
                arrays.insert(base.to_string(), (idx.len(), idx, false));
            }
        }
        if !continuing {
            if let Some(prev) = current.take() {
                if let Some(e) = arrays.get_mut(&prev) {
                    e.2 = true;
                }
            }
        }
        current = Some(base.to_string());
    }
}

fn check_vars(ctx: &mut Ctx, vars: impl IntoIterator<Item = VarId>) {
    for v in vars {
        if v >= ctx.n {
            ctx.err(Rule::UnknownVariable, format!("references unknown variable {v}"));
            return;
        }
    }
}

fn check_cond(ctx: &mut Ctx, c: &super::Condition) {
    if !c.is_well_formed() {
        ctx.err(Rule::InvalidCondition, format!("operator {} incompatible with operand", c.op.name()));
    }
    if let super::Operand::Interval(lo, hi) = c.rhs {
        if lo > hi {
            ctx.err(Rule::InvalidCondition, format!("empty interval {lo}..{hi}"));
        }
    }
}

fn distinct(ctx: &mut Ctx, what: &str, values: &[i64]) {
    let mut s = values.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != values.len() {
        ctx.err(Rule::DuplicateValues, format!("{what} contains repeated values"));
    }
}

fn no_duplicate_vars(ctx: &mut Ctx, scope: &[VarId], except: &[i64]) {
    let mut s = scope.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != scope.len() {
        let note = if except.is_empty() { "" } else { " (only satisfiable on excepted values)" };
        ctx.warn(Rule::DuplicateInAllDifferent, format!("repeated variable in allDifferent scope{note}"));
    }
}

fn rectangular(ctx: &mut Ctx, lists: &[Vec<VarId>]) {
    if let Some(first) = lists.first() {
        if lists.iter().any(|l| l.len() != first.len()) {
            ctx.err(Rule::RaggedLists, "lists have different lengths");
        }
    }
}

fn validate_kind(kind: &ConstraintKind, ctx: &mut Ctx) {
    use ConstraintKind::*;
    check_vars(ctx, kind.var_occurrences());
    match kind {
        Intension(e) => {
            if let Some((op, n)) = e.arity_error() {
                ctx.err(Rule::ExprArity, format!("{} applied to {n} arguments", op.name()));
            }
        }
        Extension { scope, tuples, .. } => {
            if let Some(t) = tuples.iter().find(|t| t.len() != scope.len()) {
                ctx.err(Rule::TupleArity, format!("tuple of arity {} over scope of {}", t.len(), scope.len()));
            }
        }
        Regular { automaton, .. } => {
            if automaton.finals.is_empty() {
                ctx.err(Rule::BadDiagram, "automaton without final states");
            }
        }
        Mdd { transitions, .. } => {
            let targets: FxHashSet<&str> = transitions.iter().map(|t| t.to.as_str()).collect();
            let roots: FxHashSet<&str> =
                transitions.iter().map(|t| t.from.as_str()).filter(|s| !targets.contains(s)).collect();
            if roots.len() != 1 {
                ctx.err(Rule::BadDiagram, format!("diagram has {} roots, expected exactly one", roots.len()));
            }
        }
        AllDifferent { scope, except } => {
            no_duplicate_vars(ctx, scope, except);
            distinct(ctx, "except", except);
        }
        AllDifferentMatrix { matrix } => {
            rectangular(ctx, matrix);
            for row in matrix {
                no_duplicate_vars(ctx, row, &[]);
            }
            if let Some(first) = matrix.first() {
                if matrix.iter().all(|r| r.len() == first.len()) {
                    for j in 0..first.len() {
                        let col: Vec<VarId> = matrix.iter().map(|r| r[j]).collect();
                        no_duplicate_vars(ctx, &col, &[]);
                    }
                }
            }
        }
        AllDifferentList { lists } => {
            rectangular(ctx, lists);
            if lists.len() < 2 {
                ctx.err(Rule::RaggedLists, "list form needs at least two lists");
            }
            if lists.iter().any(|l| l.is_empty()) {
                ctx.err(Rule::RaggedLists, "empty list");
            }
        }
        Lex { lists, .. } => rectangular(ctx, lists),
        Ordered { scope, lengths, .. } => {
            if let Some(l) = lengths {
                ctx.len_eq("ordered lengths", l.len(), scope.len().saturating_sub(1));
            }
        }
        Precedence { values, .. } => distinct(ctx, "precedence values", values),
        Sum { scope, coeffs, condition } => {
            ctx.len_eq("sum coeffs", coeffs.len(), scope.len());
            check_cond(ctx, condition);
        }
        Count { values, condition, .. } => {
            distinct(ctx, "count values", values);
            check_cond(ctx, condition);
        }
        NValues { condition, .. } | Maximum { condition, .. } | Minimum { condition, .. } => check_cond(ctx, condition),
        Cardinality { values, occurs, .. } => {
            ctx.len_eq("cardinality occurs", occurs.len(), values.len());
            distinct(ctx, "cardinality values", values);
        }
        Element { condition, .. } => check_cond(ctx, condition),
        Channel { .. } => {}
        NoOverlap { origins, lengths } => {
            ctx.len_eq("noOverlap lengths", lengths.len(), origins.len());
            for (o, l) in origins.iter().zip(lengths) {
                ctx.len_eq("noOverlap task dimensions", l.len(), o.len());
            }
            if let Some(first) = origins.first() {
                if origins.iter().any(|o| o.len() != first.len()) {
                    ctx.err(Rule::RaggedLists, "tasks with different dimensions");
                }
            }
            if lengths.iter().flatten().any(|&l| l < 0) {
                ctx.err(Rule::NegativeLength, "negative task length");
            }
        }
        Cumulative { origins, lengths, heights, condition } => {
            ctx.len_eq("cumulative lengths", lengths.len(), origins.len());
            ctx.len_eq("cumulative heights", heights.len(), origins.len());
            if lengths.iter().any(|&l| l < 0) {
                ctx.err(Rule::NegativeLength, "negative task length");
            }
            check_cond(ctx, condition);
        }
        BinPacking { scope, sizes, condition } => {
            ctx.len_eq("binPacking sizes", sizes.len(), scope.len());
            check_cond(ctx, condition);
        }
        Knapsack { scope, weights, profits, weight_condition, profit_condition } => {
            ctx.len_eq("knapsack weights", weights.len(), scope.len());
            ctx.len_eq("knapsack profits", profits.len(), scope.len());
            check_cond(ctx, weight_condition);
            check_cond(ctx, profit_condition);
        }
        Circuit { scope } => no_duplicate_vars(ctx, scope, &[]),
        Instantiation { scope, values } => ctx.len_eq("instantiation values", values.len(), scope.len()),
        AllEqual { .. } => {}
        Slide { arity, offset, pattern, .. } => {
            if *arity == 0 || *offset == 0 {
                ctx.err(Rule::BadSlide, "slide needs positive arity and offset");
            }
            if !matches!(**pattern, Intension(_) | Extension { .. }) {
                ctx.err(Rule::BadSlide, "slide pattern must be intension or extension");
            }
            match pattern.scope().last() {
                Some(&m) if m >= *arity => ctx.err(Rule::BadSlide, "slide pattern refers beyond its window"),
                Some(&m) if m + 1 < *arity => ctx.err(Rule::BadSlide, "slide pattern must use its last window position"),
                None => ctx.err(Rule::BadSlide, "slide pattern has no variables"),
                _ => {}
            }
            if let Extension { scope, tuples, .. } = &**pattern {
                if tuples.iter().any(|t| t.len() != scope.len()) {
                    ctx.err(Rule::TupleArity, "slide table tuple arity");
                }
            }
            if let Intension(e) = &**pattern {
                if let Some((op, n)) = e.arity_error() {
                    ctx.err(Rule::ExprArity, format!("{} applied to {n} arguments", op.name()));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Condition, CondOp, Domain, Expr, Op};

    fn base(n: usize) -> Instance {
        let mut inst = Instance::new();
        for i in 0..n {
            inst.add_var(format!("x[{i}]"), Domain::range(0, 3));
        }
        inst
    }

    #[test]
    fn sum_arity_mismatch() {
        let mut inst = base(3);
        inst.post(ConstraintKind::Sum { scope: vec![0, 1, 2], coeffs: vec![1, 1], condition: Condition::value(CondOp::Le, 3) });
        let errs = validate_instance(&inst);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].rule, Rule::ArityMismatch);
        assert_eq!(errs[0].constraint, Some(0));
    }

    #[test]
    fn tuple_arity() {
        let mut inst = base(2);
        inst.post(ConstraintKind::Extension { scope: vec![0, 1], tuples: vec![vec![crate::model::Cell::Val(1)]], positive: true });
        let errs = validate_instance(&inst);
        assert_eq!(errs.iter().map(|e| e.rule).collect::<Vec<_>>(), vec![Rule::TupleArity]);
    }

    #[test]
    fn unknown_variable_and_bad_expr() {
        let mut inst = base(1);
        inst.post(ConstraintKind::Intension(Expr::binary(Op::Eq, Expr::Var(0), Expr::Var(7))));
        inst.post(ConstraintKind::Intension(Expr::apply(Op::Eq, vec![Expr::Var(0)])));
        let rules: Vec<Rule> = validate_instance(&inst).iter().map(|e| e.rule).collect();
        assert_eq!(rules, vec![Rule::UnknownVariable, Rule::ExprArity]);
    }

    #[test]
    fn duplicate_in_alldifferent_is_a_warning() {
        let mut inst = base(2);
        inst.post(ConstraintKind::AllDifferent { scope: vec![0, 1, 0], except: vec![] });
        let issues = validate_instance(&inst);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Warning);
        assert!(validation_errors(&inst).is_empty());
    }

    #[test]
    fn names_and_layout() {
        assert_eq!(split_array_name("x[3][12]"), Some(("x", vec![3, 12])));
        assert_eq!(split_array_name("abc"), Some(("abc", vec![])));
        assert_eq!(split_array_name("3x"), None);
        assert_eq!(split_array_name("x[a]"), None);
        let mut inst = Instance::new();
        inst.add_var("x[0]", Domain::range(0, 1));
        inst.add_var("y", Domain::range(0, 1));
        inst.add_var("x[1]", Domain::range(0, 1));
        let rules: Vec<Rule> = validate_instance(&inst).iter().map(|e| e.rule).collect();
        assert_eq!(rules, vec![Rule::ArrayLayout]);
        let mut inst = Instance::new();
        inst.add_var("x[1]", Domain::range(0, 1));
        inst.add_var("x[0]", Domain::range(0, 1));
        inst.add_var("x", Domain::range(0, 1));
        let rules: Vec<Rule> = validate_instance(&inst).iter().map(|e| e.rule).collect();
        assert_eq!(rules, vec![Rule::ArrayLayout, Rule::ArrayLayout]);
    }

    #[test]
    fn condition_shape() {
        let mut inst = base(2);
        inst.post(ConstraintKind::Count {
            scope: vec![0, 1],
            values: vec![1],
            condition: Condition::new(CondOp::In, crate::model::Operand::Value(2)),
        });
        assert_eq!(validate_instance(&inst)[0].rule, Rule::InvalidCondition);
    }
}
