use std::borrow::Cow;
use std::fmt;

use thiserror::Error;

use super::{Values, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Neg,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Dist,
    Min,
    Max,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    And,
    Or,
    Xor,
    Iff,
    If,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl Op {
    pub const ALL: [Op; 22] = [
        Op::Neg,
        Op::Abs,
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Div,
        Op::Mod,
        Op::Dist,
        Op::Min,
        Op::Max,
        Op::Eq,
        Op::Ne,
        Op::Lt,
        Op::Le,
        Op::Gt,
        Op::Ge,
        Op::Not,
        Op::And,
        Op::Or,
        Op::Xor,
        Op::Iff,
        Op::If,
    ];

    /// Name used in the functional text syntax.
    pub fn name(self) -> &'static str {
        match self {
            Op::Neg => "neg",
            Op::Abs => "abs",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Mod => "mod",
            Op::Dist => "dist",
            Op::Min => "min",
            Op::Max => "max",
            Op::Eq => "eq",
            Op::Ne => "ne",
            Op::Lt => "lt",
            Op::Le => "le",
            Op::Gt => "gt",
            Op::Ge => "ge",
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Xor => "xor",
            Op::Iff => "iff",
            Op::If => "if",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.iter().copied().find(|op| op.name() == name)
    }

    pub fn arity(self) -> Arity {
        match self {
            Op::Neg | Op::Abs | Op::Not => Arity::Exactly(1),
            Op::Sub | Op::Div | Op::Mod | Op::Dist => Arity::Exactly(2),
            Op::Eq | Op::Ne | Op::Lt | Op::Le | Op::Gt | Op::Ge => Arity::Exactly(2),
            Op::If => Arity::Exactly(3),
            Op::Add | Op::Mul | Op::Min | Op::Max | Op::And | Op::Or | Op::Xor | Op::Iff => Arity::AtLeast(2),
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            Op::Eq | Op::Ne | Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Not | Op::And | Op::Or | Op::Xor | Op::Iff
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
}

/// Integer expression tree used by intension constraints and objectives.
///
/// Boolean-valued nodes produce 0 or 1; boolean operators read any nonzero
/// argument as true.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    Apply(Op, Vec<Expr>),
    /// Membership of the single child in a constant set; evaluates to 0/1.
    InSet(Box<Expr>, Vec<i64>),
}

fn b(v: bool) -> i64 {
    v as i64
}

impl Expr {
    pub fn var(v: VarId) -> Expr {
        Expr::Var(v)
    }

    pub fn apply(op: Op, args: Vec<Expr>) -> Expr {
        Expr::Apply(op, args)
    }

    pub fn binary(op: Op, a: Expr, b: Expr) -> Expr {
        Expr::Apply(op, vec![a, b])
    }

    pub fn unary(op: Op, a: Expr) -> Expr {
        Expr::Apply(op, vec![a])
    }

    /// Sum of terms, collapsing to the single term when there is only one.
    pub fn sum(mut terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::Const(0),
            1 => terms.pop().unwrap(),
            _ => Expr::Apply(Op::Add, terms),
        }
    }

    /// Disjunction, collapsing to the single term when there is only one.
    pub fn any(mut terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::Const(0),
            1 => terms.pop().unwrap(),
            _ => Expr::Apply(Op::Or, terms),
        }
    }

    pub fn in_set(e: Expr, mut set: Vec<i64>) -> Expr {
        set.sort_unstable();
        set.dedup();
        Expr::InSet(Box::new(e), set)
    }

    pub fn is_boolean(&self) -> bool {
        match self {
            Expr::Apply(op, _) => op.is_boolean(),
            Expr::InSet(..) => true,
            _ => false,
        }
    }

    /// Evaluates with checked 64-bit arithmetic; `div`/`mod` truncate toward zero.
    pub fn eval<V: Values + ?Sized>(&self, vals: &V) -> Result<i64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => Ok(vals.value(*v)),
            Expr::InSet(e, set) => {
                let x = e.eval(vals)?;
                Ok(b(set.contains(&x)))
            }
            Expr::Apply(op, args) => eval_apply(*op, args, vals),
        }
    }

    /// Calls `f` on every variable occurrence.
    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::InSet(e, _) => e.for_each_var(f),
            Expr::Apply(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    /// Distinct variables in ascending order.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.for_each_var(&mut |v| out.push(v));
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn map_vars(&self, f: &impl Fn(VarId) -> VarId) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => Expr::Var(f(*v)),
            Expr::InSet(e, set) => Expr::InSet(Box::new(e.map_vars(f)), set.clone()),
            Expr::Apply(op, args) => Expr::Apply(*op, args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    /// First arity violation found in the tree, if any.
    pub fn arity_error(&self) -> Option<(Op, usize)> {
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::InSet(e, _) => e.arity_error(),
            Expr::Apply(op, args) => {
                if !op.arity().accepts(args.len()) {
                    return Some((*op, args.len()));
                }
                args.iter().find_map(|a| a.arity_error())
            }
        }
    }

    /// Writes the functional syntax, naming variables through `name`.
    pub fn write_with<'n>(&self, out: &mut String, name: &dyn Fn(VarId) -> Cow<'n, str>) {
        match self {
            Expr::Const(c) => out.push_str(&c.to_string()),
            Expr::Var(v) => out.push_str(&name(*v)),
            Expr::InSet(e, set) => {
                out.push_str("in(");
                e.write_with(out, name);
                out.push_str(",set(");
                for (i, v) in set.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&v.to_string());
                }
                out.push_str("))");
            }
            Expr::Apply(op, args) => {
                out.push_str(op.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    a.write_with(out, name);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_with(&mut s, &|v| format!("v{v}").into());
        f.write_str(&s)
    }
}

fn eval_apply<V: Values + ?Sized>(op: Op, args: &[Expr], vals: &V) -> Result<i64, EvalError> {
    use EvalError::*;
    // `if` is lazy in its branches: only the selected branch is evaluated
    if op == Op::If {
        let c = args[0].eval(vals)?;
        return if c != 0 { args[1].eval(vals) } else { args[2].eval(vals) };
    }
    let mut xs = Vec::with_capacity(args.len());
    for a in args {
        xs.push(a.eval(vals)?);
    }
    let r = match op {
        Op::Neg => xs[0].checked_neg().ok_or(Overflow)?,
        Op::Abs => xs[0].checked_abs().ok_or(Overflow)?,
        Op::Add => xs.iter().try_fold(0i64, |acc, &x| acc.checked_add(x)).ok_or(Overflow)?,
        Op::Mul => xs.iter().try_fold(1i64, |acc, &x| acc.checked_mul(x)).ok_or(Overflow)?,
        Op::Sub => xs[0].checked_sub(xs[1]).ok_or(Overflow)?,
        Op::Div => {
            if xs[1] == 0 {
                return Err(DivisionByZero);
            }
            xs[0].checked_div(xs[1]).ok_or(Overflow)?
        }
        Op::Mod => {
            if xs[1] == 0 {
                return Err(DivisionByZero);
            }
            xs[0].checked_rem(xs[1]).ok_or(Overflow)?
        }
        Op::Dist => xs[0].checked_sub(xs[1]).and_then(i64::checked_abs).ok_or(Overflow)?,
        Op::Min => *xs.iter().min().unwrap(),
        Op::Max => *xs.iter().max().unwrap(),
        Op::Eq => b(xs[0] == xs[1]),
        Op::Ne => b(xs[0] != xs[1]),
        Op::Lt => b(xs[0] < xs[1]),
        Op::Le => b(xs[0] <= xs[1]),
        Op::Gt => b(xs[0] > xs[1]),
        Op::Ge => b(xs[0] >= xs[1]),
        Op::Not => b(xs[0] == 0),
        Op::And => b(xs.iter().all(|&x| x != 0)),
        Op::Or => b(xs.iter().any(|&x| x != 0)),
        Op::Xor => b(xs.iter().filter(|&&x| x != 0).count() % 2 == 1),
        Op::Iff => {
            let first = xs[0] != 0;
            b(xs.iter().all(|&x| (x != 0) == first))
        }
        Op::If => unreachable!(),
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(v: i64) -> Expr {
        Expr::Const(v)
    }
    fn x(v: VarId) -> Expr {
        Expr::Var(v)
    }

    #[test]
    fn examples() {
        let vals: Vec<i64> = vec![1, 2, 3];
        assert_eq!(Expr::binary(Op::Add, c(2), c(3)).eval(&vals[..]), Ok(5));
        let e = Expr::binary(Op::Eq, Expr::binary(Op::Add, x(0), x(1)), x(2));
        assert_eq!(e.eval(&vals[..]), Ok(1));
        let d: Vec<i64> = vec![7, 10];
        assert_eq!(Expr::binary(Op::Dist, x(0), x(1)).eval(&d[..]), Ok(3));
    }

    #[test]
    fn truncating_division() {
        let vals: [i64; 0] = [];
        assert_eq!(Expr::binary(Op::Div, c(-7), c(2)).eval(&vals[..]), Ok(-3));
        assert_eq!(Expr::binary(Op::Mod, c(-7), c(2)).eval(&vals[..]), Ok(-1));
        assert_eq!(Expr::binary(Op::Mod, c(7), c(-2)).eval(&vals[..]), Ok(1));
        assert_eq!(Expr::binary(Op::Div, c(1), c(0)).eval(&vals[..]), Err(EvalError::DivisionByZero));
        assert_eq!(Expr::binary(Op::Mod, c(1), c(0)).eval(&vals[..]), Err(EvalError::DivisionByZero));
        assert_eq!(Expr::binary(Op::Div, c(i64::MIN), c(-1)).eval(&vals[..]), Err(EvalError::Overflow));
    }

    #[test]
    fn overflow_is_detected() {
        let vals: [i64; 0] = [];
        assert_eq!(Expr::binary(Op::Mul, c(i64::MAX), c(2)).eval(&vals[..]), Err(EvalError::Overflow));
        assert_eq!(Expr::unary(Op::Abs, c(i64::MIN)).eval(&vals[..]), Err(EvalError::Overflow));
        assert_eq!(Expr::binary(Op::Dist, c(i64::MIN), c(1)).eval(&vals[..]), Err(EvalError::Overflow));
    }

    #[test]
    fn if_only_evaluates_selected_branch() {
        let vals: [i64; 0] = [];
        let e = Expr::apply(Op::If, vec![c(1), c(4), Expr::binary(Op::Div, c(1), c(0))]);
        assert_eq!(e.eval(&vals[..]), Ok(4));
    }

    #[test]
    fn nary_logic() {
        let vals: [i64; 0] = [];
        assert_eq!(Expr::apply(Op::Xor, vec![c(1), c(1), c(1)]).eval(&vals[..]), Ok(1));
        assert_eq!(Expr::apply(Op::Iff, vec![c(0), c(0), c(0)]).eval(&vals[..]), Ok(1));
        assert_eq!(Expr::apply(Op::Iff, vec![c(0), c(2)]).eval(&vals[..]), Ok(0));
        assert_eq!(Expr::in_set(c(3), vec![5, 3, 1]).eval(&vals[..]), Ok(1));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(-5i64..5).prop_map(Expr::Const), (0usize..3).prop_map(Expr::Var)];
        leaf.prop_recursive(4, 24, 3, |inner| {
            (proptest::sample::select(Op::ALL.to_vec()), proptest::collection::vec(inner, 1..4)).prop_map(
                |(op, mut args)| {
                    let n = match op.arity() {
                        Arity::Exactly(k) => k,
                        Arity::AtLeast(k) => args.len().max(k),
                    };
                    while args.len() < n {
                        args.push(Expr::Const(1));
                    }
                    args.truncate(n);
                    Expr::Apply(op, args)
                },
            )
        })
    }

    proptest! {
        #[test]
        fn boolean_roots_yield_zero_or_one(e in arb_expr(), vals in proptest::collection::vec(-4i64..5, 3)) {
            let r1 = e.eval(&vals[..]);
            prop_assert_eq!(r1, e.eval(&vals[..]));
            if e.is_boolean() {
                if let Ok(v) = r1 {
                    prop_assert!(v == 0 || v == 1);
                }
            }
        }
    }
}
