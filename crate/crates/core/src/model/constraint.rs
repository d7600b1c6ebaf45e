use super::{Expr, Op, Values, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CondOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    In,
    NotIn,
}

impl CondOp {
    pub const ALL: [CondOp; 8] =
        [CondOp::Lt, CondOp::Le, CondOp::Gt, CondOp::Ge, CondOp::Eq, CondOp::Ne, CondOp::In, CondOp::NotIn];

    pub fn name(self) -> &'static str {
        match self {
            CondOp::Lt => "lt",
            CondOp::Le => "le",
            CondOp::Gt => "gt",
            CondOp::Ge => "ge",
            CondOp::Eq => "eq",
            CondOp::Ne => "ne",
            CondOp::In => "in",
            CondOp::NotIn => "notin",
        }
    }

    pub fn from_name(s: &str) -> Option<CondOp> {
        CondOp::ALL.iter().copied().find(|op| op.name() == s)
    }

    pub fn is_set_op(self) -> bool {
        matches!(self, CondOp::In | CondOp::NotIn)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Value(i64),
    Var(VarId),
    Interval(i64, i64),
    /// Sorted, deduplicated.
    Set(Vec<i64>),
}

/// Right-hand side comparison attached to sum, count, nValues, extrema,
/// element, cumulative and binPacking.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Condition {
    pub op: CondOp,
    pub rhs: Operand,
}

impl Condition {
    pub fn new(op: CondOp, rhs: Operand) -> Self {
        let rhs = match rhs {
            Operand::Set(mut s) => {
                s.sort_unstable();
                s.dedup();
                Operand::Set(s)
            }
            other => other,
        };
        Condition { op, rhs }
    }

    pub fn value(op: CondOp, v: i64) -> Self {
        Condition { op, rhs: Operand::Value(v) }
    }

    pub fn var(op: CondOp, v: VarId) -> Self {
        Condition { op, rhs: Operand::Var(v) }
    }

    /// Whether the operator and operand kinds are compatible.
    pub fn is_well_formed(&self) -> bool {
        match (&self.rhs, self.op.is_set_op()) {
            (Operand::Value(_) | Operand::Var(_), false) => true,
            (Operand::Interval(..) | Operand::Set(_), true) => true,
            _ => false,
        }
    }

    pub fn rhs_var(&self) -> Option<VarId> {
        match self.rhs {
            Operand::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn holds<V: Values + ?Sized>(&self, lhs: i64, vals: &V) -> bool {
        self.holds_i128(lhs as i128, vals)
    }

    /// Same as [`Condition::holds`] for sums that may exceed 64 bits.
    pub fn holds_i128<V: Values + ?Sized>(&self, lhs: i128, vals: &V) -> bool {
        let scalar = |r: &Operand| -> i128 {
            match *r {
                Operand::Value(v) => v as i128,
                Operand::Var(v) => vals.value(v) as i128,
                _ => unreachable!("set operand with relational operator"),
            }
        };
        let member = |r: &Operand| -> bool {
            match r {
                Operand::Interval(lo, hi) => (*lo as i128) <= lhs && lhs <= (*hi as i128),
                Operand::Set(s) => i64::try_from(lhs).map(|l| s.binary_search(&l).is_ok()).unwrap_or(false),
                _ => unreachable!("scalar operand with set operator"),
            }
        };
        match self.op {
            CondOp::Lt => lhs < scalar(&self.rhs),
            CondOp::Le => lhs <= scalar(&self.rhs),
            CondOp::Gt => lhs > scalar(&self.rhs),
            CondOp::Ge => lhs >= scalar(&self.rhs),
            CondOp::Eq => lhs == scalar(&self.rhs),
            CondOp::Ne => lhs != scalar(&self.rhs),
            CondOp::In => member(&self.rhs),
            CondOp::NotIn => !member(&self.rhs),
        }
    }

    /// Expression equivalent to `lhs <op> rhs`.
    pub fn to_expr(&self, lhs: Expr) -> Expr {
        let scalar = |r: &Operand| match *r {
            Operand::Value(v) => Expr::Const(v),
            Operand::Var(v) => Expr::Var(v),
            _ => unreachable!(),
        };
        let member = |lhs: Expr, r: &Operand| match r {
            Operand::Interval(lo, hi) => Expr::apply(
                Op::And,
                vec![Expr::binary(Op::Ge, lhs.clone(), Expr::Const(*lo)), Expr::binary(Op::Le, lhs, Expr::Const(*hi))],
            ),
            Operand::Set(s) => Expr::in_set(lhs, s.clone()),
            _ => unreachable!(),
        };
        let rel = |op: Op| Expr::binary(op, lhs.clone(), scalar(&self.rhs));
        match self.op {
            CondOp::Lt => rel(Op::Lt),
            CondOp::Le => rel(Op::Le),
            CondOp::Gt => rel(Op::Gt),
            CondOp::Ge => rel(Op::Ge),
            CondOp::Eq => rel(Op::Eq),
            CondOp::Ne => rel(Op::Ne),
            CondOp::In => member(lhs, &self.rhs),
            CondOp::NotIn => Expr::unary(Op::Not, member(lhs, &self.rhs)),
        }
    }

    /// Truth value for a constant left-hand side when the right-hand side
    /// does not mention a variable.
    pub fn holds_const(&self, lhs: i64) -> Option<bool> {
        if self.rhs_var().is_some() {
            return None;
        }
        let none: [i64; 0] = [];
        Some(self.holds(lhs, &none[..]))
    }

    pub fn map_vars(&self, f: &impl Fn(VarId) -> VarId) -> Condition {
        let rhs = match &self.rhs {
            Operand::Var(v) => Operand::Var(f(*v)),
            other => other.clone(),
        };
        Condition { op: self.op, rhs }
    }
}

/// Relation used by ordered and lex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl OrderOp {
    pub fn name(self) -> &'static str {
        match self {
            OrderOp::Lt => "lt",
            OrderOp::Le => "le",
            OrderOp::Gt => "gt",
            OrderOp::Ge => "ge",
        }
    }

    pub fn from_name(s: &str) -> Option<OrderOp> {
        [OrderOp::Lt, OrderOp::Le, OrderOp::Gt, OrderOp::Ge].into_iter().find(|o| o.name() == s)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, OrderOp::Lt | OrderOp::Gt)
    }

    pub fn is_increasing(self) -> bool {
        matches!(self, OrderOp::Lt | OrderOp::Le)
    }

    pub fn compare(self, a: i64, b: i64) -> bool {
        match self {
            OrderOp::Lt => a < b,
            OrderOp::Le => a <= b,
            OrderOp::Gt => a > b,
            OrderOp::Ge => a >= b,
        }
    }
}

/// One cell of a table tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    /// Wildcard matching any value.
    Star,
    Val(i64),
}

impl Cell {
    pub fn matches(self, v: i64) -> bool {
        match self {
            Cell::Star => true,
            Cell::Val(x) => x == v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: String,
    pub value: i64,
    pub to: String,
}

impl Transition {
    pub fn new(from: impl Into<String>, value: i64, to: impl Into<String>) -> Self {
        Transition { from: from.into(), value, to: to.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automaton {
    pub start: String,
    pub finals: Vec<String>,
    pub transitions: Vec<Transition>,
}

/// Required occurrence count of one value in a cardinality constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Occurs {
    Value(i64),
    Interval(i64, i64),
    Var(VarId),
}

impl Occurs {
    pub fn to_condition(&self) -> Condition {
        match *self {
            Occurs::Value(k) => Condition::value(CondOp::Eq, k),
            Occurs::Interval(lo, hi) => Condition::new(CondOp::In, Operand::Interval(lo, hi)),
            Occurs::Var(v) => Condition::var(CondOp::Eq, v),
        }
    }
}

/// Every constraint form supported by the toolkit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Intension(Expr),
    Extension { scope: Vec<VarId>, tuples: Vec<Vec<Cell>>, positive: bool },
    Regular { scope: Vec<VarId>, automaton: Automaton },
    /// Layered diagram: the root is the only node without incoming arcs,
    /// terminals are nodes without outgoing arcs.
    Mdd { scope: Vec<VarId>, transitions: Vec<Transition> },
    AllDifferent { scope: Vec<VarId>, except: Vec<i64> },
    AllDifferentMatrix { matrix: Vec<Vec<VarId>> },
    AllDifferentList { lists: Vec<Vec<VarId>> },
    AllEqual { scope: Vec<VarId> },
    /// `x[i] + lengths[i] <op> x[i+1]`, lengths default to 0.
    Ordered { scope: Vec<VarId>, op: OrderOp, lengths: Option<Vec<i64>> },
    Lex { lists: Vec<Vec<VarId>>, op: OrderOp },
    Precedence { scope: Vec<VarId>, values: Vec<i64> },
    Sum { scope: Vec<VarId>, coeffs: Vec<i64>, condition: Condition },
    Count { scope: Vec<VarId>, values: Vec<i64>, condition: Condition },
    NValues { scope: Vec<VarId>, condition: Condition },
    Cardinality { scope: Vec<VarId>, values: Vec<i64>, occurs: Vec<Occurs> },
    Maximum { scope: Vec<VarId>, condition: Condition },
    Minimum { scope: Vec<VarId>, condition: Condition },
    /// `list[index] <condition>` with a 0-based index.
    Element { list: Vec<VarId>, index: VarId, condition: Condition },
    Channel { list: Vec<VarId>, other: Option<Vec<VarId>> },
    /// Each task has one origin and one length per dimension.
    NoOverlap { origins: Vec<Vec<VarId>>, lengths: Vec<Vec<i64>> },
    Cumulative { origins: Vec<VarId>, lengths: Vec<i64>, heights: Vec<i64>, condition: Condition },
    BinPacking { scope: Vec<VarId>, sizes: Vec<i64>, condition: Condition },
    Knapsack {
        scope: Vec<VarId>,
        weights: Vec<i64>,
        profits: Vec<i64>,
        weight_condition: Condition,
        profit_condition: Condition,
    },
    /// Successor representation; `x[i] == i` leaves node i out of the cycle.
    Circuit { scope: Vec<VarId> },
    Instantiation { scope: Vec<VarId>, values: Vec<i64> },
    /// `pattern` is stated over window positions `0..arity` and is applied
    /// to every window `scope[w..w + arity]`, `w` stepping by `offset`.
    Slide { scope: Vec<VarId>, arity: usize, offset: usize, pattern: Box<ConstraintKind> },
}

impl ConstraintKind {
    /// Element name in the instance format.
    pub fn name(&self) -> &'static str {
        use ConstraintKind::*;
        match self {
            Intension(_) => "intension",
            Extension { .. } => "extension",
            Regular { .. } => "regular",
            Mdd { .. } => "mdd",
            AllDifferent { .. } | AllDifferentMatrix { .. } | AllDifferentList { .. } => "allDifferent",
            AllEqual { .. } => "allEqual",
            Ordered { .. } => "ordered",
            Lex { .. } => "lex",
            Precedence { .. } => "precedence",
            Sum { .. } => "sum",
            Count { .. } => "count",
            NValues { .. } => "nValues",
            Cardinality { .. } => "cardinality",
            Maximum { .. } => "maximum",
            Minimum { .. } => "minimum",
            Element { .. } => "element",
            Channel { .. } => "channel",
            NoOverlap { .. } => "noOverlap",
            Cumulative { .. } => "cumulative",
            BinPacking { .. } => "binPacking",
            Knapsack { .. } => "knapsack",
            Circuit { .. } => "circuit",
            Instantiation { .. } => "instantiation",
            Slide { .. } => "slide",
        }
    }

    /// Whether a positive or negative table uses at least one wildcard.
    pub fn is_starred(&self) -> bool {
        match self {
            ConstraintKind::Extension { tuples, .. } => tuples.iter().flatten().any(|c| *c == Cell::Star),
            _ => false,
        }
    }

    /// Every variable occurrence in payload order (duplicates kept).
    pub fn var_occurrences(&self) -> Vec<VarId> {
        use ConstraintKind::*;
        let mut out: Vec<VarId> = Vec::new();
        let cond = |c: &Condition, out: &mut Vec<VarId>| out.extend(c.rhs_var());
        match self {
            Intension(e) => e.for_each_var(&mut |v| out.push(v)),
            Extension { scope, .. }
            | Regular { scope, .. }
            | Mdd { scope, .. }
            | AllDifferent { scope, .. }
            | AllEqual { scope }
            | Ordered { scope, .. }
            | Precedence { scope, .. }
            | Circuit { scope }
            | Instantiation { scope, .. } => out.extend(scope),
            AllDifferentMatrix { matrix: lists } | AllDifferentList { lists } | Lex { lists, .. } => {
                lists.iter().for_each(|l| out.extend(l))
            }
            Sum { scope, condition, .. }
            | Count { scope, condition, .. }
            | NValues { scope, condition }
            | Maximum { scope, condition }
            | Minimum { scope, condition }
            | BinPacking { scope, condition, .. } => {
                out.extend(scope);
                cond(condition, &mut out);
            }
            Cardinality { scope, occurs, .. } => {
                out.extend(scope);
                out.extend(occurs.iter().filter_map(|o| match o {
                    Occurs::Var(v) => Some(*v),
                    _ => None,
                }));
            }
            Element { list, index, condition } => {
                out.extend(list);
                out.push(*index);
                cond(condition, &mut out);
            }
            Channel { list, other } => {
                out.extend(list);
                if let Some(o) = other {
                    out.extend(o);
                }
            }
            NoOverlap { origins, .. } => origins.iter().for_each(|o| out.extend(o)),
            Cumulative { origins, condition, .. } => {
                out.extend(origins);
                cond(condition, &mut out);
            }
            Knapsack { scope, weight_condition, profit_condition, .. } => {
                out.extend(scope);
                cond(weight_condition, &mut out);
                cond(profit_condition, &mut out);
            }
            Slide { scope, .. } => out.extend(scope),
        }
        out
    }

    /// Distinct variables of the constraint in ascending order.
    pub fn scope(&self) -> Vec<VarId> {
        let mut s = self.var_occurrences();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Renames every variable through `f`.
    pub fn map_vars(&self, f: &impl Fn(VarId) -> VarId) -> ConstraintKind {
        use ConstraintKind::*;
        let m = |s: &[VarId]| s.iter().map(|&v| f(v)).collect::<Vec<_>>();
        let ml = |ls: &[Vec<VarId>]| ls.iter().map(|l| m(l)).collect::<Vec<_>>();
        match self {
            Intension(e) => Intension(e.map_vars(f)),
            Extension { scope, tuples, positive } => {
                Extension { scope: m(scope), tuples: tuples.clone(), positive: *positive }
            }
            Regular { scope, automaton } => Regular { scope: m(scope), automaton: automaton.clone() },
            Mdd { scope, transitions } => Mdd { scope: m(scope), transitions: transitions.clone() },
            AllDifferent { scope, except } => AllDifferent { scope: m(scope), except: except.clone() },
            AllDifferentMatrix { matrix } => AllDifferentMatrix { matrix: ml(matrix) },
            AllDifferentList { lists } => AllDifferentList { lists: ml(lists) },
            AllEqual { scope } => AllEqual { scope: m(scope) },
            Ordered { scope, op, lengths } => Ordered { scope: m(scope), op: *op, lengths: lengths.clone() },
            Lex { lists, op } => Lex { lists: ml(lists), op: *op },
            Precedence { scope, values } => Precedence { scope: m(scope), values: values.clone() },
            Sum { scope, coeffs, condition } => {
                Sum { scope: m(scope), coeffs: coeffs.clone(), condition: condition.map_vars(f) }
            }
            Count { scope, values, condition } => {
                Count { scope: m(scope), values: values.clone(), condition: condition.map_vars(f) }
            }
            NValues { scope, condition } => NValues { scope: m(scope), condition: condition.map_vars(f) },
            Cardinality { scope, values, occurs } => Cardinality {
                scope: m(scope),
                values: values.clone(),
                occurs: occurs
                    .iter()
                    .map(|o| match o {
                        Occurs::Var(v) => Occurs::Var(f(*v)),
                        other => other.clone(),
                    })
                    .collect(),
            },
            Maximum { scope, condition } => Maximum { scope: m(scope), condition: condition.map_vars(f) },
            Minimum { scope, condition } => Minimum { scope: m(scope), condition: condition.map_vars(f) },
            Element { list, index, condition } => {
                Element { list: m(list), index: f(*index), condition: condition.map_vars(f) }
            }
            Channel { list, other } => Channel { list: m(list), other: other.as_ref().map(|o| m(o)) },
            NoOverlap { origins, lengths } => NoOverlap { origins: ml(origins), lengths: lengths.clone() },
            Cumulative { origins, lengths, heights, condition } => Cumulative {
                origins: m(origins),
                lengths: lengths.clone(),
                heights: heights.clone(),
                condition: condition.map_vars(f),
            },
            BinPacking { scope, sizes, condition } => {
                BinPacking { scope: m(scope), sizes: sizes.clone(), condition: condition.map_vars(f) }
            }
            Knapsack { scope, weights, profits, weight_condition, profit_condition } => Knapsack {
                scope: m(scope),
                weights: weights.clone(),
                profits: profits.clone(),
                weight_condition: weight_condition.map_vars(f),
                profit_condition: profit_condition.map_vars(f),
            },
            Circuit { scope } => Circuit { scope: m(scope) },
            Instantiation { scope, values } => Instantiation { scope: m(scope), values: values.clone() },
            Slide { scope, arity, offset, pattern } => {
                Slide { scope: m(scope), arity: *arity, offset: *offset, pattern: pattern.clone() }
            }
        }
    }

    /// The window instances of a slide constraint (linear, not circular).
    pub fn slide_windows(&self) -> Vec<ConstraintKind> {
        match self {
            ConstraintKind::Slide { scope, arity, offset, pattern } => {
                let mut out = Vec::new();
                if *arity == 0 || *offset == 0 {
                    return out;
                }
                let mut w = 0;
                while w + arity <= scope.len() {
                    let window = &scope[w..w + arity];
                    out.push(pattern.map_vars(&|local| window[local]));
                    w += offset;
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_semantics() {
        let none: [i64; 0] = [];
        assert!(Condition::value(CondOp::Le, 100).holds(100, &none[..]));
        assert!(!Condition::value(CondOp::Lt, 100).holds(100, &none[..]));
        let vals = [7i64];
        assert!(Condition::var(CondOp::Eq, 0).holds(7, &vals[..]));
        let c = Condition::new(CondOp::In, Operand::Set(vec![5, 1, 3, 3]));
        assert_eq!(c.rhs, Operand::Set(vec![1, 3, 5]));
        assert!(c.holds(3, &none[..]));
        assert!(!c.holds(2, &none[..]));
        let c = Condition::new(CondOp::NotIn, Operand::Interval(1, 3));
        assert!(c.holds(0, &none[..]));
        assert!(!c.holds(2, &none[..]));
        assert!(!Condition::new(CondOp::In, Operand::Value(3)).is_well_formed());
        assert!(!Condition::new(CondOp::Le, Operand::Set(vec![])).is_well_formed());
    }

    #[test]
    fn condition_expr_agrees_with_holds() {
        let conds = [
            Condition::value(CondOp::Ge, 2),
            Condition::var(CondOp::Ne, 1),
            Condition::new(CondOp::In, Operand::Interval(-1, 2)),
            Condition::new(CondOp::NotIn, Operand::Set(vec![0, 3])),
        ];
        for c in &conds {
            for lhs in -3..5 {
                for r in -3..5 {
                    let vals = [lhs, r];
                    let e = c.to_expr(Expr::Var(0));
                    assert_eq!(e.eval(&vals[..]).unwrap() == 1, c.holds(lhs, &vals[..]), "{c:?} {lhs} {r}");
                }
            }
        }
    }

    #[test]
    fn slide_windows_step_by_offset() {
        let pattern = ConstraintKind::Intension(Expr::binary(Op::Lt, Expr::Var(0), Expr::Var(1)));
        let k = ConstraintKind::Slide { scope: vec![10, 11, 12, 13, 14], arity: 2, offset: 2, pattern: Box::new(pattern) };
        let w = k.slide_windows();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].scope(), vec![12, 13]);
    }
}
