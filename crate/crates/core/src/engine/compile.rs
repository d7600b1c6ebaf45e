//! Translation of instance constraints into propagators, with
//! decompositions for kinds that have no dedicated filter.

use std::collections::BTreeSet;

use super::dom::Dom;
use super::propagate::{PropEntry, Propagator, Strength};
use super::props::automaton::Layered;
use super::props::count::Extremum;
use super::props::intension::{ForwardCheck, Sweep, SWEEP_LIMIT};
use super::props::linear::{Linear, SumFilter, SCAN_LIMIT};
use super::props::order::{LexLe, VectorsDiffer};
use super::props::sched::{Subtour, TimeTable};
use super::props::table::{NegativeTable, PositiveTable};
use super::props::{alldiff, count, order};
use super::store::{DomainStore, Empty};
use crate::checker::mdd_root;
use crate::model::{
    CondOp, Condition, ConstraintKind, Domain, Expr, Instance, ObjectiveBody, Op, Operand, OrderOp, Sense, VarId,
};

/// Variables of an instance plus auxiliaries introduced while compiling.
#[derive(Clone, Debug, Default)]
pub struct VarPool {
    pub domains: Vec<Domain>,
}

impl VarPool {
    pub fn from_instance(inst: &Instance) -> Self {
        VarPool { domains: inst.variables.iter().map(|v| v.domain.clone()).collect() }
    }

    pub fn new_var(&mut self, d: Domain) -> VarId {
        self.domains.push(d);
        self.domains.len() - 1
    }

    pub fn domain(&self, v: VarId) -> &Domain {
        &self.domains[v]
    }

    fn product(&self, vars: &[VarId]) -> u64 {
        vars.iter().fold(1u64, |acc, &v| acc.saturating_mul(self.domains[v].size()))
    }
}

fn ne(a: Expr, b: Expr) -> Expr {
    Expr::binary(Op::Ne, a, b)
}

fn eq(a: Expr, b: Expr) -> Expr {
    Expr::binary(Op::Eq, a, b)
}

fn le(a: Expr, b: Expr) -> Expr {
    Expr::binary(Op::Le, a, b)
}

fn plus(v: VarId, c: i64) -> Expr {
    if c == 0 {
        Expr::Var(v)
    } else {
        Expr::binary(Op::Add, Expr::Var(v), Expr::Const(c))
    }
}

fn in_range(v: VarId, lo: i64, hi: i64) -> ConstraintKind {
    ConstraintKind::Sum { scope: vec![v], coeffs: vec![1], condition: Condition::new(CondOp::In, Operand::Interval(lo, hi)) }
}

/// Rewrites a kind without a dedicated propagator into primitive
/// constraints, creating auxiliary variables in `pool` when needed.
/// Returns `None` for kinds that are propagated directly.
pub fn decompose(k: &ConstraintKind, pool: &mut VarPool) -> Option<Vec<ConstraintKind>> {
    use ConstraintKind::*;
    let out = match k {
        AllDifferentMatrix { matrix } => {
            let cols = matrix.first().map_or(0, Vec::len);
            let mut out: Vec<ConstraintKind> =
                matrix.iter().map(|r| AllDifferent { scope: r.clone(), except: vec![] }).collect();
            for j in 0..cols {
                out.push(AllDifferent { scope: matrix.iter().map(|r| r[j]).collect(), except: vec![] });
            }
            out
        }
        AllDifferentList { lists } => {
            let mut out = Vec::new();
            for i in 0..lists.len() {
                for j in i + 1..lists.len() {
                    out.push(Intension(vectors_differ(&lists[i], &lists[j])));
                }
            }
            out
        }
        NoOverlap { origins, lengths } => {
            let mut out = Vec::new();
            for i in 0..origins.len() {
                for j in i + 1..origins.len() {
                    if lengths[i].iter().chain(&lengths[j]).any(|&l| l == 0) {
                        continue;
                    }
                    let mut sides = Vec::new();
                    for d in 0..origins[i].len() {
                        let (oi, oj) = (origins[i][d], origins[j][d]);
                        sides.push(le(plus(oi, lengths[i][d]), Expr::Var(oj)));
                        sides.push(le(plus(oj, lengths[j][d]), Expr::Var(oi)));
                    }
                    out.push(Intension(Expr::any(sides)));
                }
            }
            out
        }
        Knapsack { scope, weights, profits, weight_condition, profit_condition } => vec![
            Sum { scope: scope.clone(), coeffs: weights.clone(), condition: weight_condition.clone() },
            Sum { scope: scope.clone(), coeffs: profits.clone(), condition: profit_condition.clone() },
        ],
        Cardinality { scope, values, occurs } => values
            .iter()
            .zip(occurs)
            .map(|(&v, o)| Count { scope: scope.clone(), values: vec![v], condition: o.to_condition() })
            .collect(),
        Slide { .. } => k.slide_windows(),
        Channel { list, other } => {
            let mut out = Vec::new();
            let link = |from: &[VarId], to: &[VarId], pool: &VarPool, out: &mut Vec<ConstraintKind>| {
                for (i, &x) in from.iter().enumerate() {
                    out.push(in_range(x, 0, to.len() as i64 - 1));
                    for (j, &y) in to.iter().enumerate() {
                        if pool.domain(x).contains(j as i64) {
                            out.push(Intension(Expr::any(vec![
                                ne(Expr::Var(x), Expr::Const(j as i64)),
                                eq(Expr::Var(y), Expr::Const(i as i64)),
                            ])));
                        }
                    }
                }
            };
            match other {
                None => link(list, list, pool, &mut out),
                Some(o) => {
                    link(list, o, pool, &mut out);
                    if list.len() == o.len() {
                        link(o, list, pool, &mut out);
                    }
                }
            }
            out
        }
        BinPacking { scope, sizes, condition } => bin_packing(scope, sizes, condition, pool),
        _ => return None,
    };
    Some(out)
}

fn vectors_differ(a: &[VarId], b: &[VarId]) -> Expr {
    Expr::any(a.iter().zip(b).map(|(&x, &y)| ne(Expr::Var(x), Expr::Var(y))).collect())
}

/// Per-bin load sums over channeling booleans `yᵢ ⇔ (xᵢ = b)`.
fn bin_packing(scope: &[VarId], sizes: &[i64], condition: &Condition, pool: &mut VarPool) -> Vec<ConstraintKind> {
    let bins: BTreeSet<i64> = scope.iter().flat_map(|&v| pool.domain(v).iter().collect::<Vec<_>>()).collect();
    let mut out = Vec::new();
    let empty_ok = condition.holds_const(0) == Some(true);
    for b in bins {
        let mut ys = Vec::new();
        let mut ws = Vec::new();
        for (&x, &s) in scope.iter().zip(sizes) {
            if !pool.domain(x).contains(b) {
                continue;
            }
            let y = pool.new_var(Domain::boolean());
            out.push(ConstraintKind::Intension(eq(Expr::Var(y), eq(Expr::Var(x), Expr::Const(b)))));
            ys.push(y);
            ws.push(s);
        }
        if empty_ok {
            out.push(ConstraintKind::Sum { scope: ys, coeffs: ws, condition: condition.clone() });
            continue;
        }
        let lo: i64 = ws.iter().filter(|&&w| w < 0).sum();
        let hi: i64 = ws.iter().filter(|&&w| w > 0).sum();
        let load = pool.new_var(Domain::range(lo, hi));
        let mut scope2 = ys.clone();
        scope2.push(load);
        let mut coeffs = ws;
        coeffs.push(-1);
        out.push(ConstraintKind::Sum { scope: scope2, coeffs, condition: Condition::value(CondOp::Eq, 0) });
        let unused = Expr::unary(Op::Not, Expr::any(ys.iter().map(|&y| Expr::Var(y)).collect()));
        out.push(ConstraintKind::Intension(Expr::any(vec![unused, condition.to_expr(Expr::Var(load))])));
    }
    out
}

/// Propagator that only relies on the final check.
struct CheckOnly;

impl Propagator for CheckOnly {
    fn propagate(&mut self, _: &mut DomainStore) -> Result<(), Empty> {
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::CheckOnly
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// Linear form `Σ cᵢ·xᵢ + k`; `leaf` may replace a non-linear subterm by a
/// variable.
fn linear(e: &Expr, leaf: &mut dyn FnMut(&Expr) -> Option<VarId>) -> Option<(Vec<(i128, VarId)>, i128)> {
    match e {
        Expr::Const(c) => Some((vec![], *c as i128)),
        Expr::Var(v) => Some((vec![(1, *v)], 0)),
        Expr::Apply(Op::Add, args) => {
            let mut terms = Vec::new();
            let mut k = 0i128;
            for a in args {
                let (t, c) = linear(a, leaf)?;
                terms.extend(t);
                k += c;
            }
            Some((terms, k))
        }
        Expr::Apply(Op::Sub, args) if args.len() == 2 => {
            let (mut t, a) = linear(&args[0], leaf)?;
            let (u, b) = linear(&args[1], leaf)?;
            t.extend(u.into_iter().map(|(c, v)| (-c, v)));
            Some((t, a - b))
        }
        Expr::Apply(Op::Neg, args) if args.len() == 1 => {
            let (t, a) = linear(&args[0], leaf)?;
            Some((t.into_iter().map(|(c, v)| (-c, v)).collect(), -a))
        }
        Expr::Apply(Op::Mul, args) => {
            let mut acc: (Vec<(i128, VarId)>, i128) = (vec![], 1);
            let mut scaled = false;
            for a in args {
                let (t, c) = linear(a, leaf)?;
                if t.is_empty() {
                    acc = (acc.0.into_iter().map(|(x, v)| (x * c, v)).collect(), acc.1 * c);
                } else if !scaled && acc.0.is_empty() {
                    let f = acc.1;
                    acc = (t.into_iter().map(|(x, v)| (x * f, v)).collect(), c * f);
                    scaled = true;
                } else {
                    return leaf(e).map(|v| (vec![(1, v)], 0));
                }
                if acc.1.abs() > i64::MAX as i128 || acc.0.iter().any(|t| t.0.abs() > i64::MAX as i128) {
                    return None;
                }
            }
            Some(acc)
        }
        other => leaf(other).map(|v| (vec![(1, v)], 0)),
    }
}

/// `e` as `lhs <op> rhs`, where lhs and rhs are expressions.
fn comparison(e: &Expr) -> Option<(Expr, CondOp, Option<Expr>, Option<Vec<i64>>)> {
    let rel = |op: Op| match op {
        Op::Lt => Some(CondOp::Lt),
        Op::Le => Some(CondOp::Le),
        Op::Gt => Some(CondOp::Gt),
        Op::Ge => Some(CondOp::Ge),
        Op::Eq => Some(CondOp::Eq),
        Op::Ne => Some(CondOp::Ne),
        _ => None,
    };
    match e {
        Expr::Apply(op, args) if args.len() == 2 && rel(*op).is_some() => {
            Some((args[0].clone(), rel(*op).unwrap(), Some(args[1].clone()), None))
        }
        Expr::InSet(x, set) => Some(((**x).clone(), CondOp::In, None, Some(set.clone()))),
        Expr::Apply(Op::Not, args) if args.len() == 1 => {
            let (l, op, r, s) = comparison(&args[0])?;
            let neg = match op {
                CondOp::Lt => CondOp::Ge,
                CondOp::Le => CondOp::Gt,
                CondOp::Gt => CondOp::Le,
                CondOp::Ge => CondOp::Lt,
                CondOp::Eq => CondOp::Ne,
                CondOp::Ne => CondOp::Eq,
                CondOp::In => CondOp::NotIn,
                CondOp::NotIn => CondOp::In,
            };
            Some((l, neg, r, s))
        }
        _ => None,
    }
}

/// Values an expression can take over the pool's domains, when the
/// product of its domains is small enough to enumerate.
fn enumerate_values(e: &Expr, pool: &VarPool) -> Option<BTreeSet<i64>> {
    let vars = e.vars();
    if pool.product(&vars) > SWEEP_LIMIT {
        return None;
    }
    let doms: Vec<Vec<i64>> = vars.iter().map(|&v| pool.domain(v).iter().collect()).collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; vars.len()];
    let mut vals = vec![0i64; pool.domains.len()];
    loop {
        for (i, &v) in vars.iter().enumerate() {
            vals[v] = doms[i][idx[i]];
        }
        if let Ok(x) = e.eval(&vals) {
            out.insert(x);
        }
        let mut i = 0;
        while i < vars.len() {
            idx[i] += 1;
            if idx[i] < doms[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == vars.len() {
            return Some(out);
        }
    }
}

/// Conservative value range of an expression.
fn expr_bounds(e: &Expr, pool: &VarPool) -> (i128, i128) {
    let clamp = |(a, b): (i128, i128)| {
        let lim = 1i128 << 62;
        (a.clamp(-lim, lim), b.clamp(-lim, lim))
    };
    if let Some(vals) = enumerate_values(e, pool) {
        if let (Some(&a), Some(&b)) = (vals.first(), vals.last()) {
            return (a as i128, b as i128);
        }
    }
    let r = match e {
        Expr::Const(c) => (*c as i128, *c as i128),
        Expr::Var(v) => (pool.domain(*v).min() as i128, pool.domain(*v).max() as i128),
        Expr::InSet(..) => (0, 1),
        Expr::Apply(op, args) if op.is_boolean() => {
            let _ = args;
            (0, 1)
        }
        Expr::Apply(op, args) => {
            let b: Vec<(i128, i128)> = args.iter().map(|a| expr_bounds(a, pool)).collect();
            let mag = |x: (i128, i128)| x.0.abs().max(x.1.abs());
            match op {
                Op::Add => b.iter().fold((0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1)),
                Op::Sub => (b[0].0 - b[1].1, b[0].1 - b[1].0),
                Op::Neg => (-b[0].1, -b[0].0),
                Op::Abs => {
                    let m = mag(b[0]);
                    if b[0].0 >= 0 {
                        b[0]
                    } else if b[0].1 <= 0 {
                        (-b[0].1, -b[0].0)
                    } else {
                        (0, m)
                    }
                }
                Op::Dist => (0, mag((b[0].0 - b[1].1, b[0].1 - b[1].0))),
                Op::Mul => b.iter().fold((1, 1), |acc, x| {
                    let c = [acc.0 * x.0, acc.0 * x.1, acc.1 * x.0, acc.1 * x.1];
                    clamp((*c.iter().min().unwrap(), *c.iter().max().unwrap()))
                }),
                Op::Div => {
                    let m = mag(b[0]);
                    (-m, m)
                }
                Op::Mod => {
                    let m = mag(b[0]).min((mag(b[1]) - 1).max(0));
                    (-m, m)
                }
                Op::Min => (b.iter().map(|x| x.0).min().unwrap(), b.iter().map(|x| x.1).min().unwrap()),
                Op::Max => (b.iter().map(|x| x.0).max().unwrap(), b.iter().map(|x| x.1).max().unwrap()),
                Op::If => (b[1].0.min(b[2].0), b[1].1.max(b[2].1)),
                _ => (0, 1),
            }
        }
    };
    clamp(r)
}

fn i64_clamped(x: i128) -> i64 {
    x.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// The compiled form of an instance.
pub struct Compiled {
    pub doms: Vec<Dom>,
    pub entries: Vec<PropEntry>,
    pub num_original: usize,
    pub objective: Option<(VarId, Sense)>,
}

struct Builder {
    pool: VarPool,
    entries: Vec<PropEntry>,
}

impl Builder {
    fn add(&mut self, prop: impl Propagator + 'static, owner: Option<usize>, check: ConstraintKind) {
        self.entries.push(PropEntry::new(Box::new(prop), owner, check));
    }

    /// A variable standing for the left-hand side of `condition`; the
    /// condition itself is posted on it unless it is `eq` on a variable.
    fn condition_var(&mut self, condition: &Condition, lo: i64, hi: i64, owner: Option<usize>) -> VarId {
        if let (CondOp::Eq, Operand::Var(y)) = (condition.op, &condition.rhs) {
            return *y;
        }
        let d = Domain::range(lo, hi.max(lo));
        let v = self.pool.new_var(d);
        self.post(ConstraintKind::Sum { scope: vec![v], coeffs: vec![1], condition: condition.clone() }, owner);
        v
    }

    fn post_linear(&mut self, terms: Vec<(i128, VarId)>, k: i128, condition: &Condition, owner: Option<usize>, check: ConstraintKind) {
        // Constraint: Σ terms + k <op> rhs.
        let mut terms = terms;
        let mut shift = -k;
        match condition.rhs {
            Operand::Var(y) => terms.push((-1, y)),
            Operand::Value(c) => shift += c as i128,
            _ => {}
        }
        let Some(terms) = terms.into_iter().map(|(c, v)| i64::try_from(c).ok().map(|c| (c, v))).collect::<Option<Vec<_>>>() else {
            return self.add(CheckOnly, owner, check);
        };
        let shifted = |set: &[i64]| -> Vec<i64> {
            set.iter().filter_map(|&x| i64::try_from(x as i128 - k).ok()).collect()
        };
        let (lo, hi, filter) = match (condition.op, &condition.rhs) {
            (CondOp::Lt, _) => (None, Some(shift - 1), SumFilter::None),
            (CondOp::Le, _) => (None, Some(shift), SumFilter::None),
            (CondOp::Gt, _) => (Some(shift + 1), None, SumFilter::None),
            (CondOp::Ge, _) => (Some(shift), None, SumFilter::None),
            (CondOp::Eq, _) => (Some(shift), Some(shift), SumFilter::None),
            (CondOp::Ne, _) => (None, None, SumFilter::NotEq(shift)),
            (CondOp::In, Operand::Interval(a, b)) => (Some(*a as i128 - k), Some(*b as i128 - k), SumFilter::None),
            (CondOp::NotIn, Operand::Interval(a, b)) => (None, None, SumFilter::NotBetween(*a as i128 - k, *b as i128 - k)),
            (CondOp::In, Operand::Set(s)) => {
                let s = shifted(s);
                match (s.first(), s.last()) {
                    (Some(&a), Some(&b)) => (Some(a as i128), Some(b as i128), SumFilter::OnlyIn(s)),
                    _ => (Some(1), Some(0), SumFilter::None),
                }
            }
            (CondOp::NotIn, Operand::Set(s)) => (None, None, SumFilter::NotIn(shifted(s))),
            _ => return self.add(CheckOnly, owner, check),
        };
        self.add(Linear::new(terms, lo, hi, filter), owner, check);
    }

    fn post_intension(&mut self, e: &Expr, owner: Option<usize>) {
        let check = ConstraintKind::Intension(e.clone());
        let vars = e.vars();
        if let Expr::Apply(Op::Eq, args) = e {
            if args.len() == 2 {
                for (r, f) in [(&args[0], &args[1]), (&args[1], &args[0])] {
                    if let Expr::Var(r) = r {
                        let fv = f.vars();
                        if !fv.contains(r) && !fv.is_empty() && self.pool.product(&fv) <= SWEEP_LIMIT {
                            return self.add(Sweep::new(f, Some(*r)), owner, check);
                        }
                    }
                }
            }
        }
        if self.pool.product(&vars) <= SWEEP_LIMIT {
            return self.add(Sweep::new(e, None), owner, check);
        }
        if let Some((lhs, op, rhs, set)) = comparison(e) {
            let diff = match rhs {
                Some(r) => Expr::binary(Op::Sub, lhs.clone(), r),
                None => lhs.clone(),
            };
            let condition = match set {
                Some(s) => Condition::new(op, Operand::Set(s)),
                None => Condition::value(op, 0),
            };
            if let Some((terms, k)) = linear(&diff, &mut |_| None) {
                return self.post_linear(terms, k, &condition, owner, check);
            }
            // Flatten small non-linear subterms into functional auxiliaries.
            let pool = &self.pool;
            let small = linear(&diff, &mut |t| (pool.product(&t.vars()) <= SWEEP_LIMIT).then_some(0)).is_some();
            if small {
                let mut leaves: Vec<(VarId, Expr)> = Vec::new();
                let pool = &mut self.pool;
                let (terms, k) = linear(&diff, &mut |t| {
                    let vals = enumerate_values(t, pool)?;
                    let d = Domain::from_values(vals).ok()?;
                    let v = pool.new_var(d);
                    leaves.push((v, t.clone()));
                    Some(v)
                })
                .expect("flattening succeeded on the dry run");
                for (v, t) in leaves {
                    let fe = eq(Expr::Var(v), t.clone());
                    self.add(Sweep::new(&t, Some(v)), owner, ConstraintKind::Intension(fe));
                }
                return self.post_linear(terms, k, &condition, owner, check);
            }
        }
        self.add(ForwardCheck::new(e), owner, check);
    }

    fn post(&mut self, kind: ConstraintKind, owner: Option<usize>) {
        use ConstraintKind::*;
        if let Some(parts) = decompose(&kind, &mut self.pool) {
            if let AllDifferentList { lists } = &kind {
                let mut i = 0;
                for a in 0..lists.len() {
                    for b in a + 1..lists.len() {
                        if lists[a].len() == lists[b].len() {
                            self.add(VectorsDiffer::new(lists[a].clone(), lists[b].clone()), owner, parts[i].clone());
                        } else {
                            self.add(CheckOnly, owner, parts[i].clone());
                        }
                        i += 1;
                    }
                }
                return;
            }
            for p in parts {
                self.post(p, owner);
            }
            return;
        }
        match &kind {
            Intension(e) => self.post_intension(e, owner),
            Extension { scope, tuples, positive } => {
                if *positive {
                    self.add(PositiveTable::new(scope.clone(), tuples.clone()), owner, kind.clone());
                } else {
                    self.add(NegativeTable::new(scope.clone(), tuples.clone()), owner, kind.clone());
                }
            }
            Regular { scope, automaton } => {
                let finals: Vec<&str> = automaton.finals.iter().map(String::as_str).collect();
                let p = Layered::new(scope.clone(), Some(&automaton.start), &finals, &automaton.transitions);
                self.add(p, owner, kind.clone());
            }
            Mdd { scope, transitions } => {
                let sources: BTreeSet<&str> = transitions.iter().map(|t| t.from.as_str()).collect();
                let finals: Vec<&str> =
                    transitions.iter().map(|t| t.to.as_str()).filter(|t| !sources.contains(t)).collect();
                let p = Layered::new(scope.clone(), mdd_root(transitions), &finals, transitions);
                self.add(p, owner, kind.clone());
            }
            AllDifferent { scope, except } => {
                self.add(alldiff::AllDifferent::new(scope.clone(), except.clone()), owner, kind.clone())
            }
            AllEqual { scope } => self.add(order::AllEqual::new(scope.clone()), owner, kind.clone()),
            Ordered { scope, op, lengths } => {
                for i in 0..scope.len().saturating_sub(1) {
                    let len = lengths.as_ref().map_or(0, |l| l[i]);
                    let cop = match op {
                        OrderOp::Lt => CondOp::Lt,
                        OrderOp::Le => CondOp::Le,
                        OrderOp::Gt => CondOp::Gt,
                        OrderOp::Ge => CondOp::Ge,
                    };
                    let Some(rhs) = len.checked_neg() else {
                        self.add(CheckOnly, owner, kind.clone());
                        continue;
                    };
                    self.post(
                        Sum { scope: vec![scope[i], scope[i + 1]], coeffs: vec![1, -1], condition: Condition::value(cop, rhs) },
                        owner,
                    );
                }
            }
            Lex { lists, op } => {
                for w in lists.windows(2) {
                    let (a, b) = if op.is_increasing() { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
                    let check = Lex { lists: w.to_vec(), op: *op };
                    self.add(LexLe::new(a.clone(), b.clone(), op.is_strict()), owner, check);
                }
            }
            Precedence { scope, values } => self.add(order::Precedence::new(scope.clone(), values.clone()), owner, kind.clone()),
            Sum { scope, coeffs, condition } => {
                let terms = scope.iter().zip(coeffs).map(|(&v, &c)| (c as i128, v)).collect();
                self.post_linear(terms, 0, condition, owner, kind.clone());
            }
            Count { scope, values, condition } => {
                let c = self.condition_var(condition, 0, scope.len() as i64, owner);
                let check = Count { scope: scope.clone(), values: values.clone(), condition: Condition::var(CondOp::Eq, c) };
                self.add(count::Count::new(scope.clone(), values.clone(), c), owner, check);
            }
            NValues { scope, condition } => {
                let n = scope.len() as i64;
                let c = self.condition_var(condition, n.min(1), n, owner);
                let check = NValues { scope: scope.clone(), condition: Condition::var(CondOp::Eq, c) };
                self.add(count::NValues::new(scope.clone(), c), owner, check);
            }
            Maximum { scope, condition } | Minimum { scope, condition } => {
                if scope.is_empty() {
                    return self.add(Extremum::new(vec![], 0, false), owner, kind.clone());
                }
                let minimum = matches!(kind, Minimum { .. });
                let lo = scope.iter().map(|&v| self.pool.domain(v).min()).min().unwrap();
                let hi = scope.iter().map(|&v| self.pool.domain(v).max()).max().unwrap();
                let m = self.condition_var(condition, lo, hi, owner);
                let cond = Condition::var(CondOp::Eq, m);
                let check = if minimum {
                    Minimum { scope: scope.clone(), condition: cond }
                } else {
                    Maximum { scope: scope.clone(), condition: cond }
                };
                self.add(Extremum::new(scope.clone(), m, minimum), owner, check);
            }
            Element { list, index, condition } => {
                if list.is_empty() {
                    return self.add(Extremum::new(vec![], 0, false), owner, kind.clone());
                }
                let value = match (condition.op, &condition.rhs) {
                    (CondOp::Eq, Operand::Var(y)) => *y,
                    _ => {
                        let total: u64 = list.iter().map(|&v| self.pool.domain(v).size()).fold(0, u64::saturating_add);
                        let d = if total <= SCAN_LIMIT {
                            Domain::from_values(list.iter().flat_map(|&v| self.pool.domain(v).iter().collect::<Vec<_>>()))
                                .expect("non-empty list")
                        } else {
                            let lo = list.iter().map(|&v| self.pool.domain(v).min()).min().unwrap();
                            let hi = list.iter().map(|&v| self.pool.domain(v).max()).max().unwrap();
                            Domain::range(lo, hi)
                        };
                        let t = self.pool.new_var(d);
                        self.post(Sum { scope: vec![t], coeffs: vec![1], condition: condition.clone() }, owner);
                        t
                    }
                };
                let check = Element { list: list.clone(), index: *index, condition: Condition::var(CondOp::Eq, value) };
                self.add(count::Element::new(list.clone(), *index, value), owner, check);
            }
            Cumulative { origins, lengths, heights, condition } => {
                let cap = match (condition.op, &condition.rhs) {
                    (CondOp::Le, Operand::Value(c)) => Some(*c),
                    (CondOp::Lt, Operand::Value(c)) => c.checked_sub(1),
                    _ => None,
                };
                match cap {
                    Some(cap) if lengths.iter().chain(heights).all(|&x| x >= 0) => self.add(
                        TimeTable::new(origins.clone(), lengths.clone(), heights.clone(), cap),
                        owner,
                        kind.clone(),
                    ),
                    _ => self.add(CheckOnly, owner, kind.clone()),
                }
            }
            Circuit { scope } => {
                let ad = AllDifferent { scope: scope.clone(), except: vec![] };
                self.post(ad, owner);
                self.add(Subtour::new(scope.clone()), owner, kind.clone());
            }
            Instantiation { scope, values } => self.add(order::Instantiation::new(scope.clone(), values.clone()), owner, kind.clone()),
            AllDifferentMatrix { .. }
            | AllDifferentList { .. }
            | Cardinality { .. }
            | Channel { .. }
            | NoOverlap { .. }
            | BinPacking { .. }
            | Knapsack { .. }
            | Slide { .. } => unreachable!("handled by decompose"),
        }
    }
}

/// Compiles an instance; auxiliary variables follow the original ones.
pub fn compile(inst: &Instance) -> Compiled {
    let mut b = Builder { pool: VarPool::from_instance(inst), entries: Vec::new() };
    for (i, c) in inst.constraints.iter().enumerate() {
        b.post(c.kind.clone(), Some(i));
    }
    let objective = inst.objective.as_ref().map(|o| {
        let var = match &o.body {
            ObjectiveBody::Expr(Expr::Var(v)) => *v,
            ObjectiveBody::Expr(e) => {
                let (lo, hi) = expr_bounds(e, &b.pool);
                let v = b.pool.new_var(Domain::range(i64_clamped(lo), i64_clamped(hi)));
                b.post_intension(&eq(Expr::Var(v), e.clone()), None);
                v
            }
            ObjectiveBody::WeightedSum { scope, coeffs } => {
                let (lo, hi) = scope.iter().zip(coeffs).fold((0i128, 0i128), |acc, (&v, &c)| {
                    let d = b.pool.domain(v);
                    let (x, y) = (c as i128 * d.min() as i128, c as i128 * d.max() as i128);
                    (acc.0 + x.min(y), acc.1 + x.max(y))
                });
                let v = b.pool.new_var(Domain::range(i64_clamped(lo), i64_clamped(hi)));
                let mut s = scope.clone();
                s.push(v);
                let mut cs = coeffs.clone();
                cs.push(-1);
                b.post(ConstraintKind::Sum { scope: s, coeffs: cs, condition: Condition::value(CondOp::Eq, 0) }, None);
                v
            }
        };
        (var, o.sense)
    });
    let doms = b.pool.domains.iter().map(Dom::from_domain).collect();
    Compiled { doms, entries: b.entries, num_original: inst.num_vars(), objective }
}
