//! Exact satisfaction semantics for total assignments.

use std::collections::{HashMap, HashSet};

use crate::model::{
    Assignment, ConstraintKind, EvalError, Instance, ObjectiveBody, OrderOp, Transition, Values, VarId,
};

/// Outcome of checking an assignment against an instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    /// Ids of violated constraints, ascending. Constraints mentioning a
    /// variable whose value lies outside its domain are included.
    pub violated: Vec<usize>,
    /// Variables whose value lies outside their declared domain, ascending.
    pub domain_violations: Vec<VarId>,
    /// `(expected, given)` when the assignment has the wrong length; no
    /// constraint is evaluated in that case.
    pub length_mismatch: Option<(usize, usize)>,
}

impl Verdict {
    pub fn satisfied(&self) -> bool {
        self.violated.is_empty() && self.domain_violations.is_empty() && self.length_mismatch.is_none()
    }
}

/// Checks every constraint and every domain.
pub fn check(inst: &Instance, a: &Assignment) -> Verdict {
    let n = inst.num_vars();
    if a.len() != n {
        return Verdict {
            violated: (0..inst.constraints.len()).collect(),
            domain_violations: Vec::new(),
            length_mismatch: Some((n, a.len())),
        };
    }
    let domain_violations: Vec<VarId> =
        (0..n).filter(|&v| !inst.variables[v].domain.contains(a.values()[v])).collect();
    let bad: HashSet<VarId> = domain_violations.iter().copied().collect();
    let violated = inst
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            (!bad.is_empty() && c.kind.var_occurrences().iter().any(|v| bad.contains(v)))
                || !constraint_holds(&c.kind, a)
        })
        .map(|(i, _)| i)
        .collect();
    Verdict { violated, domain_violations, length_mismatch: None }
}

/// Objective value of a total assignment; 0 for satisfaction problems.
pub fn objective_value<V: Values + ?Sized>(inst: &Instance, a: &V) -> Result<i64, EvalError> {
    match inst.objective.as_ref().map(|o| &o.body) {
        None => Ok(0),
        Some(ObjectiveBody::Expr(e)) => e.eval(a),
        Some(ObjectiveBody::WeightedSum { scope, coeffs }) => {
            scope.iter().zip(coeffs).try_fold(0i64, |acc, (&v, &c)| {
                c.checked_mul(a.value(v)).and_then(|t| acc.checked_add(t)).ok_or(EvalError::Overflow)
            })
        }
    }
}

fn all_distinct(vals: impl Iterator<Item = i64>, except: &[i64]) -> bool {
    let mut seen = HashSet::new();
    vals.filter(|v| !except.contains(v)).all(|v| seen.insert(v))
}

fn lex_holds(a: &[i64], b: &[i64], op: OrderOp) -> bool {
    use std::cmp::Ordering::*;
    let ord = a.cmp(b);
    match op {
        OrderOp::Lt => ord == Less,
        OrderOp::Le => ord != Greater,
        OrderOp::Gt => ord == Greater,
        OrderOp::Ge => ord != Less,
    }
}

/// Whether the word is accepted by the automaton (nondeterminism allowed).
fn automaton_accepts(start: &str, finals: &[String], ts: &[Transition], word: &[i64]) -> bool {
    let mut by_state: HashMap<(&str, i64), Vec<&str>> = HashMap::new();
    for t in ts {
        by_state.entry((t.from.as_str(), t.value)).or_default().push(t.to.as_str());
    }
    let mut current: HashSet<&str> = HashSet::from([start]);
    for &v in word {
        let mut next = HashSet::new();
        for s in &current {
            if let Some(tos) = by_state.get(&(*s, v)) {
                next.extend(tos.iter().copied());
            }
        }
        if next.is_empty() {
            return false;
        }
        current = next;
    }
    current.iter().any(|s| finals.iter().any(|f| f == s))
}

/// The unique node of a diagram without incoming arcs, if any.
pub fn mdd_root(ts: &[Transition]) -> Option<&str> {
    let targets: HashSet<&str> = ts.iter().map(|t| t.to.as_str()).collect();
    let roots: HashSet<&str> = ts.iter().map(|t| t.from.as_str()).filter(|s| !targets.contains(s)).collect();
    if roots.len() == 1 {
        roots.into_iter().next()
    } else {
        None
    }
}

fn mdd_accepts(ts: &[Transition], word: &[i64]) -> bool {
    let Some(root) = mdd_root(ts) else {
        return false;
    };
    let sources: HashSet<&str> = ts.iter().map(|t| t.from.as_str()).collect();
    let mut current: HashSet<&str> = HashSet::from([root]);
    for &v in word {
        current = ts
            .iter()
            .filter(|t| t.value == v && current.contains(t.from.as_str()))
            .map(|t| t.to.as_str())
            .collect();
        if current.is_empty() {
            return false;
        }
    }
    current.iter().any(|s| !sources.contains(s))
}

fn circuit_holds(xs: &[i64]) -> bool {
    let n = xs.len();
    if xs.iter().any(|&x| x < 0 || x as usize >= n) {
        return false;
    }
    let in_cycle: Vec<usize> = (0..n).filter(|&i| xs[i] as usize != i).collect();
    let Some(&start) = in_cycle.first() else {
        return false;
    };
    let mut seen = vec![false; n];
    let mut cur = start;
    for _ in 0..in_cycle.len() {
        if seen[cur] || xs[cur] as usize == cur {
            return false;
        }
        seen[cur] = true;
        cur = xs[cur] as usize;
    }
    cur == start
}

fn channel_holds(xs: &[i64], ys: &[i64]) -> bool {
    xs.iter().enumerate().all(|(i, &x)| x >= 0 && (x as usize) < ys.len() && ys[x as usize] == i as i64)
}

/// Intervals `[o, o + l)` of two tasks intersect in every dimension;
/// tasks with a zero length in some dimension never overlap.
fn boxes_overlap(oa: &[i64], la: &[i64], ob: &[i64], lb: &[i64]) -> bool {
    if la.iter().chain(lb).any(|&l| l == 0) {
        return false;
    }
    (0..oa.len()).all(|d| {
        let (a0, a1) = (oa[d] as i128, oa[d] as i128 + la[d] as i128);
        let (b0, b1) = (ob[d] as i128, ob[d] as i128 + lb[d] as i128);
        a0 < b1 && b0 < a1
    })
}

/// Exact satisfaction test of one constraint.
pub fn constraint_holds<V: Values + ?Sized>(k: &ConstraintKind, a: &V) -> bool {
    use ConstraintKind::*;
    let vals = |s: &[VarId]| s.iter().map(|&v| a.value(v)).collect::<Vec<i64>>();
    match k {
        Intension(e) => matches!(e.eval(a), Ok(v) if v != 0),
        Extension { scope, tuples, positive } => {
            let x = vals(scope);
            let hit = tuples.iter().any(|t| t.len() == x.len() && t.iter().zip(&x).all(|(c, &v)| c.matches(v)));
            hit == *positive
        }
        Regular { scope, automaton } => {
            automaton_accepts(&automaton.start, &automaton.finals, &automaton.transitions, &vals(scope))
        }
        Mdd { scope, transitions } => mdd_accepts(transitions, &vals(scope)),
        AllDifferent { scope, except } => all_distinct(scope.iter().map(|&v| a.value(v)), except),
        AllDifferentMatrix { matrix } => {
            matrix.iter().all(|row| all_distinct(row.iter().map(|&v| a.value(v)), &[]))
                && (0..matrix.first().map_or(0, Vec::len))
                    .all(|j| all_distinct(matrix.iter().map(|row| a.value(row[j])), &[]))
        }
        AllDifferentList { lists } => {
            let vs: Vec<Vec<i64>> = lists.iter().map(|l| vals(l)).collect();
            (0..vs.len()).all(|i| (i + 1..vs.len()).all(|j| vs[i] != vs[j]))
        }
        AllEqual { scope } => vals(scope).windows(2).all(|w| w[0] == w[1]),
        Ordered { scope, op, lengths } => {
            let x = vals(scope);
            (0..x.len().saturating_sub(1)).all(|i| {
                let len = lengths.as_ref().map_or(0, |l| l[i]) as i128;
                let lhs = x[i] as i128 + len;
                let rhs = x[i + 1] as i128;
                match op {
                    OrderOp::Lt => lhs < rhs,
                    OrderOp::Le => lhs <= rhs,
                    OrderOp::Gt => lhs > rhs,
                    OrderOp::Ge => lhs >= rhs,
                }
            })
        }
        Lex { lists, op } => {
            let vs: Vec<Vec<i64>> = lists.iter().map(|l| vals(l)).collect();
            vs.windows(2).all(|w| lex_holds(&w[0], &w[1], *op))
        }
        Precedence { scope, values } => {
            let x = vals(scope);
            let first = |v: i64| x.iter().position(|&y| y == v);
            values.windows(2).all(|w| match first(w[1]) {
                None => true,
                Some(p1) => first(w[0]).is_some_and(|p0| p0 < p1),
            })
        }
        Sum { scope, coeffs, condition } => {
            let s: i128 = scope.iter().zip(coeffs).map(|(&v, &c)| c as i128 * a.value(v) as i128).sum();
            condition.holds_i128(s, a)
        }
        Count { scope, values, condition } => {
            let n = scope.iter().filter(|&&v| values.contains(&a.value(v))).count();
            condition.holds(n as i64, a)
        }
        NValues { scope, condition } => {
            let distinct: HashSet<i64> = scope.iter().map(|&v| a.value(v)).collect();
            condition.holds(distinct.len() as i64, a)
        }
        Cardinality { scope, values, occurs } => values.iter().zip(occurs).all(|(&val, occ)| {
            let n = scope.iter().filter(|&&v| a.value(v) == val).count();
            occ.to_condition().holds(n as i64, a)
        }),
        Maximum { scope, condition } => scope.iter().map(|&v| a.value(v)).max().is_some_and(|m| condition.holds(m, a)),
        Minimum { scope, condition } => scope.iter().map(|&v| a.value(v)).min().is_some_and(|m| condition.holds(m, a)),
        Element { list, index, condition } => {
            let i = a.value(*index);
            i >= 0 && (i as usize) < list.len() && condition.holds(a.value(list[i as usize]), a)
        }
        Channel { list, other } => {
            let x = vals(list);
            match other {
                None => channel_holds(&x, &x),
                Some(o) => {
                    let y = vals(o);
                    channel_holds(&x, &y) && (x.len() != y.len() || channel_holds(&y, &x))
                }
            }
        }
        NoOverlap { origins, lengths } => {
            let os: Vec<Vec<i64>> = origins.iter().map(|o| vals(o)).collect();
            (0..os.len()).all(|i| {
                (i + 1..os.len()).all(|j| !boxes_overlap(&os[i], &lengths[i], &os[j], &lengths[j]))
            })
        }
        Cumulative { origins, lengths, heights, condition } => {
            let os = vals(origins);
            let mut events: Vec<i128> = Vec::new();
            for (i, &o) in os.iter().enumerate() {
                if lengths[i] > 0 {
                    events.push(o as i128);
                    events.push(o as i128 + lengths[i] as i128);
                }
            }
            events.sort_unstable();
            events.dedup();
            events.iter().all(|&t| {
                let active: Vec<usize> =
                    (0..os.len()).filter(|&i| os[i] as i128 <= t && t < os[i] as i128 + lengths[i] as i128).collect();
                active.is_empty() || {
                    let load: i128 = active.iter().map(|&i| heights[i] as i128).sum();
                    condition.holds_i128(load, a)
                }
            })
        }
        BinPacking { scope, sizes, condition } => {
            let mut loads: HashMap<i64, i128> = HashMap::new();
            for (&v, &s) in scope.iter().zip(sizes) {
                *loads.entry(a.value(v)).or_default() += s as i128;
            }
            loads.values().all(|&l| condition.holds_i128(l, a))
        }
        Knapsack { scope, weights, profits, weight_condition, profit_condition } => {
            let w: i128 = scope.iter().zip(weights).map(|(&v, &c)| c as i128 * a.value(v) as i128).sum();
            let p: i128 = scope.iter().zip(profits).map(|(&v, &c)| c as i128 * a.value(v) as i128).sum();
            weight_condition.holds_i128(w, a) && profit_condition.holds_i128(p, a)
        }
        Circuit { scope } => circuit_holds(&vals(scope)),
        Instantiation { scope, values } => vals(scope) == *values,
        Slide { .. } => k.slide_windows().iter().all(|w| constraint_holds(w, a)),
    }
}
