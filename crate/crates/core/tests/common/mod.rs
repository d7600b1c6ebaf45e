//! Random small instances and a checker-only brute-force oracle.
#![allow(dead_code)]

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xcore::checker::{check, objective_value};
use xcore::model::*;

/// Names of the generated kinds, indexed like [`random_kind`].
pub const KIND_NAMES: [&str; 26] = [
    "intension",
    "extension",
    "regular",
    "mdd",
    "allDifferent",
    "allDifferent-matrix",
    "allDifferent-list",
    "allEqual",
    "ordered",
    "lex",
    "precedence",
    "sum",
    "count",
    "nValues",
    "cardinality",
    "maximum",
    "minimum",
    "element",
    "channel",
    "noOverlap",
    "cumulative",
    "binPacking",
    "knapsack",
    "circuit",
    "instantiation",
    "slide",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_domain(r: &mut impl Rng) -> Domain {
    let size = r.gen_range(1..=4);
    let mut pool: Vec<i64> = (-1..=4).collect();
    pool.shuffle(r);
    Domain::from_values(pool[..size].iter().copied()).unwrap()
}

fn val(r: &mut impl Rng) -> i64 {
    r.gen_range(-1..=4)
}

fn var(r: &mut impl Rng, n: usize) -> VarId {
    r.gen_range(0..n)
}

fn distinct_vars(r: &mut impl Rng, n: usize, k: RangeInclusive<usize>) -> Vec<VarId> {
    let k = r.gen_range(k);
    let mut all: Vec<VarId> = (0..n).collect();
    all.shuffle(r);
    all.truncate(k.min(n));
    all
}

fn vars_with_repeats(r: &mut impl Rng, n: usize, k: RangeInclusive<usize>) -> Vec<VarId> {
    let k = r.gen_range(k);
    (0..k).map(|_| var(r, n)).collect()
}

fn distinct_values(r: &mut impl Rng, k: RangeInclusive<usize>) -> Vec<i64> {
    let k = r.gen_range(k);
    let mut pool: Vec<i64> = (-1..=4).collect();
    pool.shuffle(r);
    pool.truncate(k);
    pool
}

pub fn random_condition(r: &mut impl Rng, n: usize, scale: i64) -> Condition {
    let op = CondOp::ALL[r.gen_range(0..CondOp::ALL.len())];
    let rhs = if op.is_set_op() {
        if r.gen_bool(0.5) {
            let lo = r.gen_range(-2..=scale);
            Operand::Interval(lo, lo + r.gen_range(0..=3))
        } else {
            Operand::Set((0..r.gen_range(1..=3)).map(|_| r.gen_range(-2..=scale)).collect())
        }
    } else if r.gen_bool(0.3) {
        Operand::Var(var(r, n))
    } else {
        Operand::Value(r.gen_range(-2..=scale))
    };
    Condition::new(op, rhs)
}

pub fn int_expr(r: &mut impl Rng, vars: &[VarId], depth: u32) -> Expr {
    if depth == 0 || r.gen_bool(0.35) {
        return if r.gen_bool(0.75) {
            Expr::Var(*vars.choose(r).unwrap())
        } else {
            Expr::Const(r.gen_range(-2..=3))
        };
    }
    let d = depth - 1;
    match r.gen_range(0..11) {
        0 => Expr::unary(Op::Neg, int_expr(r, vars, d)),
        1 => Expr::unary(Op::Abs, int_expr(r, vars, d)),
        2 => Expr::apply(Op::Add, (0..r.gen_range(2..=3)).map(|_| int_expr(r, vars, d)).collect()),
        3 => Expr::binary(Op::Sub, int_expr(r, vars, d), int_expr(r, vars, d)),
        4 => Expr::binary(Op::Mul, int_expr(r, vars, d), int_expr(r, vars, d)),
        5 => Expr::binary(Op::Div, int_expr(r, vars, d), int_expr(r, vars, d)),
        6 => Expr::binary(Op::Mod, int_expr(r, vars, d), int_expr(r, vars, d)),
        7 => Expr::binary(Op::Dist, int_expr(r, vars, d), int_expr(r, vars, d)),
        8 => Expr::binary(Op::Min, int_expr(r, vars, d), int_expr(r, vars, d)),
        9 => Expr::binary(Op::Max, int_expr(r, vars, d), int_expr(r, vars, d)),
        _ => Expr::apply(Op::If, vec![bool_expr(r, vars, d), int_expr(r, vars, d), int_expr(r, vars, d)]),
    }
}

pub fn bool_expr(r: &mut impl Rng, vars: &[VarId], depth: u32) -> Expr {
    let d = depth.saturating_sub(1);
    match r.gen_range(0..10) {
        0 if depth > 0 => Expr::unary(Op::Not, bool_expr(r, vars, d)),
        1 if depth > 0 => Expr::apply(Op::And, (0..r.gen_range(2..=3)).map(|_| bool_expr(r, vars, d)).collect()),
        2 if depth > 0 => Expr::apply(Op::Or, (0..r.gen_range(2..=3)).map(|_| bool_expr(r, vars, d)).collect()),
        3 if depth > 0 => Expr::binary(Op::Xor, bool_expr(r, vars, d), bool_expr(r, vars, d)),
        4 if depth > 0 => Expr::binary(Op::Iff, bool_expr(r, vars, d), bool_expr(r, vars, d)),
        5 => Expr::in_set(int_expr(r, vars, d), distinct_values(r, 1..=3)),
        _ => {
            let op = [Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge][r.gen_range(0..6)];
            Expr::binary(op, int_expr(r, vars, d), int_expr(r, vars, d))
        }
    }
}

fn random_table(r: &mut impl Rng, arity: usize) -> Vec<Vec<Cell>> {
    (0..r.gen_range(0..=8))
        .map(|_| (0..arity).map(|_| if r.gen_bool(0.15) { Cell::Star } else { Cell::Val(val(r)) }).collect())
        .collect()
}

fn random_mdd(r: &mut impl Rng, depth: usize) -> Vec<Transition> {
    let name = |layer: usize, i: usize| if layer == depth { "t".to_string() } else { format!("n{layer}_{i}") };
    let mut widths: Vec<usize> = (0..=depth).map(|_| r.gen_range(1..=2)).collect();
    widths[0] = 1;
    widths[depth] = 1;
    let mut ts: Vec<Transition> = Vec::new();
    let push = |ts: &mut Vec<Transition>, from: String, value: i64, to: String| {
        let fresh = !ts.iter().any(|t| t.from == from && t.value == value);
        if fresh {
            ts.push(Transition::new(from, value, to));
        }
        fresh
    };
    for layer in 0..depth {
        // Every node gets an incoming edge so the root is unique.
        for j in 0..widths[layer + 1] {
            let i = r.gen_range(0..widths[layer]);
            while !push(&mut ts, name(layer, i), val(r), name(layer + 1, j)) {}
        }
        for _ in 0..r.gen_range(0..=3) {
            let i = r.gen_range(0..widths[layer]);
            let j = r.gen_range(0..widths[layer + 1]);
            push(&mut ts, name(layer, i), val(r), name(layer + 1, j));
        }
    }
    ts
}

/// A random constraint of kind `k` (see [`KIND_NAMES`]) over variables `0..n`.
pub fn random_kind(r: &mut impl Rng, n: usize, k: usize) -> ConstraintKind {
    use ConstraintKind::*;
    let mut r2 = ChaCha8Rng::seed_from_u64(r.gen());
    let r = &mut r2;
    match k {
        0 => {
            let vars = distinct_vars(r, n, 1..=3);
            Intension(bool_expr(r, &vars, 3))
        }
        1 => {
            let scope = distinct_vars(r, n, 1..=3);
            let tuples = random_table(r, scope.len());
            Extension { scope, tuples, positive: r.gen_bool(0.5) }
        }
        2 => {
            let scope = vars_with_repeats(r, n, 1..=4);
            let states = ["a", "b", "c"];
            let mut transitions: Vec<Transition> = Vec::new();
            for _ in 0..r.gen_range(2..=8) {
                let t = Transition::new(*states.choose(r).unwrap(), val(r), *states.choose(r).unwrap());
                if !transitions.contains(&t) {
                    transitions.push(t);
                }
            }
            let mut finals: Vec<String> = states.iter().filter(|_| r.gen_bool(0.4)).map(|s| s.to_string()).collect();
            if finals.is_empty() {
                finals.push("c".into());
            }
            Regular { scope, automaton: Automaton { start: "a".into(), finals, transitions } }
        }
        3 => {
            let scope = vars_with_repeats(r, n, 1..=4);
            let transitions = random_mdd(r, scope.len());
            Mdd { scope, transitions }
        }
        4 => {
            let scope = distinct_vars(r, n, 2..=5);
            let except = if r.gen_bool(0.3) { distinct_values(r, 1..=2) } else { Vec::new() };
            AllDifferent { scope, except }
        }
        5 => {
            let (rows, cols) = (r.gen_range(1..=3), r.gen_range(1..=3));
            AllDifferentMatrix { matrix: (0..rows).map(|_| vars_with_repeats(r, n, cols..=cols)).collect() }
        }
        6 => {
            let l = r.gen_range(1..=3);
            AllDifferentList { lists: (0..r.gen_range(2..=3)).map(|_| vars_with_repeats(r, n, l..=l)).collect() }
        }
        7 => AllEqual { scope: vars_with_repeats(r, n, 1..=4) },
        8 => {
            let scope = distinct_vars(r, n, 2..=4);
            let lengths = r.gen_bool(0.4).then(|| (1..scope.len()).map(|_| r.gen_range(-1..=2)).collect());
            let op = [OrderOp::Lt, OrderOp::Le, OrderOp::Gt, OrderOp::Ge][r.gen_range(0..4)];
            Ordered { scope, op, lengths }
        }
        9 => {
            let l = r.gen_range(1..=3);
            let op = [OrderOp::Lt, OrderOp::Le, OrderOp::Gt, OrderOp::Ge][r.gen_range(0..4)];
            Lex { lists: (0..r.gen_range(2..=3)).map(|_| vars_with_repeats(r, n, l..=l)).collect(), op }
        }
        10 => {
            let scope = distinct_vars(r, n, 2..=5);
            Precedence { scope, values: distinct_values(r, 2..=3) }
        }
        11 => {
            let scope = vars_with_repeats(r, n, 1..=5);
            let coeffs = scope.iter().map(|_| r.gen_range(-2..=2)).collect();
            Sum { scope, coeffs, condition: random_condition(r, n, 6) }
        }
        12 => {
            let scope = vars_with_repeats(r, n, 1..=5);
            Count { scope, values: distinct_values(r, 1..=2), condition: random_condition(r, n, 4) }
        }
        13 => NValues { scope: vars_with_repeats(r, n, 1..=5), condition: random_condition(r, n, 4) },
        14 => {
            let scope = vars_with_repeats(r, n, 1..=5);
            let values = distinct_values(r, 1..=3);
            let occurs = values
                .iter()
                .map(|_| match r.gen_range(0..3) {
                    0 => Occurs::Value(r.gen_range(0..=2)),
                    1 => {
                        let lo = r.gen_range(0..=2);
                        Occurs::Interval(lo, lo + r.gen_range(0..=2))
                    }
                    _ => Occurs::Var(var(r, n)),
                })
                .collect();
            Cardinality { scope, values, occurs }
        }
        15 => Maximum { scope: vars_with_repeats(r, n, 1..=4), condition: random_condition(r, n, 4) },
        16 => Minimum { scope: vars_with_repeats(r, n, 1..=4), condition: random_condition(r, n, 4) },
        17 => Element {
            list: vars_with_repeats(r, n, 1..=4),
            index: var(r, n),
            condition: random_condition(r, n, 4),
        },
        18 => {
            let list = vars_with_repeats(r, n, 1..=4);
            let other = r.gen_bool(0.5).then(|| vars_with_repeats(r, n, 1..=4));
            Channel { list, other }
        }
        19 => {
            let (tasks, dims) = (r.gen_range(2..=3), r.gen_range(1..=2));
            NoOverlap {
                origins: (0..tasks).map(|_| vars_with_repeats(r, n, dims..=dims)).collect(),
                lengths: (0..tasks).map(|_| (0..dims).map(|_| r.gen_range(0..=3)).collect()).collect(),
            }
        }
        20 => {
            let origins = vars_with_repeats(r, n, 1..=3);
            let lengths = origins.iter().map(|_| r.gen_range(0..=3)).collect();
            let heights = origins.iter().map(|_| r.gen_range(-1..=3)).collect();
            Cumulative { origins, lengths, heights, condition: random_condition(r, n, 5) }
        }
        21 => {
            let scope = vars_with_repeats(r, n, 1..=4);
            let sizes = scope.iter().map(|_| r.gen_range(-1..=4)).collect();
            BinPacking { scope, sizes, condition: random_condition(r, n, 6) }
        }
        22 => {
            let scope = vars_with_repeats(r, n, 1..=4);
            let weights = scope.iter().map(|_| r.gen_range(0..=3)).collect();
            let profits = scope.iter().map(|_| r.gen_range(-1..=3)).collect();
            Knapsack {
                scope,
                weights,
                profits,
                weight_condition: random_condition(r, n, 8),
                profit_condition: random_condition(r, n, 8),
            }
        }
        23 => Circuit { scope: distinct_vars(r, n, 1..=4) },
        24 => {
            let scope = distinct_vars(r, n, 1..=3);
            let values = scope.iter().map(|_| val(r)).collect();
            Instantiation { scope, values }
        }
        _ => {
            let arity = r.gen_range(1..=3);
            let scope = vars_with_repeats(r, n, arity..=5);
            let local: Vec<VarId> = (0..arity).collect();
            let pattern = if r.gen_bool(0.5) {
                let e = bool_expr(r, &local, 2);
                let last = Expr::binary(Op::Ne, Expr::Var(arity - 1), Expr::Const(val(r)));
                Intension(Expr::apply(if r.gen_bool(0.5) { Op::And } else { Op::Or }, vec![e, last]))
            } else {
                Extension { scope: local, tuples: random_table(r, arity), positive: r.gen_bool(0.5) }
            };
            Slide { scope, arity, offset: r.gen_range(1..=2), pattern: Box::new(pattern) }
        }
    }
}

/// Up to 6 variables, domains of at most 4 values, up to 6 constraints of any kind.
pub fn random_csp(seed: u64) -> Instance {
    random_instance(seed, 6)
}

fn random_instance(seed: u64, max_constraints: usize) -> Instance {
    let r = &mut rng(seed);
    let n = r.gen_range(1..=6);
    let mut inst = Instance::new();
    for i in 0..n {
        inst.add_var(format!("x{i}"), random_domain(r));
    }
    for _ in 0..r.gen_range(1..=max_constraints) {
        let k = r.gen_range(0..KIND_NAMES.len());
        inst.post(random_kind(r, n, k));
    }
    inst
}

/// At most three constraints plus a random linear or nonlinear objective.
pub fn random_cop(seed: u64) -> Instance {
    let mut inst = random_instance(seed, 3);
    let r = &mut rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = inst.num_vars();
    let body = match r.gen_range(0..3) {
        0 => ObjectiveBody::Expr(Expr::Var(var(r, n))),
        1 => {
            let scope = vars_with_repeats(r, n, 1..=4);
            let coeffs = scope.iter().map(|_| r.gen_range(-3..=3)).collect();
            ObjectiveBody::WeightedSum { scope, coeffs }
        }
        _ => {
            let vars: Vec<VarId> = (0..n).collect();
            ObjectiveBody::Expr(int_expr(r, &vars, 2))
        }
    };
    if r.gen_bool(0.5) {
        inst.minimize(body);
    } else {
        inst.maximize(body);
    }
    inst
}

/// Calls `f` on every assignment in the Cartesian product of the domains.
pub fn for_each_assignment(inst: &Instance, mut f: impl FnMut(&Assignment)) {
    let doms: Vec<Vec<i64>> = inst.variables.iter().map(|v| v.domain.iter().collect()).collect();
    let mut idx = vec![0usize; doms.len()];
    let mut a = Assignment::new(doms.iter().map(|d| d[0]).collect());
    loop {
        f(&a);
        let mut i = 0;
        loop {
            if i == doms.len() {
                return;
            }
            idx[i] += 1;
            if idx[i] < doms[i].len() {
                a.0[i] = doms[i][idx[i]];
                break;
            }
            idx[i] = 0;
            a.0[i] = doms[i][0];
            i += 1;
        }
    }
}

pub fn brute_solutions(inst: &Instance) -> Vec<Assignment> {
    let mut out = Vec::new();
    for_each_assignment(inst, |a| {
        if check(inst, a).satisfied() {
            out.push(a.clone());
        }
    });
    out
}

/// Best objective value over all solutions; `None` when there are none.
pub fn brute_optimum(inst: &Instance) -> Option<i64> {
    let sense = inst.objective.as_ref().map_or(Sense::Minimize, |o| o.sense);
    let mut best: Option<i64> = None;
    for_each_assignment(inst, |a| {
        if check(inst, a).satisfied() {
            if let Ok(v) = objective_value(inst, a) {
                if best.map_or(true, |b| sense.better(v, b)) {
                    best = Some(v);
                }
            }
        }
    });
    best
}
