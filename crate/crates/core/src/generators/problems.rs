use super::binpacking::{lb2, max_items_per_bin, n_bins, series};
use super::Problem;
use crate::model::{
    CondOp, Condition, ConstraintKind, Domain, Expr, Instance, ObjectiveBody, Occurs, Op, Operand, OrderOp,
    VarId, TAG_REDUNDANT, TAG_SYMMETRY_BREAKING,
};
use ConstraintKind as K;

type Built = Result<Instance, String>;

const SB: &[&str] = &[TAG_SYMMETRY_BREAKING];
const RED: &[&str] = &[TAG_REDUNDANT];

pub(super) fn build(problem: Problem, p: &[i64]) -> Built {
    if !matches!(problem, Problem::BinPackingV1 | Problem::BinPackingV2) && p.len() != problem.param_names().len() {
        return Err(format!("expected parameters {}, got {} values", problem.param_names().join(","), p.len()));
    }
    match problem {
        Problem::AverageAvoiding => average_avoiding(p[0]),
        Problem::Hamming => hamming(p[0], p[1], p[2], p[3]),
        Problem::HyperSudoku => hyper_sudoku(p[0]),
        Problem::Takuzu => takuzu(p[0]),
        Problem::PoolballTriangle => poolball_triangle(p[0]),
        Problem::LitPuzzle => lit_puzzle(p[0]),
        Problem::Pyramid => pyramid(p[0], p[1]),
        Problem::Drinking => drinking(p[0]),
        Problem::SameQueensKnights => same_queens_knights(p[0]),
        Problem::BinPackingV1 => bin_packing_v1(p),
        Problem::BinPackingV2 => bin_packing_v2(p),
        Problem::SocialGolfers => social_golfers(p[0], p[1], p[2]),
        Problem::StillLife => still_life(p[0], p[1]),
    }
}

fn require(ok: bool, rule: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(rule.to_string())
    }
}

/// Caps sizes so that a typo cannot request billions of variables.
fn size(v: i64, lo: i64, what: &str) -> Result<usize, String> {
    require(v >= lo, &format!("{what} must be at least {lo}"))?;
    require(v <= 1_000_000, &format!("{what} must be at most 1000000"))?;
    Ok(v as usize)
}

fn var(v: VarId) -> Expr {
    Expr::Var(v)
}

fn cst(c: i64) -> Expr {
    Expr::Const(c)
}

fn bin(op: Op, a: Expr, b: Expr) -> Expr {
    Expr::binary(op, a, b)
}

fn array(inst: &mut Instance, name: &str, n: usize, dom: &Domain) -> Vec<VarId> {
    (0..n).map(|i| inst.add_var(format!("{name}[{i}]"), dom.clone())).collect()
}

fn matrix(inst: &mut Instance, name: &str, n: usize, m: usize, dom: &Domain) -> Vec<Vec<VarId>> {
    (0..n).map(|i| (0..m).map(|j| inst.add_var(format!("{name}[{i}][{j}]"), dom.clone())).collect()).collect()
}

/// Rows of a 2-d array where only the cells accepted by `keep` exist.
fn partial_matrix(
    inst: &mut Instance,
    name: &str,
    n: usize,
    m: usize,
    dom: &Domain,
    keep: impl Fn(usize, usize) -> bool,
) -> Vec<Vec<VarId>> {
    (0..n)
        .map(|i| (0..m).filter(|&j| keep(i, j)).map(|j| inst.add_var(format!("{name}[{i}][{j}]"), dom.clone())).collect())
        .collect()
}

fn column(x: &[Vec<VarId>], j: usize) -> Vec<VarId> {
    x.iter().map(|r| r[j]).collect()
}

fn sum_eq(scope: Vec<VarId>, rhs: Operand) -> ConstraintKind {
    let coeffs = vec![1; scope.len()];
    K::Sum { scope, coeffs, condition: Condition::new(CondOp::Eq, rhs) }
}

fn sum_objective(scope: Vec<VarId>) -> ObjectiveBody {
    let coeffs = vec![1; scope.len()];
    ObjectiveBody::WeightedSum { scope, coeffs }
}

fn average_avoiding(n: i64) -> Built {
    let n = size(n, 1, "n")?;
    let mut inst = Instance::new();
    let x = array(&mut inst, "x", n, &Domain::range(0, n as i64 - 1));
    for i in 0..n {
        for j in i + 2..n {
            for k in i + 1..j {
                let lhs = bin(Op::Mul, cst(2), var(x[k]));
                inst.post(K::Intension(bin(Op::Ne, lhs, bin(Op::Add, var(x[i]), var(x[j])))));
            }
        }
    }
    inst.post(K::AllDifferent { scope: x.clone(), except: vec![] });
    inst.post_tagged(K::Minimum { scope: x.clone(), condition: Condition::var(CondOp::Eq, x[0]) }, SB);
    Ok(inst)
}

fn hamming(n: i64, m: i64, d: i64, k: i64) -> Built {
    let (n, m) = (size(n, 1, "n")?, size(m, 1, "m")?);
    size(d, 1, "d")?;
    require(k >= 0, "k must be non-negative")?;
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "x", n, m, &Domain::range(0, d - 1));
    for a in 0..n {
        for b in a + 1..n {
            let diffs = (0..m).map(|j| bin(Op::Ne, var(x[a][j]), var(x[b][j]))).collect();
            inst.post(K::Intension(bin(Op::Ge, Expr::sum(diffs), cst(k))));
        }
    }
    if n >= 2 {
        inst.post_tagged(K::Lex { lists: x, op: OrderOp::Le }, SB);
    }
    Ok(inst)
}

fn hyper_sudoku(base: i64) -> Built {
    let base = size(base, 1, "base")?;
    require(base <= 100, "base must be at most 100")?;
    let n = base * base;
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "x", n, n, &Domain::range(1, n as i64));
    inst.post(K::AllDifferentMatrix { matrix: x.clone() });
    let block = |i: usize, j: usize| -> Vec<VarId> {
        (i..i + base).flat_map(|r| x[r][j..j + base].iter().copied()).collect()
    };
    for i in (0..n).step_by(base) {
        for j in (0..n).step_by(base) {
            inst.post(K::AllDifferent { scope: block(i, j), except: vec![] });
        }
    }
    for i in (1..n.saturating_sub(base)).step_by(base + 1) {
        for j in (1..n.saturating_sub(base)).step_by(base + 1) {
            inst.post(K::AllDifferent { scope: block(i, j), except: vec![] });
        }
    }
    Ok(inst)
}

fn takuzu(n: i64) -> Built {
    let n = size(n, 2, "n")?;
    require(n % 2 == 0, "n must be even")?;
    let m = (n / 2) as i64;
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "x", n, n, &Domain::boolean());
    for row in &x {
        inst.post(sum_eq(row.clone(), Operand::Value(m)));
    }
    for j in 0..n {
        inst.post(sum_eq(column(&x, j), Operand::Value(m)));
    }
    let either = |a: VarId, b: VarId, c: VarId| {
        K::Intension(Expr::apply(Op::Or, vec![bin(Op::Ne, var(a), var(b)), bin(Op::Ne, var(a), var(c))]))
    };
    for i in 1..n - 1 {
        for j in 0..n {
            inst.post(either(x[i][j], x[i - 1][j], x[i + 1][j]));
        }
    }
    for j in 1..n - 1 {
        for i in 0..n {
            inst.post(either(x[i][j], x[i][j - 1], x[i][j + 1]));
        }
    }
    inst.post(K::AllDifferentList { lists: x.clone() });
    inst.post(K::AllDifferentList { lists: (0..n).map(|j| column(&x, j)).collect() });
    Ok(inst)
}

fn poolball_triangle(n: i64) -> Built {
    let n = size(n, 2, "n")?;
    let k = (n * (n + 1) / 2) as i64;
    let mut inst = Instance::new();
    let x = partial_matrix(&mut inst, "x", n, n, &Domain::range(1, k), |i, j| i < n - j);
    inst.post(K::AllDifferent { scope: x.concat(), except: vec![] });
    for i in 1..n {
        for j in 0..n - i {
            let diff = bin(Op::Sub, var(x[i - 1][j]), var(x[i - 1][j + 1]));
            inst.post(K::Intension(bin(Op::Eq, var(x[i][j]), Expr::unary(Op::Abs, diff))));
        }
    }
    inst.post_tagged(K::Intension(bin(Op::Lt, var(x[n - 2][0]), var(x[n - 2][1]))), SB);
    Ok(inst)
}

/// The cell and its orthogonal neighbours.
fn cross(n: usize, i: usize, j: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if i > 0 {
        out.push((i - 1, j));
    }
    if j > 0 {
        out.push((i, j - 1));
    }
    out.push((i, j));
    if j + 1 < n {
        out.push((i, j + 1));
    }
    if i + 1 < n {
        out.push((i + 1, j));
    }
    out
}

fn lit_puzzle(n: i64) -> Built {
    let n = size(n, 1, "n")?;
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "x", n, n, &Domain::boolean());
    for i in 0..n {
        for j in 0..n {
            let scope: Vec<VarId> = cross(n, i, j).into_iter().map(|(a, b)| x[a][b]).collect();
            let coeffs = vec![1; scope.len()];
            let condition = Condition::new(CondOp::In, Operand::Set(vec![1, 3, 5]));
            inst.post(K::Sum { scope, coeffs, condition });
        }
    }
    inst.minimize(sum_objective(x.concat()));
    Ok(inst)
}

fn pyramid(n: i64, k: i64) -> Built {
    let n = size(n, 1, "n")?;
    require(k >= 0, "k must be non-negative")?;
    let mut inst = Instance::new();
    let x = partial_matrix(&mut inst, "x", n, n, &Domain::range(0, k), |i, j| j <= i);
    inst.post(K::Intension(bin(Op::Ne, var(x[0][0]), cst(0))));
    inst.post(K::AllDifferent { scope: x.concat(), except: vec![] });
    for i in 0..n - 1 {
        for j in 0..=i {
            let below = bin(Op::Add, var(x[i + 1][j]), var(x[i + 1][j + 1]));
            inst.post(K::Intension(bin(Op::Eq, var(x[i][j]), below)));
        }
    }
    inst.minimize(ObjectiveBody::Expr(var(x[0][0])));
    Ok(inst)
}

fn drinking(n: i64) -> Built {
    let n = size(n, 2, "n")?;
    let mut inst = Instance::new();
    let x = array(&mut inst, "x", n, &Domain::boolean());
    // y[0] takes part in no constraint and is left out.
    let y: Vec<VarId> = (1..n).map(|t| inst.add_var(format!("y[{t}]"), Domain::range(0, 8))).collect();
    for t in 1..n {
        let window = x[t.saturating_sub(8)..t.max(1)].to_vec();
        inst.post(sum_eq(window, Operand::Var(y[t - 1])));
    }
    for t in 1..n {
        if t % 5 == 0 || t % 7 == 0 {
            let quiet = bin(Op::Eq, var(y[t - 1]), cst(0));
            inst.post(K::Intension(bin(Op::Eq, quiet, bin(Op::Eq, var(x[t]), cst(1)))));
        }
    }
    inst.minimize(sum_objective(x));
    Ok(inst)
}

const QUEEN: i64 = 1;
const KNIGHT: i64 = 2;

fn same_queens_knights(n: i64) -> Built {
    let n = size(n, 1, "n")?;
    require(n <= 1000, "n must be at most 1000")?;
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let queen_attack = |i: usize, j: usize| -> Vec<(usize, usize)> {
        cells.iter().copied().filter(|&(a, b)| (a, b) != (i, j) && (a == i || b == j || a.abs_diff(i) == b.abs_diff(j))).collect()
    };
    let knight_attack = |i: usize, j: usize| -> Vec<(usize, usize)> {
        cells.iter().copied().filter(|&(a, b)| a != i && b != j && a.abs_diff(i) + b.abs_diff(j) == 3).collect()
    };
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "x", n, n, &Domain::range(0, 2));
    let q = inst.add_var("q", Domain::range(0, n as i64));
    let k = inst.add_var("k", Domain::range(0, n as i64));
    let all = x.concat();
    inst.post(K::Count { scope: all.clone(), values: vec![QUEEN], condition: Condition::var(CondOp::Eq, q) });
    inst.post(K::Count { scope: all, values: vec![KNIGHT], condition: Condition::var(CondOp::Eq, k) });
    // Each case of the per-cell match becomes an implication on an
    // auxiliary variable holding the sum over the attacked cells.
    for (name, piece, attack) in [("qa", QUEEN, &queen_attack as &dyn Fn(usize, usize) -> Vec<(usize, usize)>), ("ka", KNIGHT, &knight_attack)] {
        for &(i, j) in &cells {
            let scope: Vec<VarId> = attack(i, j).into_iter().map(|(a, b)| x[a][b]).collect();
            if scope.is_empty() {
                continue;
            }
            let s = inst.add_var(format!("{name}[{i}][{j}]"), Domain::range(0, 2 * scope.len() as i64));
            inst.post(sum_eq(scope, Operand::Var(s)));
            let imp = Expr::apply(Op::Or, vec![bin(Op::Ne, var(x[i][j]), cst(piece)), bin(Op::Eq, var(s), cst(0))]);
            inst.post(K::Intension(imp));
        }
    }
    inst.maximize(ObjectiveBody::Expr(bin(Op::Add, var(q), var(k))));
    Ok(inst)
}

/// Capacity and sorted weights of a bin-packing parameter list.
fn packing_data(p: &[i64]) -> Result<(i64, Vec<i64>), String> {
    require(p.len() >= 2, "expected a capacity followed by at least one weight")?;
    let capacity = p[0];
    require(capacity >= 1, "capacity must be positive")?;
    let mut weights = p[1..].to_vec();
    require(weights.len() <= 10_000, "at most 10000 items")?;
    require(weights.iter().all(|&w| 1 <= w && w <= capacity), "weights must lie in 1..=capacity")?;
    weights.sort_unstable();
    Ok((capacity, weights))
}

/// Bins available to the models and the lower bound; rejects data for
/// which the model's own bounds leave no admissible bin count.
fn bin_bounds(capacity: i64, weights: &[i64]) -> Result<(usize, i64), String> {
    let nb = n_bins(capacity, weights);
    let lo = lb2(capacity, weights);
    require(nb >= 1, "all items fit in one bin, the model's bin count is 0")?;
    require(lo <= nb, &format!("lower bound {lo} exceeds the model's bin count {nb}"))?;
    Ok((nb as usize, lo))
}

fn bin_packing_v1(p: &[i64]) -> Built {
    let (capacity, weights) = packing_data(p)?;
    let (nb, lo) = bin_bounds(capacity, &weights)?;
    let per_bin = max_items_per_bin(capacity, &weights);
    require(per_bin >= 1, "the model's per-bin item count is not positive")?;
    let per_bin = per_bin as usize;
    let mut distinct = weights.clone();
    distinct.dedup();
    let mut inst = Instance::new();
    let dom = Domain::from_values(std::iter::once(0).chain(distinct.iter().copied())).expect("non-empty");
    let x = matrix(&mut inst, "x", nb, per_bin, &dom);
    let z = inst.add_var("z", Domain::range(lo, nb as i64));
    for row in &x {
        let coeffs = vec![1; per_bin];
        inst.post(K::Sum { scope: row.clone(), coeffs, condition: Condition::value(CondOp::Le, capacity) });
    }
    for row in &x {
        inst.post(K::Ordered { scope: row.clone(), op: OrderOp::Ge, lengths: None });
    }
    let firsts = column(&x, 0);
    inst.post(K::Count { scope: firsts, values: distinct.clone(), condition: Condition::var(CondOp::Eq, z) });
    let mut values = vec![0];
    let mut occurs = vec![Occurs::Value((nb * per_bin) as i64 - weights.len() as i64)];
    for &w in &distinct {
        values.push(w);
        occurs.push(Occurs::Value(weights.iter().filter(|&&v| v == w).count() as i64));
    }
    inst.post(K::Cardinality { scope: x.concat(), values, occurs });
    if nb >= 2 {
        inst.post_tagged(K::Lex { lists: x, op: OrderOp::Ge }, SB);
    }
    inst.minimize(ObjectiveBody::Expr(var(z)));
    Ok(inst)
}

fn bin_packing_v2(p: &[i64]) -> Built {
    let (capacity, weights) = packing_data(p)?;
    let (nb, lo) = bin_bounds(capacity, &weights)?;
    let n = weights.len();
    let exceeding = weights.iter().filter(|&&w| w > capacity / 2).count();
    let mut inst = Instance::new();
    let x = array(&mut inst, "x", n, &Domain::range(0, nb as i64 - 1));
    let z = inst.add_var("z", Domain::range(lo, nb as i64));
    inst.post(K::BinPacking { scope: x.clone(), sizes: weights.clone(), condition: Condition::value(CondOp::Le, capacity) });
    inst.post(K::NValues { scope: x.clone(), condition: Condition::var(CondOp::Eq, z) });
    for (s, l) in series(&weights) {
        inst.post_tagged(K::Ordered { scope: x[s..s + l].to_vec(), op: OrderOp::Le, lengths: None }, SB);
    }
    for i in 0..exceeding {
        inst.post_tagged(K::Intension(bin(Op::Eq, var(x[n - exceeding + i]), cst(i as i64))), SB);
    }
    inst.minimize(ObjectiveBody::Expr(var(z)));
    Ok(inst)
}

fn social_golfers(groups: i64, group_size: i64, weeks: i64) -> Built {
    let (g, s, w) = (size(groups, 1, "groups")?, size(group_size, 1, "size")?, size(weeks, 1, "weeks")?);
    let players = g * s;
    require(players <= 10_000, "at most 10000 players")?;
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "g", w, players, &Domain::range(0, g as i64 - 1));
    for p1 in 0..players {
        for p2 in p1 + 1..players {
            let meets = (0..w).map(|wk| bin(Op::Eq, var(x[wk][p1]), var(x[wk][p2]))).collect();
            inst.post(K::Intension(bin(Op::Le, Expr::sum(meets), cst(1))));
        }
    }
    for row in &x {
        let values: Vec<i64> = (0..g as i64).collect();
        let occurs = values.iter().map(|_| Occurs::Value(s as i64)).collect();
        inst.post(K::Cardinality { scope: row.clone(), values, occurs });
    }
    // Matrix lex ordering: rows and columns both non-decreasing.
    if w >= 2 {
        inst.post_tagged(K::Lex { lists: x.clone(), op: OrderOp::Le }, SB);
    }
    if players >= 2 {
        inst.post_tagged(K::Lex { lists: (0..players).map(|p| column(&x, p)).collect(), op: OrderOp::Le }, SB);
    }
    for p in 0..players {
        inst.post_tagged(K::Intension(bin(Op::Eq, var(x[0][p]), cst((p / s) as i64))), SB);
    }
    for wk in 1..w {
        for k in 0..s {
            inst.post_tagged(K::Intension(bin(Op::Eq, var(x[wk][k]), cst(k as i64))), SB);
        }
    }
    if g == s && g + 1 == w {
        for p in 1..g {
            let matrix = (1..w).map(|wk| x[wk][p * s..p * s + s].to_vec()).collect();
            inst.post_tagged(K::AllDifferentMatrix { matrix }, RED);
        }
    } else {
        for wk in 1..w {
            for p in 1..g {
                inst.post_tagged(K::AllDifferent { scope: x[wk][p * s..p * s + s].to_vec(), except: vec![] }, RED);
            }
        }
    }
    Ok(inst)
}

/// `(alive neighbours, state)` pairs allowed in a still life.
fn still_life_table() -> Vec<Vec<crate::model::Cell>> {
    use crate::model::Cell::Val;
    let mut t: Vec<(i64, i64)> = (0..9).filter(|&v| v != 3).map(|v| (v, 0)).collect();
    t.extend([(2, 1), (3, 1)]);
    t.sort_unstable();
    t.into_iter().map(|(a, b)| vec![Val(a), Val(b)]).collect()
}

fn still_life(n: i64, m: i64) -> Built {
    let (n, m) = (size(n, 1, "n")?, size(m, 1, "m")?);
    let mut inst = Instance::new();
    let x = matrix(&mut inst, "x", n, m, &Domain::boolean());
    let a = matrix(&mut inst, "a", n, m, &Domain::range(0, 8));
    for i in 0..n {
        for j in 0..m {
            let mut around = Vec::new();
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (r, c) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0) && (0..n as i64).contains(&r) && (0..m as i64).contains(&c) {
                        around.push(x[r as usize][c as usize]);
                    }
                }
            }
            inst.post(sum_eq(around, Operand::Var(a[i][j])));
        }
    }
    let table = still_life_table();
    for i in 0..n {
        for j in 0..m {
            inst.post(K::Extension { scope: vec![a[i][j], x[i][j]], tuples: table.clone(), positive: true });
        }
    }
    let forbid = |scope: Vec<VarId>| {
        let ones = vec![crate::model::Cell::Val(1); 3];
        K::Extension { scope, tuples: vec![ones], positive: false }
    };
    for i in 0..m.saturating_sub(2) {
        inst.post(forbid(x[0][i..i + 3].to_vec()));
    }
    for i in 0..m.saturating_sub(2) {
        inst.post(forbid(x[n - 1][i..i + 3].to_vec()));
    }
    for i in 0..n.saturating_sub(2) {
        inst.post(forbid((i..i + 3).map(|r| x[r][0]).collect()));
    }
    for i in 0..n.saturating_sub(2) {
        inst.post(forbid((i..i + 3).map(|r| x[r][m - 1]).collect()));
    }
    if n == m {
        inst.post_tagged(K::Intension(bin(Op::Ge, var(x[0][0]), var(x[n - 1][n - 1]))), SB);
        inst.post_tagged(K::Intension(bin(Op::Ge, var(x[0][n - 1]), var(x[n - 1][0]))), SB);
    }
    inst.maximize(sum_objective(x.concat()));
    Ok(inst)
}
