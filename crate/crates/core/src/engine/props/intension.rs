use crate::engine::propagate::{Propagator, Strength};
use crate::engine::props::linear::SCAN_LIMIT;
use crate::engine::store::{DomainStore, Empty};
use crate::model::{Expr, Values, VarId};

/// Largest number of candidate tuples enumerated by a sweep.
pub const SWEEP_LIMIT: u64 = 4096;

/// Product of the current domain sizes, saturating.
pub fn product(s: &DomainStore, vars: &[VarId]) -> u64 {
    vars.iter().fold(1u64, |acc, &v| acc.saturating_mul(s.size(v)))
}

struct Local<'a>(&'a [i64]);

impl Values for Local<'_> {
    fn value(&self, v: VarId) -> i64 {
        self.0[v]
    }
}

/// Generalized arc consistency by enumerating every candidate tuple.
///
/// With `result` set, enforces `result = expr` and enumerates only the
/// variables of `expr`.
pub struct Sweep {
    vars: Vec<VarId>,
    local: Expr,
    result: Option<VarId>,
}

impl Sweep {
    pub fn new(expr: &Expr, result: Option<VarId>) -> Self {
        let vars = expr.vars();
        let local = expr.map_vars(&|v| vars.binary_search(&v).unwrap());
        Sweep { vars, local, result }
    }
}

impl Propagator for Sweep {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let doms: Vec<Vec<i64>> = self.vars.iter().map(|&v| s.dom(v).values()).collect();
        let mut supported: Vec<Vec<bool>> = doms.iter().map(|d| vec![false; d.len()]).collect();
        let mut results: Vec<i64> = Vec::new();
        let k = doms.len();
        let mut idx = vec![0usize; k];
        let mut vals: Vec<i64> = doms.iter().map(|d| d[0]).collect();
        let mut any = false;
        loop {
            let ok = match (self.local.eval(&Local(&vals)), self.result) {
                (Ok(x), Some(r)) => {
                    let hit = s.contains(r, x);
                    if hit {
                        results.push(x);
                    }
                    hit
                }
                (Ok(x), None) => x != 0,
                (Err(_), _) => false,
            };
            if ok {
                any = true;
                for i in 0..k {
                    supported[i][idx[i]] = true;
                }
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] < doms[i].len() {
                    vals[i] = doms[i][idx[i]];
                    break;
                }
                idx[i] = 0;
                vals[i] = doms[i][0];
                i += 1;
            }
            if i == k {
                break;
            }
        }
        if !any {
            return Err(Empty);
        }
        if let Some(r) = self.result {
            results.sort_unstable();
            results.dedup();
            s.retain(r, |x| results.binary_search(&x).is_ok())?;
        }
        for (i, &v) in self.vars.iter().enumerate() {
            let (d, sup) = (&doms[i], &supported[i]);
            if sup.iter().all(|&b| b) {
                continue;
            }
            let keep: Vec<i64> = d.iter().zip(sup).filter(|(_, &b)| b).map(|(&x, _)| x).collect();
            s.retain(v, |x| keep.binary_search(&x).is_ok())?;
        }
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::Gac
    }

    fn idempotent(&self) -> bool {
        true
    }

    fn priority(&self) -> u8 {
        1
    }
}

struct Overlay<'a> {
    s: &'a DomainStore,
    var: VarId,
    val: i64,
}

impl Values for Overlay<'_> {
    fn value(&self, v: VarId) -> i64 {
        if v == self.var {
            self.val
        } else {
            self.s.min(v)
        }
    }
}

/// Evaluates once at most one variable is unfixed.
pub struct ForwardCheck {
    vars: Vec<VarId>,
    expr: Expr,
}

impl ForwardCheck {
    pub fn new(expr: &Expr) -> Self {
        ForwardCheck { vars: expr.vars(), expr: expr.clone() }
    }
}

impl Propagator for ForwardCheck {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let mut open = None;
        for &v in &self.vars {
            if !s.is_fixed(v) {
                if open.is_some() {
                    return Ok(());
                }
                open = Some(v);
            }
        }
        match open {
            None => {
                if matches!(self.expr.eval(s), Ok(x) if x != 0) {
                    Ok(())
                } else {
                    Err(Empty)
                }
            }
            Some(u) => {
                if s.size(u) > SCAN_LIMIT {
                    return Ok(());
                }
                let keep: Vec<i64> = s
                    .dom(u)
                    .iter()
                    .filter(|&x| matches!(self.expr.eval(&Overlay { s, var: u, val: x }), Ok(r) if r != 0))
                    .collect();
                s.retain(u, |x| keep.binary_search(&x).is_ok()).map(|_| ())
            }
        }
    }

    fn strength(&self) -> Strength {
        Strength::Fc
    }

    fn idempotent(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dom::Dom;
    use crate::model::Op;

    #[test]
    fn sweep_prunes_unsupported_values() {
        let mut s = DomainStore::new(vec![Dom::range(0, 3), Dom::range(0, 3)]);
        let e = Expr::binary(Op::Eq, Expr::binary(Op::Add, Expr::Var(0), Expr::Var(1)), Expr::Const(6));
        Sweep::new(&e, None).propagate(&mut s).unwrap();
        assert_eq!(s.dom(0).values(), vec![3]);
        assert_eq!(s.dom(1).values(), vec![3]);
    }

    #[test]
    fn functional_sweep() {
        let mut s = DomainStore::new(vec![Dom::range(0, 9), Dom::range(1, 3), Dom::range(1, 3)]);
        let e = Expr::unary(Op::Abs, Expr::binary(Op::Sub, Expr::Var(1), Expr::Var(2)));
        Sweep::new(&e, Some(0)).propagate(&mut s).unwrap();
        assert_eq!(s.dom(0).values(), vec![0, 1, 2]);
    }

    #[test]
    fn forward_check_last_variable() {
        let mut s = DomainStore::new(vec![Dom::range(2, 2), Dom::range(0, 5)]);
        let e = Expr::binary(Op::Ne, Expr::binary(Op::Mul, Expr::Const(2), Expr::Var(0)), Expr::Var(1));
        ForwardCheck::new(&e).propagate(&mut s).unwrap();
        assert_eq!(s.dom(1).values(), vec![0, 1, 2, 3, 5]);
    }
}
