use crate::engine::propagate::{Propagator, Strength};
use crate::engine::props::linear::SCAN_LIMIT;
use crate::engine::store::{DomainStore, Empty};
use crate::model::VarId;

/// All variables take the same value.
pub struct AllEqual {
    vars: Vec<VarId>,
}

impl AllEqual {
    pub fn new(vars: Vec<VarId>) -> Self {
        AllEqual { vars }
    }
}

impl Propagator for AllEqual {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let Some(&smallest) = self.vars.iter().min_by_key(|&&v| s.size(v)) else {
            return Ok(());
        };
        if s.size(smallest) <= SCAN_LIMIT {
            let common: Vec<i64> =
                s.dom(smallest).iter().filter(|&x| self.vars.iter().all(|&v| s.contains(v, x))).collect();
            for &v in &self.vars {
                s.retain(v, |x| common.binary_search(&x).is_ok())?;
            }
        } else {
            let lo = self.vars.iter().map(|&v| s.min(v)).max().unwrap();
            let hi = self.vars.iter().map(|&v| s.max(v)).min().unwrap();
            for &v in &self.vars {
                s.set_min(v, lo)?;
                s.set_max(v, hi)?;
            }
        }
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::Gac
    }
}

/// `a <lex b` (strict) or `a <=lex b`.
pub struct LexLe {
    a: Vec<VarId>,
    b: Vec<VarId>,
    strict: bool,
}

impl LexLe {
    pub fn new(a: Vec<VarId>, b: Vec<VarId>, strict: bool) -> Self {
        LexLe { a, b, strict }
    }
}

impl Propagator for LexLe {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        if self.a.len() != self.b.len() {
            return Ok(());
        }
        let n = self.a.len();
        for i in 0..n {
            let (x, y) = (self.a[i], self.b[i]);
            if x == y {
                continue;
            }
            // The prefix before i is fixed and equal.
            s.set_max(x, s.max(y))?;
            s.set_min(y, s.min(x))?;
            if s.is_fixed(x) && s.is_fixed(y) && s.value(x) == s.value(y) {
                continue;
            }
            if self.strict && i + 1 == n {
                s.set_max_wide(x, s.max(y) as i128 - 1)?;
                s.set_min_wide(y, s.min(x) as i128 + 1)?;
            }
            return Ok(());
        }
        if self.strict {
            Err(Empty)
        } else {
            Ok(())
        }
    }

    fn strength(&self) -> Strength {
        Strength::Bounds
    }
}

/// Each listed value appears only after the previous one has appeared.
pub struct Precedence {
    vars: Vec<VarId>,
    values: Vec<i64>,
}

impl Precedence {
    pub fn new(vars: Vec<VarId>, values: Vec<i64>) -> Self {
        Precedence { vars, values }
    }
}

impl Propagator for Precedence {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let mut earliest: Option<usize> = None;
        for (j, &val) in self.values.iter().enumerate() {
            let from = match (j, earliest) {
                (0, _) => 0,
                (_, Some(e)) => e + 1,
                (_, None) => self.vars.len(),
            };
            if j > 0 {
                for &v in &self.vars[..from.min(self.vars.len())] {
                    s.remove(v, val)?;
                }
            }
            earliest = (from..self.vars.len()).find(|&p| s.contains(self.vars[p], val));
        }
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::Bounds
    }
}

/// Two equal-length vectors differ in at least one position.
pub struct VectorsDiffer {
    a: Vec<VarId>,
    b: Vec<VarId>,
}

impl VectorsDiffer {
    pub fn new(a: Vec<VarId>, b: Vec<VarId>) -> Self {
        VectorsDiffer { a, b }
    }
}

fn disjoint(s: &DomainStore, x: VarId, y: VarId) -> bool {
    if s.max(x) < s.min(y) || s.max(y) < s.min(x) {
        return true;
    }
    let (small, other) = if s.size(x) <= s.size(y) { (x, y) } else { (y, x) };
    s.size(small) <= 64 && s.dom(small).iter().all(|v| !s.contains(other, v))
}

impl Propagator for VectorsDiffer {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let mut open: Option<usize> = None;
        for i in 0..self.a.len() {
            let (x, y) = (self.a[i], self.b[i]);
            if x == y {
                continue;
            }
            if s.is_fixed(x) && s.is_fixed(y) {
                if s.value(x) != s.value(y) {
                    return Ok(());
                }
                continue;
            }
            if disjoint(s, x, y) {
                return Ok(());
            }
            if open.is_some() {
                return Ok(());
            }
            open = Some(i);
        }
        match open {
            None => Err(Empty),
            Some(i) => {
                let (x, y) = (self.a[i], self.b[i]);
                if s.is_fixed(x) {
                    s.remove(y, s.value(x))?;
                } else if s.is_fixed(y) {
                    s.remove(x, s.value(y))?;
                }
                Ok(())
            }
        }
    }

    fn strength(&self) -> Strength {
        Strength::Fc
    }
}

/// Fixes every variable to its listed value.
pub struct Instantiation {
    vars: Vec<VarId>,
    values: Vec<i64>,
}

impl Instantiation {
    pub fn new(vars: Vec<VarId>, values: Vec<i64>) -> Self {
        Instantiation { vars, values }
    }
}

impl Propagator for Instantiation {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        for (&v, &x) in self.vars.iter().zip(&self.values) {
            s.fix(v, x)?;
        }
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::Gac
    }

    fn idempotent(&self) -> bool {
        true
    }
}
