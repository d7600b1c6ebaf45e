use std::collections::BTreeSet;

use crate::engine::propagate::{Propagator, Strength};
use crate::engine::props::linear::SCAN_LIMIT;
use crate::engine::store::{DomainStore, Empty};
use crate::model::VarId;

/// `count = |{i : xᵢ ∈ values}|`.
pub struct Count {
    vars: Vec<VarId>,
    values: Vec<i64>,
    count: VarId,
}

impl Count {
    pub fn new(vars: Vec<VarId>, mut values: Vec<i64>, count: VarId) -> Self {
        values.sort_unstable();
        values.dedup();
        Count { vars, values, count }
    }

    fn inside(&self, s: &DomainStore, v: VarId) -> bool {
        if s.size(v) > self.values.len() as u64 {
            return false;
        }
        s.dom(v).iter().all(|x| self.values.binary_search(&x).is_ok())
    }

    fn touches(&self, s: &DomainStore, v: VarId) -> bool {
        self.values.iter().any(|&x| s.contains(v, x))
    }
}

impl Propagator for Count {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        loop {
            let mut must = 0i64;
            let mut may = 0i64;
            let mut open = Vec::new();
            for &v in &self.vars {
                if self.inside(s, v) {
                    must += 1;
                    may += 1;
                } else if self.touches(s, v) {
                    may += 1;
                    open.push(v);
                }
            }
            let mut changed = s.set_min(self.count, must)?;
            changed |= s.set_max(self.count, may)?;
            if s.max(self.count) == must {
                for &v in &open {
                    for &x in &self.values {
                        changed |= s.remove(v, x)?;
                    }
                }
            } else if s.min(self.count) == may {
                for &v in &open {
                    if s.size(v) <= SCAN_LIMIT {
                        changed |= s.retain(v, |x| self.values.binary_search(&x).is_ok())?;
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn strength(&self) -> Strength {
        Strength::Bounds
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `count` equals the number of distinct values; bounds only.
pub struct NValues {
    vars: Vec<VarId>,
    count: VarId,
}

impl NValues {
    pub fn new(vars: Vec<VarId>, count: VarId) -> Self {
        NValues { vars, count }
    }
}

impl Propagator for NValues {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let fixed: BTreeSet<i64> = self.vars.iter().filter(|&&v| s.is_fixed(v)).map(|&v| s.value(v)).collect();
        let mut upper = self.vars.len() as u64;
        let total: u64 = self.vars.iter().map(|&v| s.size(v)).fold(0, u64::saturating_add);
        if total <= SCAN_LIMIT {
            let union: BTreeSet<i64> = self.vars.iter().flat_map(|&v| s.dom(v).values()).collect();
            upper = upper.min(union.len() as u64);
        }
        let lower = (fixed.len() as u64).max(u64::from(!self.vars.is_empty()));
        s.set_min(self.count, lower as i64)?;
        s.set_max(self.count, upper as i64)?;
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::CheckOnly
    }
}

/// `m = max(xs)`, or `m = min(xs)` when `minimum` is set.
pub struct Extremum {
    vars: Vec<VarId>,
    m: VarId,
    minimum: bool,
}

impl Extremum {
    pub fn new(vars: Vec<VarId>, m: VarId, minimum: bool) -> Self {
        Extremum { vars, m, minimum }
    }

    fn run_max(&self, s: &mut DomainStore, neg: bool) -> Result<bool, Empty> {
        // With `neg`, works on negated values so `min` reuses the max rules.
        let lo = |s: &DomainStore, v: VarId| if neg { -(s.max(v) as i128) } else { s.min(v) as i128 };
        let hi = |s: &DomainStore, v: VarId| if neg { -(s.min(v) as i128) } else { s.max(v) as i128 };
        let set_lo = |s: &mut DomainStore, v: VarId, x: i128| if neg { s.set_max_wide(v, -x) } else { s.set_min_wide(v, x) };
        let set_hi = |s: &mut DomainStore, v: VarId, x: i128| if neg { s.set_min_wide(v, -x) } else { s.set_max_wide(v, x) };
        let mut changed = false;
        let max_lo = self.vars.iter().map(|&v| lo(s, v)).max().unwrap();
        let max_hi = self.vars.iter().map(|&v| hi(s, v)).max().unwrap();
        changed |= set_lo(s, self.m, max_lo)?;
        changed |= set_hi(s, self.m, max_hi)?;
        let m_hi = hi(s, self.m);
        let m_lo = lo(s, self.m);
        for &v in &self.vars {
            changed |= set_hi(s, v, m_hi)?;
        }
        let reach: Vec<VarId> = self.vars.iter().copied().filter(|&v| hi(s, v) >= m_lo).collect();
        match reach.len() {
            0 => return Err(Empty),
            1 => changed |= set_lo(s, reach[0], m_lo)?,
            _ => {}
        }
        Ok(changed)
    }
}

impl Propagator for Extremum {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        if self.vars.is_empty() {
            return Err(Empty);
        }
        while self.run_max(s, self.minimum)? {}
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::Bounds
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `value = list[index]` with a zero-based index.
pub struct Element {
    list: Vec<VarId>,
    index: VarId,
    value: VarId,
}

impl Element {
    pub fn new(list: Vec<VarId>, index: VarId, value: VarId) -> Self {
        Element { list, index, value }
    }

    fn overlaps(s: &DomainStore, x: VarId, y: VarId) -> bool {
        if s.max(x) < s.min(y) || s.max(y) < s.min(x) {
            return false;
        }
        let (small, other) = if s.size(x) <= s.size(y) { (x, y) } else { (y, x) };
        s.size(small) > SCAN_LIMIT || s.dom(small).iter().any(|v| s.contains(other, v))
    }
}

impl Propagator for Element {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let n = self.list.len() as i64;
        s.set_min(self.index, 0)?;
        s.set_max(self.index, n - 1)?;
        loop {
            let mut changed = false;
            let value = self.value;
            if s.size(self.index) <= SCAN_LIMIT {
                let keep: Vec<i64> =
                    s.dom(self.index).iter().filter(|&i| Element::overlaps(s, self.list[i as usize], value)).collect();
                changed |= s.retain(self.index, |i| keep.binary_search(&i).is_ok())?;
            }
            let idx: Vec<i64> = s.dom(self.index).values();
            if idx.len() == 1 {
                let x = self.list[idx[0] as usize];
                changed |= s.set_min(value, s.min(x))?;
                changed |= s.set_max(value, s.max(x))?;
                changed |= s.set_min(x, s.min(value))?;
                changed |= s.set_max(x, s.max(value))?;
                if s.size(x) <= SCAN_LIMIT && s.size(value) <= SCAN_LIMIT {
                    let common: Vec<i64> = s.dom(x).iter().filter(|&v| s.contains(value, v)).collect();
                    changed |= s.retain(x, |v| common.binary_search(&v).is_ok())?;
                    changed |= s.retain(value, |v| common.binary_search(&v).is_ok())?;
                }
            } else {
                let lo = idx.iter().map(|&i| s.min(self.list[i as usize])).min().unwrap();
                let hi = idx.iter().map(|&i| s.max(self.list[i as usize])).max().unwrap();
                changed |= s.set_min(value, lo)?;
                changed |= s.set_max(value, hi)?;
                let total: u64 = idx.iter().map(|&i| s.size(self.list[i as usize])).fold(0, u64::saturating_add);
                if total <= SCAN_LIMIT && s.size(value) <= SCAN_LIMIT {
                    let keep: Vec<i64> = s
                        .dom(value)
                        .iter()
                        .filter(|&v| idx.iter().any(|&i| s.contains(self.list[i as usize], v)))
                        .collect();
                    changed |= s.retain(value, |v| keep.binary_search(&v).is_ok())?;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn strength(&self) -> Strength {
        Strength::Gac
    }

    fn idempotent(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dom::Dom;

    #[test]
    fn count_saturation() {
        let mut s = DomainStore::new(vec![Dom::range(1, 1), Dom::range(0, 1), Dom::range(0, 1), Dom::range(1, 1)]);
        Count::new(vec![0, 1, 2], vec![1], 3).propagate(&mut s).unwrap();
        assert_eq!(s.dom(1).values(), vec![0]);
        assert_eq!(s.dom(2).values(), vec![0]);
    }

    #[test]
    fn maximum_bounds() {
        let mut s = DomainStore::new(vec![Dom::range(0, 3), Dom::range(0, 5), Dom::range(4, 9)]);
        Extremum::new(vec![0, 1], 2, false).propagate(&mut s).unwrap();
        assert_eq!((s.min(1), s.max(1)), (4, 5));
        assert_eq!((s.min(2), s.max(2)), (4, 5));
    }

    #[test]
    fn minimum_bounds() {
        let mut s = DomainStore::new(vec![Dom::range(2, 6), Dom::range(3, 8), Dom::range(0, 9)]);
        Extremum::new(vec![0, 1], 2, true).propagate(&mut s).unwrap();
        assert_eq!((s.min(2), s.max(2)), (2, 6));
    }

    #[test]
    fn element_filters_index() {
        let mut s = DomainStore::new(vec![Dom::range(0, 1), Dom::range(5, 6), Dom::range(0, 5), Dom::range(5, 5)]);
        Element::new(vec![0, 1], 2, 3).propagate(&mut s).unwrap();
        assert_eq!(s.dom(2).values(), vec![1]);
        assert_eq!(s.dom(1).values(), vec![5]);
    }
}
