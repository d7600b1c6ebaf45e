use super::dom::Dom;
use crate::model::VarId;

/// A domain would become empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Empty;

pub type Prune = Result<bool, Empty>;

/// Per-variable domains with a copy-on-first-write trail.
///
/// Level 0 is the root. `push_level` opens level `l + 1`; `backtrack_to(l)`
/// restores every domain to its state at the moment level `l + 1` was opened.
#[derive(Clone, Debug)]
pub struct DomainStore {
    doms: Vec<Dom>,
    trail: Vec<(VarId, Dom)>,
    marks: Vec<usize>,
    epochs: Vec<u64>,
    stamp: Vec<u64>,
    epoch: u64,
    next_epoch: u64,
    changed: Vec<VarId>,
    in_changed: Vec<bool>,
}

impl DomainStore {
    pub fn new(doms: Vec<Dom>) -> Self {
        let n = doms.len();
        DomainStore {
            doms,
            trail: Vec::new(),
            marks: Vec::new(),
            epochs: vec![0],
            stamp: vec![0; n],
            epoch: 0,
            next_epoch: 1,
            changed: Vec::new(),
            in_changed: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.doms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doms.is_empty()
    }

    pub fn dom(&self, v: VarId) -> &Dom {
        &self.doms[v]
    }

    pub fn min(&self, v: VarId) -> i64 {
        self.doms[v].min()
    }

    pub fn max(&self, v: VarId) -> i64 {
        self.doms[v].max()
    }

    pub fn size(&self, v: VarId) -> u64 {
        self.doms[v].size()
    }

    pub fn is_fixed(&self, v: VarId) -> bool {
        self.doms[v].is_fixed()
    }

    pub fn contains(&self, v: VarId, val: i64) -> bool {
        self.doms[v].contains(val)
    }

    /// The value of a fixed variable.
    pub fn value(&self, v: VarId) -> i64 {
        debug_assert!(self.is_fixed(v));
        self.doms[v].min()
    }

    pub fn level(&self) -> usize {
        self.marks.len()
    }

    pub fn push_level(&mut self) {
        self.marks.push(self.trail.len());
        self.epoch = self.next_epoch;
        self.next_epoch += 1;
        self.epochs.push(self.epoch);
    }

    pub fn backtrack_to(&mut self, level: usize) {
        while self.marks.len() > level {
            let mark = self.marks.pop().unwrap();
            self.epochs.pop();
            while self.trail.len() > mark {
                let (v, d) = self.trail.pop().unwrap();
                self.doms[v] = d;
            }
        }
        self.epoch = *self.epochs.last().unwrap();
        for v in self.changed.drain(..) {
            self.in_changed[v] = false;
        }
    }

    fn save(&mut self, v: VarId) {
        if !self.marks.is_empty() && self.stamp[v] != self.epoch {
            self.trail.push((v, self.doms[v].clone()));
            self.stamp[v] = self.epoch;
        }
        if !self.in_changed[v] {
            self.in_changed[v] = true;
            self.changed.push(v);
        }
    }

    /// Variables modified since the last call.
    pub fn take_changed(&mut self) -> Vec<VarId> {
        let out = std::mem::take(&mut self.changed);
        for &v in &out {
            self.in_changed[v] = false;
        }
        out
    }

    pub fn remove(&mut self, v: VarId, val: i64) -> Prune {
        let d = &self.doms[v];
        if !d.contains(val) {
            return Ok(false);
        }
        if d.size() == 1 {
            return Err(Empty);
        }
        self.save(v);
        self.doms[v].remove(val);
        Ok(true)
    }

    pub fn set_min(&mut self, v: VarId, val: i64) -> Prune {
        let d = &self.doms[v];
        if val <= d.min() {
            return Ok(false);
        }
        if val > d.max() {
            return Err(Empty);
        }
        self.save(v);
        self.doms[v].set_min(val);
        Ok(true)
    }

    pub fn set_max(&mut self, v: VarId, val: i64) -> Prune {
        let d = &self.doms[v];
        if val >= d.max() {
            return Ok(false);
        }
        if val < d.min() {
            return Err(Empty);
        }
        self.save(v);
        self.doms[v].set_max(val);
        Ok(true)
    }

    /// Bounds given as i128; values beyond the i64 range are clamped.
    pub fn set_min_wide(&mut self, v: VarId, val: i128) -> Prune {
        if val > i64::MAX as i128 {
            return Err(Empty);
        }
        self.set_min(v, val.max(i64::MIN as i128) as i64)
    }

    pub fn set_max_wide(&mut self, v: VarId, val: i128) -> Prune {
        if val < i64::MIN as i128 {
            return Err(Empty);
        }
        self.set_max(v, val.min(i64::MAX as i128) as i64)
    }

    pub fn fix(&mut self, v: VarId, val: i64) -> Prune {
        let d = &self.doms[v];
        if !d.contains(val) {
            return Err(Empty);
        }
        if d.size() == 1 {
            return Ok(false);
        }
        self.save(v);
        self.doms[v].fix(val);
        Ok(true)
    }

    /// Keeps the values accepted by `keep`.
    pub fn retain(&mut self, v: VarId, keep: impl FnMut(i64) -> bool) -> Prune {
        let mut d = self.doms[v].clone();
        let before = d.size();
        let after = d.retain(keep);
        if after == 0 {
            return Err(Empty);
        }
        if after == before {
            return Ok(false);
        }
        self.save(v);
        self.doms[v] = d;
        Ok(true)
    }

    /// Current values of the given variables; all must be fixed.
    pub fn values_of(&self, vars: &[VarId]) -> Vec<i64> {
        vars.iter().map(|&v| self.value(v)).collect()
    }
}

impl crate::model::Values for DomainStore {
    fn value(&self, v: VarId) -> i64 {
        self.doms[v].min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Clone, Debug)]
    enum Act {
        Push,
        Pop(usize),
        Remove(usize, i64),
        Min(usize, i64),
        Max(usize, i64),
        Fix(usize, i64),
    }

    fn act() -> impl Strategy<Value = Act> {
        prop_oneof![
            Just(Act::Push),
            (0usize..4).prop_map(Act::Pop),
            (0usize..4, 0i64..10).prop_map(|(v, x)| Act::Remove(v, x)),
            (0usize..4, 0i64..10).prop_map(|(v, x)| Act::Min(v, x)),
            (0usize..4, 0i64..10).prop_map(|(v, x)| Act::Max(v, x)),
            (0usize..4, 0i64..10).prop_map(|(v, x)| Act::Fix(v, x)),
        ]
    }

    proptest! {
        #[test]
        fn backtracking_restores_snapshots(acts in proptest::collection::vec(act(), 0..60)) {
            let init = vec![Dom::range(0, 9), Dom::range(0, 9), Dom::range(2, 5), Dom::range(0, 3000)];
            let mut s = DomainStore::new(init);
            let mut snaps: Vec<Vec<Dom>> = Vec::new();
            for a in acts {
                let a2 = a.clone();
                let before: Vec<Dom> = (0..4).map(|v| s.dom(v).clone()).collect();
                let r = match a2 {
                    Act::Push => { snaps.push(before.clone()); s.push_level(); Ok(false) }
                    Act::Pop(k) => {
                        let target = s.level().saturating_sub(k + 1);
                        if s.level() > 0 {
                            s.backtrack_to(target);
                            snaps.truncate(target + 1);
                            let want = snaps.pop().unwrap();
                            for v in 0..4 { prop_assert_eq!(s.dom(v), &want[v]); }
                        }
                        Ok(false)
                    }
                    Act::Remove(v, x) => s.remove(v, x),
                    Act::Min(v, x) => s.set_min(v, x),
                    Act::Max(v, x) => s.set_max(v, x),
                    Act::Fix(v, x) => s.fix(v, x),
                };
                prop_assert_eq!(snaps.len(), s.level());
                let popped = matches!(a, Act::Pop(_));
                for v in 0..4 {
                    prop_assert!(popped || s.dom(v).values().iter().all(|x| before[v].contains(*x)));
                    if r.is_err() { prop_assert_eq!(s.dom(v), &before[v]); }
                }
            }
        }
    }
}
