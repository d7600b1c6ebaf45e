use crate::engine::propagate::{Propagator, Strength};
use crate::engine::store::{DomainStore, Empty};
use crate::model::VarId;

/// Longest horizon handled by time-table filtering.
pub const HORIZON_CAP: i64 = 100_000;

/// Time-table filtering of `load(t) <= cap` for tasks with non-negative
/// heights.
pub struct TimeTable {
    origins: Vec<VarId>,
    lengths: Vec<i64>,
    heights: Vec<i64>,
    cap: i64,
}

impl TimeTable {
    pub fn new(origins: Vec<VarId>, lengths: Vec<i64>, heights: Vec<i64>, cap: i64) -> Self {
        TimeTable { origins, lengths, heights, cap }
    }

    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.origins.len()).filter(|&i| self.lengths[i] > 0 && self.heights[i] > 0)
    }
}

impl Propagator for TimeTable {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let tasks: Vec<usize> = self.active().collect();
        if tasks.is_empty() {
            return Ok(());
        }
        if tasks.iter().any(|&i| self.heights[i] > self.cap) {
            return Err(Empty);
        }
        let h0 = tasks.iter().map(|&i| s.min(self.origins[i])).min().unwrap() as i128;
        let h1 = tasks.iter().map(|&i| s.max(self.origins[i]) as i128 + self.lengths[i] as i128).max().unwrap();
        if h1 - h0 > HORIZON_CAP as i128 {
            return Ok(());
        }
        let (h0, width) = (h0 as i64, (h1 - h0) as usize);
        loop {
            let mut profile = vec![0i64; width];
            let part = |s: &DomainStore, i: usize| {
                let (lst, ect) = (s.max(self.origins[i]), s.min(self.origins[i]) + self.lengths[i]);
                (lst < ect).then_some((lst, ect))
            };
            for &i in &tasks {
                if let Some((a, b)) = part(s, i) {
                    for t in a..b {
                        profile[(t - h0) as usize] += self.heights[i];
                    }
                }
            }
            if profile.iter().any(|&p| p > self.cap) {
                return Err(Empty);
            }
            let mut changed = false;
            for &i in &tasks {
                let o = self.origins[i];
                let (l, h) = (self.lengths[i], self.heights[i]);
                let own = part(s, i);
                let conflict = |t: i64| {
                    let mine = own.is_some_and(|(a, b)| a <= t && t < b);
                    profile[(t - h0) as usize] - if mine { h } else { 0 } + h > self.cap
                };
                loop {
                    let st = s.min(o);
                    match (st..st + l).find(|&t| conflict(t)) {
                        Some(t) => changed |= s.set_min(o, t + 1)?,
                        None => break,
                    }
                }
                loop {
                    let st = s.max(o);
                    match (st..st + l).find(|&t| conflict(t)) {
                        Some(t) => changed |= s.set_max(o, t - l)?,
                        None => break,
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

    fn priority(&self) -> u8 {
        1
    }
}

/// Subtour elimination for circuit: self-loops leave the cycle.
pub struct Subtour {
    vars: Vec<VarId>,
}

impl Subtour {
    pub fn new(vars: Vec<VarId>) -> Self {
        Subtour { vars }
    }
}

impl Propagator for Subtour {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let n = self.vars.len();
        for &v in &self.vars {
            s.set_min(v, 0)?;
            s.set_max(v, n as i64 - 1)?;
        }
        let succ = |s: &DomainStore, i: usize| -> Option<usize> {
            let v = self.vars[i];
            s.is_fixed(v).then(|| s.value(v) as usize)
        };
        // A node chosen as somebody's successor is on the cycle.
        for i in 0..n {
            if let Some(j) = succ(s, i) {
                if j != i {
                    s.remove(self.vars[j], j as i64)?;
                }
            }
        }
        let mut pointed = vec![false; n];
        for i in 0..n {
            if let Some(j) = succ(s, i) {
                if j != i {
                    pointed[j] = true;
                }
            }
        }
        for start in 0..n {
            if succ(s, start).is_some_and(|j| j == start) {
                continue;
            }
            if pointed[start] {
                // Either inside a chain or on a closed cycle; closed cycles
                // are found from their smallest member.
                let mut cur = start;
                let mut len = 0;
                let mut closed = false;
                while let Some(j) = succ(s, cur) {
                    if j == cur {
                        break;
                    }
                    len += 1;
                    cur = j;
                    if cur == start {
                        closed = true;
                        break;
                    }
                    if len > n {
                        return Err(Empty);
                    }
                }
                if closed {
                    let mut on = vec![false; n];
                    let mut c = start;
                    loop {
                        on[c] = true;
                        c = succ(s, c).unwrap();
                        if c == start {
                            break;
                        }
                    }
                    for k in 0..n {
                        if !on[k] {
                            s.fix(self.vars[k], k as i64)?;
                        }
                    }
                    return Ok(());
                }
                continue;
            }
            // `start` heads a chain of fixed successors ending at `end`.
            let mut end = start;
            let mut in_chain = vec![false; n];
            in_chain[start] = true;
            while let Some(j) = succ(s, end) {
                if j == end || in_chain[j] {
                    break;
                }
                in_chain[j] = true;
                end = j;
            }
            if end == start {
                continue;
            }
            let outside_needed = (0..n).any(|k| !in_chain[k] && !s.contains(self.vars[k], k as i64));
            if outside_needed && !s.is_fixed(self.vars[end]) {
                s.remove(self.vars[end], start as i64)?;
            }
        }
        Ok(())
    }

    fn strength(&self) -> Strength {
        Strength::Fc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dom::Dom;

    #[test]
    fn compulsory_parts_push_starts() {
        let mut s = DomainStore::new(vec![Dom::range(0, 0), Dom::range(0, 5)]);
        TimeTable::new(vec![0, 1], vec![3, 2], vec![2, 2], 3).propagate(&mut s).unwrap();
        assert_eq!(s.min(1), 3);
    }

    #[test]
    fn closing_a_short_cycle_is_pruned() {
        // 0 -> 1 fixed; node 2 must be on the cycle, so 1 -> 0 is forbidden.
        let mut s = DomainStore::new(vec![Dom::range(1, 1), Dom::range(0, 2), Dom::from_domain(&crate::model::Domain::new(&[(0, 1)]).unwrap())]);
        Subtour::new(vec![0, 1, 2]).propagate(&mut s).unwrap();
        assert!(!s.contains(1, 0));
        assert!(!s.contains(1, 1));
    }
}
