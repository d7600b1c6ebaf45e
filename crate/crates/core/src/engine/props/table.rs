use std::collections::HashMap;

use crate::engine::propagate::{Propagator, Strength};
use crate::engine::store::{DomainStore, Empty};
use crate::model::{Cell, VarId};

/// Positive table, possibly starred: generalized arc consistency with
/// per-value support lists and residues.
pub struct PositiveTable {
    scope: Vec<VarId>,
    tuples: Vec<Vec<Cell>>,
    by_value: Vec<HashMap<i64, Vec<u32>>>,
    stars: Vec<Vec<u32>>,
    residue: Vec<HashMap<i64, u32>>,
}

impl PositiveTable {
    pub fn new(scope: Vec<VarId>, tuples: Vec<Vec<Cell>>) -> Self {
        let r = scope.len();
        let mut by_value: Vec<HashMap<i64, Vec<u32>>> = vec![HashMap::new(); r];
        let mut stars = vec![Vec::new(); r];
        for (ti, t) in tuples.iter().enumerate() {
            for (p, c) in t.iter().enumerate() {
                match c {
                    Cell::Star => stars[p].push(ti as u32),
                    Cell::Val(v) => by_value[p].entry(*v).or_default().push(ti as u32),
                }
            }
        }
        PositiveTable { scope, tuples, by_value, stars, residue: vec![HashMap::new(); r] }
    }

    fn valid(&self, s: &DomainStore, t: u32) -> bool {
        self.tuples[t as usize].iter().zip(&self.scope).all(|(c, &v)| match c {
            Cell::Star => true,
            Cell::Val(x) => s.contains(v, *x),
        })
    }

    fn find_support(&mut self, s: &DomainStore, p: usize, x: i64) -> bool {
        if let Some(&t) = self.residue[p].get(&x) {
            if self.valid(s, t) {
                return true;
            }
        }
        let found = self.by_value[p]
            .get(&x)
            .into_iter()
            .flatten()
            .chain(self.stars[p].iter())
            .copied()
            .find(|&t| self.valid(s, t));
        match found {
            Some(t) => {
                self.residue[p].insert(x, t);
                true
            }
            None => false,
        }
    }
}

impl Propagator for PositiveTable {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        loop {
            let mut changed = false;
            for p in 0..self.scope.len() {
                let v = self.scope[p];
                let candidates: Vec<i64> = if self.stars[p].is_empty() && (s.size(v) as usize) > self.by_value[p].len() {
                    let mut keys: Vec<i64> = self.by_value[p].keys().copied().filter(|&x| s.contains(v, x)).collect();
                    keys.sort_unstable();
                    keys
                } else {
                    s.dom(v).values()
                };
                let keep: Vec<i64> = candidates.into_iter().filter(|&x| self.find_support(s, p, x)).collect();
                changed |= s.retain(v, |x| keep.binary_search(&x).is_ok())?;
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

    fn priority(&self) -> u8 {
        1
    }
}

/// Negative table: forbids a tuple once all but one of its cells are
/// certain to match.
pub struct NegativeTable {
    scope: Vec<VarId>,
    tuples: Vec<Vec<Cell>>,
}

impl NegativeTable {
    pub fn new(scope: Vec<VarId>, tuples: Vec<Vec<Cell>>) -> Self {
        NegativeTable { scope, tuples }
    }
}

impl Propagator for NegativeTable {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        loop {
            let mut changed = false;
            for t in &self.tuples {
                let mut open: Option<(usize, Cell)> = None;
                let mut possible = true;
                let mut several = false;
                for (p, (&c, &v)) in t.iter().zip(&self.scope).enumerate() {
                    match c {
                        Cell::Star => {}
                        Cell::Val(x) => {
                            if !s.contains(v, x) {
                                possible = false;
                                break;
                            }
                            if !s.is_fixed(v) {
                                if open.is_some() {
                                    several = true;
                                }
                                open = Some((p, c));
                            }
                        }
                    }
                }
                if !possible || several {
                    continue;
                }
                match open {
                    None => return Err(Empty),
                    Some((p, Cell::Val(x))) => changed |= s.remove(self.scope[p], x)?,
                    Some((_, Cell::Star)) => unreachable!(),
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn strength(&self) -> Strength {
        Strength::Fc
    }

    fn idempotent(&self) -> bool {
        true
    }

    fn priority(&self) -> u8 {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dom::Dom;

    #[test]
    fn support_scan() {
        let mut s = DomainStore::new(vec![Dom::range(0, 1), Dom::range(0, 0)]);
        let tuples = vec![vec![Cell::Val(0), Cell::Val(1)], vec![Cell::Val(1), Cell::Val(0)]];
        PositiveTable::new(vec![0, 1], tuples).propagate(&mut s).unwrap();
        assert_eq!(s.dom(0).values(), vec![1]);
    }

    #[test]
    fn starred_cells_support_everything() {
        let mut s = DomainStore::new(vec![Dom::range(0, 3), Dom::range(0, 3)]);
        let tuples = vec![vec![Cell::Val(1), Cell::Star]];
        PositiveTable::new(vec![0, 1], tuples).propagate(&mut s).unwrap();
        assert_eq!(s.dom(0).values(), vec![1]);
        assert_eq!(s.dom(1).values(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn negative_removes_last_cell() {
        let mut s = DomainStore::new(vec![Dom::range(2, 2), Dom::range(0, 3)]);
        let tuples = vec![vec![Cell::Val(2), Cell::Val(3)], vec![Cell::Star, Cell::Val(0)]];
        NegativeTable::new(vec![0, 1], tuples).propagate(&mut s).unwrap();
        assert_eq!(s.dom(1).values(), vec![1, 2]);
    }
}
