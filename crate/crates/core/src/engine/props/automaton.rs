use std::collections::HashMap;

use crate::engine::propagate::{Propagator, Strength};
use crate::engine::store::{DomainStore, Empty};
use crate::model::{Transition, VarId};

/// Layered-graph filtering for automata and decision diagrams.
pub struct Layered {
    scope: Vec<VarId>,
    start: Option<usize>,
    finals: Vec<bool>,
    out: Vec<Vec<(i64, usize)>>,
}

impl Layered {
    /// Accepts words read from `start` that end in a state of `finals`.
    pub fn new(scope: Vec<VarId>, start: Option<&str>, finals: &[&str], transitions: &[Transition]) -> Self {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let intern = |name: &str, ids: &mut HashMap<String, usize>| {
            let n = ids.len();
            *ids.entry(name.to_string()).or_insert(n)
        };
        let mut edges = Vec::new();
        for t in transitions {
            let a = intern(&t.from, &mut ids);
            let b = intern(&t.to, &mut ids);
            edges.push((a, t.value, b));
        }
        let start = start.map(|s| intern(s, &mut ids));
        let fin: Vec<usize> = finals.iter().map(|f| intern(f, &mut ids)).collect();
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        for (a, v, b) in edges {
            out[a].push((v, b));
        }
        let mut finals = vec![false; n];
        for f in fin {
            finals[f] = true;
        }
        Layered { scope, start, finals, out }
    }
}

impl Propagator for Layered {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        let Some(start) = self.start else {
            return Err(Empty);
        };
        let n = self.scope.len();
        let q = self.out.len();
        let mut fwd = vec![vec![false; q]; n + 1];
        fwd[0][start] = true;
        for i in 0..n {
            let x = self.scope[i];
            for a in 0..q {
                if fwd[i][a] {
                    for &(v, b) in &self.out[a] {
                        if s.contains(x, v) {
                            fwd[i + 1][b] = true;
                        }
                    }
                }
            }
        }
        let mut bwd: Vec<bool> = (0..q).map(|a| fwd[n][a] && self.finals[a]).collect();
        let mut supports: Vec<Vec<i64>> = vec![Vec::new(); n];
        for i in (0..n).rev() {
            let x = self.scope[i];
            let mut prev = vec![false; q];
            for a in 0..q {
                if !fwd[i][a] {
                    continue;
                }
                for &(v, b) in &self.out[a] {
                    if bwd[b] && s.contains(x, v) {
                        prev[a] = true;
                        supports[i].push(v);
                    }
                }
            }
            bwd = prev;
        }
        if !bwd[start] {
            return Err(Empty);
        }
        for (i, mut sup) in supports.into_iter().enumerate() {
            sup.sort_unstable();
            sup.dedup();
            s.retain(self.scope[i], |v| sup.binary_search(&v).is_ok())?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dom::Dom;

    #[test]
    fn keeps_only_accepted_paths() {
        let ts = vec![Transition::new("a", 0, "a"), Transition::new("a", 1, "b"), Transition::new("b", 1, "b")];
        let mut s = DomainStore::new(vec![Dom::range(0, 1), Dom::range(0, 1), Dom::range(0, 0)]);
        assert!(Layered::new(vec![0, 1, 2], Some("a"), &["b"], &ts).propagate(&mut s).is_err());
        let mut s = DomainStore::new(vec![Dom::range(0, 1), Dom::range(0, 0), Dom::range(0, 1)]);
        Layered::new(vec![0, 1, 2], Some("a"), &["b"], &ts).propagate(&mut s).unwrap();
        assert_eq!(s.dom(0).values(), vec![0]);
        assert_eq!(s.dom(2).values(), vec![1]);
    }
}
