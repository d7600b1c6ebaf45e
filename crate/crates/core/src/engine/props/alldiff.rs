use crate::engine::propagate::{Propagator, Strength};
use crate::engine::store::{DomainStore, Empty};
use crate::model::VarId;

/// Largest scope given Hall-interval reasoning.
const HALL_LIMIT: usize = 128;
/// Largest number of variable-value edges given matching-based filtering.
const MATCHING_LIMIT: u64 = 1 << 14;

/// Pairwise value elimination, then matching-based domain filtering when
/// the value graph is small, Hall-interval bounds filtering otherwise.
pub struct AllDifferent {
    vars: Vec<VarId>,
    except: Vec<i64>,
    repeated: bool,
}

impl AllDifferent {
    pub fn new(vars: Vec<VarId>, except: Vec<i64>) -> Self {
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let repeated = sorted.len() < vars.len();
        AllDifferent { vars, except, repeated }
    }

    fn eliminate(&self, s: &mut DomainStore) -> Result<bool, Empty> {
        let mut any = false;
        let mut done = vec![false; self.vars.len()];
        loop {
            let mut changed = false;
            for i in 0..self.vars.len() {
                let v = self.vars[i];
                if done[i] || !s.is_fixed(v) {
                    continue;
                }
                done[i] = true;
                let x = s.value(v);
                if self.except.contains(&x) {
                    continue;
                }
                for (j, &w) in self.vars.iter().enumerate() {
                    if j != i {
                        if w == v {
                            return Err(Empty);
                        }
                        changed |= s.remove(w, x)?;
                    }
                }
            }
            any |= changed;
            if !changed {
                return Ok(any);
            }
        }
    }

    fn hall(&self, s: &mut DomainStore) -> Result<bool, Empty> {
        let n = self.vars.len();
        let mut mins: Vec<i64> = self.vars.iter().map(|&v| s.min(v)).collect();
        let mut maxs: Vec<i64> = self.vars.iter().map(|&v| s.max(v)).collect();
        mins.sort_unstable();
        mins.dedup();
        maxs.sort_unstable();
        maxs.dedup();
        let mut changed = false;
        for &a in &mins {
            for &b in maxs.iter().filter(|&&b| b >= a) {
                let inside: Vec<bool> = self.vars.iter().map(|&v| s.min(v) >= a && s.max(v) <= b).collect();
                let count = inside.iter().filter(|&&x| x).count() as i128;
                let width = b as i128 - a as i128 + 1;
                if count > width {
                    return Err(Empty);
                }
                if count == width && (count as usize) < n {
                    for (k, &v) in self.vars.iter().enumerate() {
                        if inside[k] {
                            continue;
                        }
                        if s.min(v) >= a && s.min(v) <= b {
                            changed |= s.set_min_wide(v, b as i128 + 1)?;
                        }
                        if s.max(v) >= a && s.max(v) <= b {
                            changed |= s.set_max_wide(v, a as i128 - 1)?;
                        }
                    }
                }
            }
        }
        Ok(changed)
    }
}

/// Edges `(var, value)` of the value graph that belong to some maximum
/// matching covering every variable, or `None` when no such matching exists.
fn supported_edges(adj: &[Vec<usize>], num_values: usize) -> Option<Vec<Vec<bool>>> {
    let n = adj.len();
    let mut var_of: Vec<Option<usize>> = vec![None; num_values];
    let mut val_of: Vec<Option<usize>> = vec![None; n];
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], var_of: &mut [Option<usize>], val_of: &mut [Option<usize>]) -> bool {
        for &a in &adj[i] {
            if seen[a] {
                continue;
            }
            seen[a] = true;
            if var_of[a].map_or(true, |j| augment(j, adj, seen, var_of, val_of)) {
                var_of[a] = Some(i);
                val_of[i] = Some(a);
                return true;
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; num_values];
        if !augment(i, adj, &mut seen, &mut var_of, &mut val_of) {
            return None;
        }
    }
    // Nodes: variables 0..n, values n..n+m. Matched edges point from the
    // variable to its value, the others from the value to the variable.
    let total = n + num_values;
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); total];
    for i in 0..n {
        for &a in &adj[i] {
            if val_of[i] == Some(a) {
                out[i].push(n + a);
            } else {
                out[n + a].push(i);
            }
        }
    }
    // Nodes reachable from a free value by an alternating path.
    let mut reach = vec![false; total];
    let mut stack: Vec<usize> = (0..num_values).filter(|&a| var_of[a].is_none()).map(|a| n + a).collect();
    for &u in &stack {
        reach[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &w in &out[u] {
            if !reach[w] {
                reach[w] = true;
                stack.push(w);
            }
        }
    }
    let comp = tarjan(&out);
    Some(
        (0..n)
            .map(|i| {
                adj[i]
                    .iter()
                    .map(|&a| val_of[i] == Some(a) || reach[n + a] || comp[i] == comp[n + a])
                    .collect()
            })
            .collect(),
    )
}

/// Strongly connected component index of every node, iteratively.
fn tarjan(out: &[Vec<usize>]) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let n = out.len();
    let (mut index, mut low, mut comp) = (vec![NONE; n], vec![0; n], vec![NONE; n]);
    let mut on_stack = vec![false; n];
    let (mut stack, mut next, mut ncomp) = (Vec::new(), 0, 0);
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (u, ref mut k)) = call.last_mut() {
            if *k < out[u].len() {
                let w = out[u][*k];
                *k += 1;
                if index[w] == NONE {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[u] = low[u].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(p, _)) = call.last() {
                low[p] = low[p].min(low[u]);
            }
            if low[u] == index[u] {
                loop {
                    let w = stack.pop().expect("component member");
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if w == u {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    comp
}

impl AllDifferent {
    /// Removes every value without support in a covering matching.
    /// Returns `None` when the value graph is too large to build.
    fn matching(&self, s: &mut DomainStore) -> Option<Result<bool, Empty>> {
        let edges: u64 = self.vars.iter().map(|&v| s.size(v)).sum();
        if edges > MATCHING_LIMIT {
            return None;
        }
        let mut values: Vec<i64> = self.vars.iter().flat_map(|&v| s.dom(v).iter()).collect();
        values.sort_unstable();
        values.dedup();
        let adj: Vec<Vec<usize>> = self
            .vars
            .iter()
            .map(|&v| s.dom(v).iter().map(|x| values.binary_search(&x).expect("value listed")).collect())
            .collect();
        let Some(keep) = supported_edges(&adj, values.len()) else {
            return Some(Err(Empty));
        };
        let mut changed = false;
        for (i, &v) in self.vars.iter().enumerate() {
            for (k, &a) in adj[i].iter().enumerate() {
                if !keep[i][k] {
                    match s.remove(v, values[a]) {
                        Ok(c) => changed |= c,
                        Err(e) => return Some(Err(e)),
                    }
                }
            }
        }
        Some(Ok(changed))
    }
}

impl Propagator for AllDifferent {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        if self.repeated && self.except.is_empty() {
            return Err(Empty);
        }
        loop {
            self.eliminate(s)?;
            if !self.except.is_empty() {
                return Ok(());
            }
            let changed = match self.matching(s) {
                Some(r) => r?,
                None => self.vars.len() <= HALL_LIMIT && self.hall(s)?,
            };
            if !changed {
                return Ok(());
            }
        }
    }

    fn strength(&self) -> Strength {
        Strength::Gac
    }

    fn priority(&self) -> u8 {
        1
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
    fn pigeonhole_fails() {
        let mut s = DomainStore::new(vec![Dom::range(1, 2); 3]);
        assert!(AllDifferent::new(vec![0, 1, 2], vec![]).propagate(&mut s).is_err());
    }

    #[test]
    fn hall_interval_pushes_bounds() {
        let mut s = DomainStore::new(vec![Dom::range(1, 2), Dom::range(1, 2), Dom::range(1, 4)]);
        AllDifferent::new(vec![0, 1, 2], vec![]).propagate(&mut s).unwrap();
        assert_eq!(s.dom(2).values(), vec![3, 4]);
    }

    #[test]
    fn value_needed_by_one_variable_is_forced() {
        // Values 1 and 2 are taken by the first two variables.
        let mut s = DomainStore::new(vec![Dom::range(1, 2), Dom::range(1, 2), Dom::range(1, 3)]);
        AllDifferent::new(vec![0, 1, 2], vec![]).propagate(&mut s).unwrap();
        assert_eq!(s.dom(2).values(), vec![3]);
        // {1,3} {1,3} {1,2,3,5}: holes that bounds reasoning cannot see.
        let d = |v: &[i64]| Dom::from_domain(&crate::model::Domain::from_values(v.to_vec()).unwrap());
        let mut s = DomainStore::new(vec![d(&[1, 3]), d(&[1, 3]), d(&[1, 2, 3, 5])]);
        AllDifferent::new(vec![0, 1, 2], vec![]).propagate(&mut s).unwrap();
        assert_eq!(s.dom(2).values(), vec![2, 5]);
    }

    #[test]
    fn repeated_variable_fails() {
        let mut s = DomainStore::new(vec![Dom::range(1, 3)]);
        assert!(AllDifferent::new(vec![0, 0], vec![]).propagate(&mut s).is_err());
    }

    #[test]
    fn excepted_values_may_repeat() {
        let mut s = DomainStore::new(vec![Dom::range(0, 0), Dom::range(0, 1)]);
        AllDifferent::new(vec![0, 1], vec![0]).propagate(&mut s).unwrap();
        assert_eq!(s.dom(1).values(), vec![0, 1]);
    }
}
