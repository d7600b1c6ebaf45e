use crate::engine::propagate::{Propagator, Strength};
use crate::engine::store::{DomainStore, Empty};
use crate::model::VarId;

/// Domains above this size are not scanned value by value.
pub const SCAN_LIMIT: u64 = 1 << 16;

pub fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Extra restriction on the sum checked by forward checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SumFilter {
    None,
    NotEq(i128),
    NotBetween(i128, i128),
    OnlyIn(Vec<i64>),
    NotIn(Vec<i64>),
}

impl SumFilter {
    fn allows(&self, s: i128) -> bool {
        let member = |set: &[i64]| i64::try_from(s).is_ok_and(|x| set.binary_search(&x).is_ok());
        match self {
            SumFilter::None => true,
            SumFilter::NotEq(k) => s != *k,
            SumFilter::NotBetween(lo, hi) => s < *lo || s > *hi,
            SumFilter::OnlyIn(set) => member(set),
            SumFilter::NotIn(set) => !member(set),
        }
    }
}

/// `lo <= Σ cᵢ·xᵢ <= hi` by bounds reasoning, plus `filter` by forward
/// checking once a single variable is unfixed.
#[derive(Clone, Debug)]
pub struct Linear {
    pub terms: Vec<(i64, VarId)>,
    pub lo: Option<i128>,
    pub hi: Option<i128>,
    pub filter: SumFilter,
}

fn term_bounds(s: &DomainStore, c: i64, v: VarId) -> (i128, i128) {
    let (a, b) = (c as i128 * s.min(v) as i128, c as i128 * s.max(v) as i128);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Linear {
    /// Merges duplicate variables and drops zero coefficients.
    pub fn new(terms: Vec<(i64, VarId)>, lo: Option<i128>, hi: Option<i128>, filter: SumFilter) -> Self {
        let mut merged: Vec<(i128, VarId)> = Vec::new();
        for (c, v) in terms {
            match merged.iter_mut().find(|t| t.1 == v) {
                Some(t) => t.0 += c as i128,
                None => merged.push((c as i128, v)),
            }
        }
        let terms = merged
            .into_iter()
            .filter(|t| t.0 != 0)
            .map(|(c, v)| (i64::try_from(c).expect("coefficient overflow"), v))
            .collect();
        Linear { terms, lo, hi, filter }
    }

    fn sum_bounds(&self, s: &DomainStore) -> (i128, i128) {
        self.terms.iter().fold((0, 0), |(lo, hi), &(c, v)| {
            let (a, b) = term_bounds(s, c, v);
            (lo + a, hi + b)
        })
    }

    fn bounds(&self, s: &mut DomainStore) -> Result<(), Empty> {
        loop {
            let mut changed = false;
            if let Some(hi) = self.hi {
                let (smin, _) = self.sum_bounds(s);
                if smin > hi {
                    return Err(Empty);
                }
                for &(c, v) in &self.terms {
                    let slack = hi - (smin - term_bounds(s, c, v).0);
                    let c = c as i128;
                    changed |= if c > 0 {
                        s.set_max_wide(v, floor_div(slack, c))?
                    } else {
                        s.set_min_wide(v, ceil_div(slack, c))?
                    };
                }
            }
            if let Some(lo) = self.lo {
                let (_, smax) = self.sum_bounds(s);
                if smax < lo {
                    return Err(Empty);
                }
                for &(c, v) in &self.terms {
                    let need = lo - (smax - term_bounds(s, c, v).1);
                    let c = c as i128;
                    changed |= if c > 0 {
                        s.set_min_wide(v, ceil_div(need, c))?
                    } else {
                        s.set_max_wide(v, floor_div(need, c))?
                    };
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn forward_check(&self, s: &mut DomainStore) -> Result<bool, Empty> {
        if self.filter == SumFilter::None {
            return Ok(false);
        }
        let mut partial = 0i128;
        let mut open = None;
        for &(c, v) in &self.terms {
            if s.is_fixed(v) {
                partial += c as i128 * s.value(v) as i128;
            } else if open.is_some() {
                return Ok(false);
            } else {
                open = Some((c as i128, v));
            }
        }
        match open {
            None => {
                if self.filter.allows(partial) {
                    Ok(false)
                } else {
                    Err(Empty)
                }
            }
            Some((c, v)) => {
                if let SumFilter::NotEq(k) = self.filter {
                    let r = k - partial;
                    if r % c == 0 {
                        if let Ok(x) = i64::try_from(r / c) {
                            return s.remove(v, x);
                        }
                    }
                    return Ok(false);
                }
                if s.size(v) > SCAN_LIMIT {
                    return Ok(false);
                }
                s.retain(v, |x| self.filter.allows(partial + c * x as i128))
            }
        }
    }
}

impl Propagator for Linear {
    fn propagate(&mut self, s: &mut DomainStore) -> Result<(), Empty> {
        loop {
            self.bounds(s)?;
            if !self.forward_check(s)? || (self.lo.is_none() && self.hi.is_none()) {
                return Ok(());
            }
        }
    }

    fn strength(&self) -> Strength {
        if self.filter == SumFilter::None {
            Strength::Bounds
        } else {
            Strength::Fc
        }
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
    fn rounding() {
        assert_eq!(floor_div(7, 2), 3);
        assert_eq!(floor_div(-7, 2), -4);
        assert_eq!(floor_div(7, -2), -4);
        assert_eq!(ceil_div(7, 2), 4);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(ceil_div(-7, -2), 4);
    }

    #[test]
    fn sum_le_filters_bounds() {
        let mut s = DomainStore::new(vec![Dom::range(0, 5), Dom::range(2, 2)]);
        let mut p = Linear::new(vec![(1, 0), (1, 1)], None, Some(3), SumFilter::None);
        p.propagate(&mut s).unwrap();
        assert_eq!(s.dom(0).values(), vec![0, 1]);
    }

    #[test]
    fn negative_coefficients() {
        let mut s = DomainStore::new(vec![Dom::range(0, 10), Dom::range(0, 10)]);
        let mut p = Linear::new(vec![(2, 0), (-3, 1)], Some(4), Some(4), SumFilter::None);
        p.propagate(&mut s).unwrap();
        assert_eq!((s.min(0), s.max(0)), (2, 8));
        assert_eq!((s.min(1), s.max(1)), (0, 4));
    }

    #[test]
    fn forward_check_not_equal() {
        let mut s = DomainStore::new(vec![Dom::range(3, 3), Dom::range(0, 5)]);
        let mut p = Linear::new(vec![(1, 0), (1, 1)], None, None, SumFilter::NotEq(5));
        p.propagate(&mut s).unwrap();
        assert_eq!(s.dom(1).values(), vec![0, 1, 3, 4, 5]);
    }
}
