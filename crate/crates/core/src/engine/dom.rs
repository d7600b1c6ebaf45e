use crate::model::Domain;

/// Largest span stored as a bit set.
pub const BITSET_SPAN: i64 = 1024;

/// Mutable finite domain: a bit set for small spans, an interval list
/// otherwise. Mutators assume the result is non-empty; callers check first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dom {
    Bits { base: i64, words: Vec<u64>, size: u64, min: i64, max: i64 },
    Ranges { ranges: Vec<(i64, i64)>, size: u64 },
}

fn ranges_size(r: &[(i64, i64)]) -> u64 {
    r.iter().fold(0u64, |acc, &(lo, hi)| acc.saturating_add((hi as i128 - lo as i128 + 1).min(u64::MAX as i128) as u64))
}

impl Dom {
    pub fn from_domain(d: &Domain) -> Dom {
        let (lo, hi) = (d.min(), d.max());
        if (hi as i128 - lo as i128) < BITSET_SPAN as i128 {
            let span = (hi - lo + 1) as usize;
            let mut words = vec![0u64; span.div_ceil(64)];
            for &(a, b) in d.ranges() {
                for v in a..=b {
                    let i = (v - lo) as usize;
                    words[i / 64] |= 1 << (i % 64);
                }
            }
            Dom::Bits { base: lo, words, size: d.size(), min: lo, max: hi }
        } else {
            Dom::Ranges { ranges: d.ranges().to_vec(), size: d.size() }
        }
    }

    pub fn range(lo: i64, hi: i64) -> Dom {
        Dom::from_domain(&Domain::range(lo, hi))
    }

    pub fn to_domain(&self) -> Domain {
        match self {
            Dom::Ranges { ranges, .. } => Domain::new(ranges).expect("non-empty"),
            Dom::Bits { .. } => Domain::from_values(self.iter()).expect("non-empty"),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            Dom::Bits { size, .. } | Dom::Ranges { size, .. } => *size,
        }
    }

    pub fn min(&self) -> i64 {
        match self {
            Dom::Bits { min, .. } => *min,
            Dom::Ranges { ranges, .. } => ranges[0].0,
        }
    }

    pub fn max(&self) -> i64 {
        match self {
            Dom::Bits { max, .. } => *max,
            Dom::Ranges { ranges, .. } => ranges[ranges.len() - 1].1,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.size() == 1
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Dom::Bits { base, words, min, max, .. } => {
                if v < *min || v > *max {
                    return false;
                }
                let i = (v - base) as usize;
                words[i / 64] >> (i % 64) & 1 == 1
            }
            Dom::Ranges { ranges, .. } => {
                let idx = ranges.partition_point(|&(lo, _)| lo <= v);
                idx > 0 && ranges[idx - 1].1 >= v
            }
        }
    }

    /// Values in ascending order.
    pub fn iter(&self) -> DomIter<'_> {
        match self {
            Dom::Bits { base, words, min, .. } => {
                let start = (min - base) as usize;
                DomIter::Bits { base: *base, words, pos: start }
            }
            Dom::Ranges { ranges, .. } => {
                DomIter::Ranges { ranges, idx: 0, next: ranges.first().map(|r| r.0 as i128).unwrap_or(0) }
            }
        }
    }

    pub fn values(&self) -> Vec<i64> {
        self.iter().collect()
    }

    /// Smallest value `>= v`.
    pub fn next_at_or_above(&self, v: i64) -> Option<i64> {
        if v > self.max() {
            return None;
        }
        if v <= self.min() {
            return Some(self.min());
        }
        match self {
            Dom::Bits { .. } => (v..=self.max()).find(|&x| self.contains(x)),
            Dom::Ranges { ranges, .. } => {
                let idx = ranges.partition_point(|&(_, hi)| hi < v);
                ranges.get(idx).map(|&(lo, _)| lo.max(v))
            }
        }
    }

    /// Largest value `<= v`.
    pub fn prev_at_or_below(&self, v: i64) -> Option<i64> {
        if v < self.min() {
            return None;
        }
        if v >= self.max() {
            return Some(self.max());
        }
        match self {
            Dom::Bits { .. } => (self.min()..=v).rev().find(|&x| self.contains(x)),
            Dom::Ranges { ranges, .. } => {
                let idx = ranges.partition_point(|&(lo, _)| lo <= v);
                idx.checked_sub(1).map(|i| ranges[i].1.min(v))
            }
        }
    }

    fn refresh_bits(&mut self) {
        if let Dom::Bits { base, words, size, min, max } = self {
            *size = words.iter().map(|w| w.count_ones() as u64).sum();
            if *size == 0 {
                return;
            }
            let first = words.iter().position(|&w| w != 0).unwrap();
            *min = *base + (first * 64 + words[first].trailing_zeros() as usize) as i64;
            let last = words.iter().rposition(|&w| w != 0).unwrap();
            *max = *base + (last * 64 + 63 - words[last].leading_zeros() as usize) as i64;
        }
    }

    /// Removes `v`; the domain must keep at least one value.
    pub fn remove(&mut self, v: i64) {
        match self {
            Dom::Bits { base, words, size, min, max } => {
                let i = (v - *base) as usize;
                words[i / 64] &= !(1u64 << (i % 64));
                *size -= 1;
                if v == *min || v == *max {
                    self.refresh_bits();
                }
            }
            Dom::Ranges { ranges, size } => {
                let idx = ranges.partition_point(|&(lo, _)| lo <= v) - 1;
                let (lo, hi) = ranges[idx];
                match (lo == v, hi == v) {
                    (true, true) => {
                        ranges.remove(idx);
                    }
                    (true, false) => ranges[idx].0 = v + 1,
                    (false, true) => ranges[idx].1 = v - 1,
                    (false, false) => {
                        ranges[idx].1 = v - 1;
                        ranges.insert(idx + 1, (v + 1, hi));
                    }
                }
                *size -= 1;
            }
        }
    }

    /// Keeps values `>= v`; some value `>= v` must exist.
    pub fn set_min(&mut self, v: i64) {
        match self {
            Dom::Bits { base, words, .. } => {
                let cut = (v - *base) as usize;
                for (wi, w) in words.iter_mut().enumerate() {
                    let lo = wi * 64;
                    if lo + 64 <= cut {
                        *w = 0;
                    } else if lo < cut {
                        *w &= !0u64 << (cut - lo);
                    }
                }
                self.refresh_bits();
            }
            Dom::Ranges { ranges, size } => {
                ranges.retain(|&(_, hi)| hi >= v);
                if ranges[0].0 < v {
                    ranges[0].0 = v;
                }
                *size = ranges_size(ranges);
            }
        }
    }

    /// Keeps values `<= v`; some value `<= v` must exist.
    pub fn set_max(&mut self, v: i64) {
        match self {
            Dom::Bits { base, words, .. } => {
                let cut = (v - *base) as usize;
                for (wi, w) in words.iter_mut().enumerate() {
                    let lo = wi * 64;
                    if lo > cut {
                        *w = 0;
                    } else if cut - lo < 63 {
                        *w &= (1u64 << (cut - lo + 1)) - 1;
                    }
                }
                self.refresh_bits();
            }
            Dom::Ranges { ranges, size } => {
                ranges.retain(|&(lo, _)| lo <= v);
                let last = ranges.len() - 1;
                if ranges[last].1 > v {
                    ranges[last].1 = v;
                }
                *size = ranges_size(ranges);
            }
        }
    }

    pub fn fix(&mut self, v: i64) {
        match self {
            Dom::Bits { base, words, size, min, max } => {
                words.iter_mut().for_each(|w| *w = 0);
                let i = (v - *base) as usize;
                words[i / 64] = 1 << (i % 64);
                *size = 1;
                *min = v;
                *max = v;
            }
            Dom::Ranges { ranges, size } => {
                ranges.clear();
                ranges.push((v, v));
                *size = 1;
            }
        }
    }

    /// Keeps the values accepted by `keep`; returns the new size.
    /// Interval domains are rebuilt value by value.
    pub fn retain(&mut self, mut keep: impl FnMut(i64) -> bool) -> u64 {
        match self {
            Dom::Bits { base, words, .. } => {
                let base = *base;
                for (wi, w) in words.iter_mut().enumerate() {
                    let mut bits = *w;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        if !keep(base + (wi * 64 + b) as i64) {
                            *w &= !(1u64 << b);
                        }
                    }
                }
                self.refresh_bits();
            }
            Dom::Ranges { ranges, size } => {
                let kept: Vec<(i64, i64)> =
                    ranges.iter().flat_map(|&(lo, hi)| lo..=hi).filter(|&v| keep(v)).map(|v| (v, v)).collect();
                *ranges = crate::model::normalize_ranges(&kept);
                *size = ranges_size(ranges);
            }
        }
        self.size()
    }
}

pub enum DomIter<'a> {
    Bits { base: i64, words: &'a [u64], pos: usize },
    Ranges { ranges: &'a [(i64, i64)], idx: usize, next: i128 },
}

impl Iterator for DomIter<'_> {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        match self {
            DomIter::Bits { base, words, pos } => {
                let total = words.len() * 64;
                while *pos < total {
                    let wi = *pos / 64;
                    let rest = words[wi] >> (*pos % 64);
                    if rest == 0 {
                        *pos = (wi + 1) * 64;
                        continue;
                    }
                    let at = *pos + rest.trailing_zeros() as usize;
                    *pos = at + 1;
                    return Some(*base + at as i64);
                }
                None
            }
            DomIter::Ranges { ranges, idx, next } => {
                while *idx < ranges.len() {
                    let (lo, hi) = ranges[*idx];
                    if *next < lo as i128 {
                        *next = lo as i128;
                    }
                    if *next <= hi as i128 {
                        let v = *next as i64;
                        *next += 1;
                        return Some(v);
                    }
                    *idx += 1;
                }
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn both(vals: &[i64]) -> [Dom; 2] {
        let d = Domain::from_values(vals.iter().copied()).unwrap();
        let bits = Dom::from_domain(&d);
        let ranges = Dom::Ranges { ranges: d.ranges().to_vec(), size: d.size() };
        assert!(matches!(bits, Dom::Bits { .. }));
        [bits, ranges]
    }

    #[derive(Clone, Debug)]
    enum Step {
        Remove(i64),
        Min(i64),
        Max(i64),
        Fix(i64),
        KeepEven,
    }

    fn step() -> impl Strategy<Value = Step> {
        prop_oneof![
            (-5i64..140).prop_map(Step::Remove),
            (-5i64..140).prop_map(Step::Min),
            (-5i64..140).prop_map(Step::Max),
            (-5i64..140).prop_map(Step::Fix),
            Just(Step::KeepEven),
        ]
    }

    proptest! {
        #[test]
        fn representations_agree(init in proptest::collection::btree_set(0i64..130, 1..60), steps in proptest::collection::vec(step(), 0..20)) {
            let init: Vec<i64> = init.into_iter().collect();
            let mut model: Vec<i64> = init.clone();
            let [mut a, mut b] = both(&init);
            for s in steps {
                let next: Vec<i64> = match s {
                    Step::Remove(v) => model.iter().copied().filter(|&x| x != v).collect(),
                    Step::Min(v) => model.iter().copied().filter(|&x| x >= v).collect(),
                    Step::Max(v) => model.iter().copied().filter(|&x| x <= v).collect(),
                    Step::Fix(v) => model.iter().copied().filter(|&x| x == v).collect(),
                    Step::KeepEven => model.iter().copied().filter(|&x| x % 2 == 0).collect(),
                };
                if next.is_empty() || next.len() == model.len() {
                    continue;
                }
                for d in [&mut a, &mut b] {
                    match s {
                        Step::Remove(v) => d.remove(v),
                        Step::Min(v) => d.set_min(v),
                        Step::Max(v) => d.set_max(v),
                        Step::Fix(v) => d.fix(v),
                        Step::KeepEven => { d.retain(|x| x % 2 == 0); }
                    }
                }
                model = next;
                for d in [&a, &b] {
                    prop_assert_eq!(d.values(), model.clone());
                    prop_assert_eq!(d.size(), model.len() as u64);
                    prop_assert_eq!(d.min(), model[0]);
                    prop_assert_eq!(d.max(), *model.last().unwrap());
                    for probe in -2..135 {
                        prop_assert_eq!(d.contains(probe), model.contains(&probe));
                        prop_assert_eq!(d.next_at_or_above(probe), model.iter().copied().find(|&x| x >= probe));
                        prop_assert_eq!(d.prev_at_or_below(probe), model.iter().rev().copied().find(|&x| x <= probe));
                    }
                }
            }
        }
    }

    #[test]
    fn wide_domains_use_intervals() {
        let d = Dom::from_domain(&Domain::new(&[(0, 5), (5000, 6000)]).unwrap());
        assert!(matches!(d, Dom::Ranges { .. }));
        assert_eq!(d.size(), 1007);
        assert_eq!(d.to_domain(), Domain::new(&[(0, 5), (5000, 6000)]).unwrap());
    }
}
