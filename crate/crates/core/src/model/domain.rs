use std::fmt;

use super::ModelError;

/// A finite set of integers stored as disjoint, non-adjacent closed intervals
/// in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    ranges: Vec<(i64, i64)>,
}

/// Sorts, drops empty intervals (`lo > hi`) and merges overlapping or
/// adjacent intervals.
pub fn normalize_ranges(ranges: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut sorted: Vec<(i64, i64)> = ranges.iter().copied().filter(|&(lo, hi)| lo <= hi).collect();
    sorted.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(sorted.len());
    for (lo, hi) in sorted {
        match out.last_mut() {
            Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

impl Domain {
    pub fn new(ranges: &[(i64, i64)]) -> Result<Self, ModelError> {
        let ranges = normalize_ranges(ranges);
        if ranges.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        Ok(Domain { ranges })
    }

    /// The interval `lo..=hi`. Panics when `lo > hi`.
    pub fn range(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty domain {lo}..{hi}");
        Domain { ranges: vec![(lo, hi)] }
    }

    pub fn from_values<I: IntoIterator<Item = i64>>(values: I) -> Result<Self, ModelError> {
        let ranges: Vec<(i64, i64)> = values.into_iter().map(|v| (v, v)).collect();
        Domain::new(&ranges)
    }

    pub fn boolean() -> Self {
        Domain::range(0, 1)
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    /// Number of values (saturating at `u64::MAX`).
    pub fn size(&self) -> u64 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi as i128 - lo as i128 + 1).min(u64::MAX as i128) as u64)
            .fold(0u64, |acc, n| acc.saturating_add(n))
    }

    pub fn min(&self) -> i64 {
        self.ranges[0].0
    }

    pub fn max(&self) -> i64 {
        self.ranges[self.ranges.len() - 1].1
    }

    pub fn contains(&self, v: i64) -> bool {
        // ranges are sorted: find the last interval starting at or before v
        let idx = self.ranges.partition_point(|&(lo, _)| lo <= v);
        idx > 0 && self.ranges[idx - 1].1 >= v
    }

    /// Values in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.ranges.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    pub fn is_singleton(&self) -> bool {
        self.ranges.len() == 1 && self.ranges[0].0 == self.ranges[0].1
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if lo == hi {
                write!(f, "{lo}")?;
            } else {
                write!(f, "{lo}..{hi}")?;
            }
        }
        Ok(())
    }
}
