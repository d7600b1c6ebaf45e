//! Bound helpers of the two bin-packing models. All take weights sorted in
//! increasing order.

/// Bins opened by next-fit beyond the first one. The model uses this count
/// directly as the number of available bins.
pub fn n_bins(capacity: i64, weights: &[i64]) -> i64 {
    let mut cnt = 0;
    let mut load = 0;
    for &w in weights {
        load += w;
        if load > capacity {
            cnt += 1;
            load = w;
        }
    }
    cnt
}

/// Number of smallest items that fit together in one bin, or -1 when all do.
pub fn max_items_per_bin(capacity: i64, weights: &[i64]) -> i64 {
    let mut cur = 0;
    for (i, &w) in weights.iter().enumerate() {
        cur += w;
        if cur > capacity {
            return i as i64;
        }
    }
    -1
}

/// Items with `a < weight <= b`, or `a <= weight <= b` when `closed`.
fn between(weights: &[i64], a: i64, b: i64, closed: bool) -> Vec<usize> {
    (0..weights.len())
        .filter(|&i| {
            let w = weights[i];
            (if closed { a <= w } else { a < w }) && w <= b
        })
        .collect()
}

fn lb2_at(capacity: i64, weights: &[i64], v: i64) -> i64 {
    let half = between(weights, capacity / 2, capacity, false).len() as i64;
    let total: i64 = between(weights, v, capacity - v, true).iter().map(|&i| weights[i]).sum();
    let over = between(weights, capacity / 2, capacity - v, false).len() as i64;
    half + 0.max(total.div_euclid(capacity) + i64::from(total.rem_euclid(capacity) != 0) - over)
}

/// The L2 lower bound on the number of bins.
pub fn lb2(capacity: i64, weights: &[i64]) -> i64 {
    (0..=capacity / 2).map(|v| lb2_at(capacity, weights, v)).max().unwrap_or(0)
}

/// `(start, length)` of runs of equal weights, as listed by the second
/// model; a run reaching the last item is not reported.
pub fn series(weights: &[i64]) -> Vec<(usize, usize)> {
    let mut t = Vec::new();
    let mut start = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w == weights[start] {
            continue;
        }
        if start + 1 < i {
            t.push((start, i - start));
        }
        start = i;
    }
    t
}
