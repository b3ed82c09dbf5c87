//! Partitioning and linear-time selection on `f64` slices.
//!
//! Inputs are assumed NaN-free; the water-fill entry points reject
//! non-finite responses before calling in here.

/// Three-way partition around `pivot`: afterwards `xs[..lt] < pivot`,
/// `xs[lt..lt + eq] == pivot` and the rest is greater. Returns `(lt, eq)`.
pub fn partition3(xs: &mut [f64], pivot: f64) -> (usize, usize) {
    let (mut lt, mut i, mut gt) = (0, 0, xs.len());
    while i < gt {
        let v = xs[i];
        if v < pivot {
            xs.swap(lt, i);
            lt += 1;
            i += 1;
        } else if v > pivot {
            gt -= 1;
            xs.swap(i, gt);
        } else {
            i += 1;
        }
    }
    (lt, gt - lt)
}

/// Returns the `k`-th smallest element (0-based) using median-of-medians
/// pivots, so the worst case is linear. Reorders `xs`.
pub fn select(xs: &mut [f64], mut k: usize) -> f64 {
    assert!(k < xs.len(), "select index {k} out of range for {}", xs.len());
    let (mut lo, mut hi) = (0, xs.len());
    loop {
        let s = &mut xs[lo..hi];
        if s.len() <= 5 {
            s.sort_unstable_by(f64::total_cmp);
            return s[k];
        }
        let pivot = median_of_medians(s);
        let (lt, eq) = partition3(s, pivot);
        if k < lt {
            hi = lo + lt;
        } else if k < lt + eq {
            return pivot;
        } else {
            k -= lt + eq;
            lo += lt + eq;
        }
    }
}

/// An approximate median guaranteed to sit between the 30th and 70th
/// percentiles. Reorders `xs`.
pub fn median_of_medians(xs: &mut [f64]) -> f64 {
    let n = xs.len();
    if n <= 5 {
        xs.sort_unstable_by(f64::total_cmp);
        return xs[n / 2];
    }
    let groups = n.div_ceil(5);
    for g in 0..groups {
        let start = 5 * g;
        let end = (start + 5).min(n);
        let chunk = &mut xs[start..end];
        chunk.sort_unstable_by(f64::total_cmp);
        let m = start + chunk.len() / 2;
        xs.swap(g, m);
    }
    select(&mut xs[..groups], groups / 2)
}

/// Exact median (lower median for even lengths).
pub fn median(xs: &mut [f64]) -> f64 {
    let k = (xs.len() - 1) / 2;
    select(xs, k)
}
