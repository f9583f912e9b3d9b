//! Euclidean projection onto the probability simplex.

use crate::Vector;

/// Projects `v` onto `{y : y ≥ 0, Σ y = 1}` with the sort-and-threshold
/// rule: find the largest `k` with `s_k - (Σ_{i≤k} s_i - 1)/k > 0` over the
/// descending sort `s`, then shift by that threshold and clip at zero.
pub fn simplex_project(v: &Vector) -> Vector {
    let n = v.len();
    assert!(n > 0, "simplex_project: empty vector");
    // points already on the simplex up to rounding are returned untouched,
    // which makes the projection exactly idempotent
    if v.iter().all(|&a| a >= 0.0) && (v.sum() - 1.0).abs() <= 4.0 * n as f64 * f64::EPSILON {
        return v.clone();
    }
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    v.map(|a| (a - theta).max(0.0))
}
