//! Small numeric helpers shared by the measure computations.

/// Pairwise (cascade) summation. Result is independent of how callers
/// split work, as long as the input order is fixed.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Riemann zeta for real `p > 1`: direct sum of the first terms plus an
/// Euler-Maclaurin tail. Returns `None` for `p <= 1` (divergent series).
pub fn zeta(p: f64) -> Option<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return None;
    }
    const HEAD: usize = 1000;
    let head: Vec<f64> = (1..HEAD).map(|n| (n as f64).powf(-p)).collect();
    let m = HEAD as f64;
    // sum_{n>=M} n^{-p} = M^{1-p}/(p-1) + M^{-p}/2 + p M^{-p-1}/12 - p(p+1)(p+2) M^{-p-3}/720 + ...
    let tail = m.powf(1.0 - p) / (p - 1.0) + 0.5 * m.powf(-p) + p * m.powf(-p - 1.0) / 12.0
        - p * (p + 1.0) * (p + 2.0) * m.powf(-p - 3.0) / 720.0;
    Some(pairwise_sum(&head) + tail)
}

/// Bisection for an increasing function on `[lo, hi]`, returning the `x`
/// with `f(x) = target` to within a few ulps of the bracket.
pub fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
