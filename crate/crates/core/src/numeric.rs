//! Small shared numerics: compensated reductions, golden-section search,
//! central differences.

/// Pairwise summation. Deterministic for a fixed slice and noticeably more
/// accurate than a running sum for the long cell reductions used in
/// diagnostics and energy integrals.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LINEAR_CUTOFF: usize = 32;
    if values.len() <= LINEAR_CUTOFF {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise reduction of `f(i)` over `0..n` without materializing a buffer.
pub fn pairwise_sum_by<F: Fn(usize) -> f64 + Copy>(n: usize, f: F) -> f64 {
    fn go<F: Fn(usize) -> f64 + Copy>(lo: usize, hi: usize, f: F) -> f64 {
        if hi - lo <= 32 {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    if n == 0 {
        0.0
    } else {
        go(0, n, f)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)`. Runs until the bracket width drops below
/// `tol * max(1, |x|)` or `max_iters` evaluations are spent.
pub fn golden_max(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iters {
        if (b - a).abs() <= tol * x1.abs().max(1.0) {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Second-order central difference `(f(x+h) - f(x-h)) / (2h)`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
