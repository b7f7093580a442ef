//! Positivity-with-margin of ternary quadratic forms via the Sylvester
//! criterion.
//!
//! A form `Q(y) = a y1² + b y1 y2 + c y1 y3 + d y2² + e y2 y3 + f y3²`
//! is represented by its six scalar coefficients; the cross terms `b, c, e`
//! are halved inside the associated symmetric matrix. When the leading
//! principal minors of that matrix are all positive there is a largest
//! `ε > 0` with `Q(y) ≥ ε ‖y‖²`, and it equals the smallest eigenvalue.
//! [`max_margin`] recovers it by bisecting the monotone predicate
//! "all minors of the ε-shifted matrix are positive".

use crate::{Error, Result};

/// Coefficients of a ternary quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForm3 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl QuadForm3 {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self { a, b, c, d, e, f }
    }

    /// Evaluate the form at `y`.
    pub fn evaluate(&self, y: [f64; 3]) -> f64 {
        let [y1, y2, y3] = y;
        self.a * y1 * y1
            + self.b * y1 * y2
            + self.c * y1 * y3
            + self.d * y2 * y2
            + self.e * y2 * y3
            + self.f * y3 * y3
    }

    /// The symmetric matrix whose bilinear form agrees with `evaluate`.
    pub fn symmetric_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.a, self.b / 2.0, self.c / 2.0],
            [self.b / 2.0, self.d, self.e / 2.0],
            [self.c / 2.0, self.e / 2.0, self.f],
        ]
    }
}

/// Leading principal minors of the symmetric matrix with diagonal shifted
/// by `-eps`.
///
/// `g1 = a − ε`, `g2 = (a−ε)(d−ε) − b²/4`, and `g3` is the determinant of
/// the full shifted 3×3 matrix.
pub fn minors_at(q: &QuadForm3, eps: f64) -> (f64, f64, f64) {
    let a = q.a - eps;
    let d = q.d - eps;
    let f = q.f - eps;
    let (b, c, e) = (q.b, q.c, q.e);
    let g1 = a;
    let g2 = a * d - b * b / 4.0;
    let g3 = a * d * f + b * c * e / 4.0 - c * c * d / 4.0 - b * b * f / 4.0 - a * e * e / 4.0;
    (g1, g2, g3)
}

/// Whether the positivity hypothesis holds: all three leading minors of the
/// unshifted matrix are strictly positive.
///
/// The third minor is the true determinant `adf + bce/4 − c²d/4 − b²f/4 −
/// ae²/4`. Minors that are exactly zero fail the hypothesis; the underlying
/// inequalities are strict.
pub fn satisfies_hypothesis(q: &QuadForm3) -> bool {
    let (g1, g2, g3) = minors_at(q, 0.0);
    g1 > 0.0 && g2 > 0.0 && g3 > 0.0
}

/// Largest `ε` (within `tol`) such that all three minors stay positive,
/// found by bisection on `[0, min(a, d, f)]`.
///
/// Equals the smallest eigenvalue of the symmetric matrix up to `tol`.
/// Fails if [`satisfies_hypothesis`] is false.
pub fn max_margin(q: &QuadForm3, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max_margin tolerance must be positive, got {tol}"
        )));
    }
    let (g1, g2, g3) = minors_at(q, 0.0);
    if !(g1 > 0.0 && g2 > 0.0 && g3 > 0.0) {
        return Err(Error::HypothesisNotSatisfied { g1, g2, g3 });
    }
    let all_positive = |eps: f64| {
        let (m1, m2, m3) = minors_at(q, eps);
        m1 > 0.0 && m2 > 0.0 && m3 > 0.0
    };
    // The smallest eigenvalue never exceeds the smallest diagonal entry.
    let mut lo = 0.0_f64;
    let mut hi = q.a.min(q.d).min(q.f);
    if all_positive(hi) {
        return Ok(hi);
    }
    while hi - lo > tol * hi.abs().max(1.0) * 0.5 {
        let mid = 0.5 * (lo + hi);
        if all_positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Search for a direction with nonpositive form value.
///
/// Returns `Some(y)` with `evaluate(y) < 0` when the matrix has a negative
/// eigenvalue (any strictly violated minor guarantees one). Uses cheap
/// structural candidates first, then shifted power iteration toward the
/// bottom eigenvector.
pub fn negative_direction(q: &QuadForm3) -> Option<[f64; 3]> {
    let m = q.symmetric_matrix();

    let mut candidates: Vec<[f64; 3]> = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    // Bottom eigenvector of the leading 2x2 block, padded with y3 = 0.
    {
        let (p, r, s) = (m[0][0], m[0][1], m[1][1]);
        let half_tr = 0.5 * (p + s);
        let disc = (0.25 * (p - s) * (p - s) + r * r).sqrt();
        let lam = half_tr - disc;
        // Eigenvector of [[p, r], [r, s]] for eigenvalue lam.
        let v = if r.abs() > 1e-300 {
            [lam - s, r, 0.0]
        } else if p <= s {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        candidates.push(v);
    }
    // Shifted power iteration: top eigenvector of sigma*I - M is the bottom
    // eigenvector of M. Gershgorin bound keeps the shift safely dominant.
    let sigma = 1.0
        + (0..3)
            .map(|i| (0..3).map(|j| m[i][j].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
    let mut y = [1.0, 0.7, -0.4];
    for _ in 0..200 {
        let mut z = [0.0; 3];
        for i in 0..3 {
            z[i] = sigma * y[i] - (m[i][0] * y[0] + m[i][1] * y[1] + m[i][2] * y[2]);
        }
        let n = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
        if n == 0.0 {
            break;
        }
        y = [z[0] / n, z[1] / n, z[2] / n];
    }
    candidates.push(y);

    candidates.into_iter().find(|&v| {
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        n2 > 0.0 && q.evaluate(v) < 0.0
    })
}
