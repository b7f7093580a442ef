//! Stability-region geometry in the rescaled `(s, t)` plane.
//!
//! The rescaled chemotaxis strengths
//!
//! ```text
//! s = u* M1² / (4 d1 d3 a1 μ1),   t = v* M2² / (4 d2 d3 a2 μ2)
//! ```
//!
//! are admissible when there is a slope `q` in the interval
//! `I = {q > 0 | 4q − (1+q)² a1 a2 > 0}` with `s + q t < f(q)`, where `f(q)`
//! is the s-intercept of the constraint line,
//!
//! ```text
//! f(q) = γ (4q − (1+q)² a1 a2) / (a1 α² q + a2 β² − a1 a2 α β (1+q)).
//! ```
//!
//! Three membership predicates are exposed, labeled as in the atlas CSV
//! schema: `bw` (the fixed-slope condition `s + t < f(1)`), `miz` (the
//! symmetric box `max(s,t) < f(q0)/(1+q0)` with `q0` maximizing
//! `f(q)/(1+q)`), and `new` (the union over all admissible slopes). The
//! first two are strict subsets of the third; [`strict_inclusion_witness`]
//! produces a point demonstrating the strictness.

use crate::model::{steady_state, ModelParams};
use crate::numeric::golden_max;
use crate::{Error, Result};

/// Membership at the region boundary (|margin| below this) is reported as
/// outside: the underlying inequalities are strict.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Number of log-spaced grid points used to bracket maxima over `I` before
/// golden-section refinement.
const Q_GRID: usize = 2048;

/// Relative shrink applied at the interval endpoints, where the intercept
/// vanishes and its denominator may degenerate.
const ENDPOINT_SHRINK: f64 = 1e-9;

/// Competition and signal parameters entering the region geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RegionParams {
    pub fn new(a1: f64, a2: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(a1 > 0.0 && a1 < 1.0 && a2 > 0.0 && a2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "competition coefficients must lie in (0, 1), got a1 = {a1}, a2 = {a2}"
            )));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            a1,
            a2,
            alpha,
            beta,
            gamma,
        })
    }

    pub fn from_model(p: &ModelParams) -> Result<Self> {
        Self::new(p.a1, p.a2, p.alpha, p.beta, p.gamma)
    }
}

/// A point of the rescaled parameter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub s: f64,
    pub t: f64,
}

impl RegionPoint {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s >= 0.0 && t >= 0.0) || !s.is_finite() || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "region point must have nonnegative finite coordinates, got ({s}, {t})"
            )));
        }
        Ok(Self { s, t })
    }
}

/// Admissible `(q, δ)` pair with the realized constraint slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub q: f64,
    pub delta: f64,
    pub margin: f64,
}

/// Result of a membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub margin: f64,
}

/// Result of the union membership test, with the maximizing slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionMembership {
    pub inside: bool,
    pub margin: f64,
    pub q: f64,
}

/// Endpoints of the admissible slope interval `I`: the roots of
/// `a1 a2 q² + (2 a1 a2 − 4) q + a1 a2 = 0`. Satisfies
/// `0 < q_minus < 1 < q_plus` and `q_minus q_plus = 1`.
pub fn admissible_interval(rp: &RegionParams) -> (f64, f64) {
    let m = rp.a1 * rp.a2;
    // Rationalized form: the naive quadratic formula cancels catastrophically
    // for the lower root when m is tiny.
    let q_plus = ((2.0 - m) + 2.0 * (1.0 - m).sqrt()) / m;
    (1.0 / q_plus, q_plus)
}

fn numerator(rp: &RegionParams, q: f64) -> f64 {
    let m = rp.a1 * rp.a2;
    rp.gamma * (4.0 * q - (1.0 + q) * (1.0 + q) * m)
}

fn denominator(rp: &RegionParams, q: f64) -> f64 {
    rp.a1 * rp.alpha * rp.alpha * q + rp.a2 * rp.beta * rp.beta
        - rp.a1 * rp.a2 * rp.alpha * rp.beta * (1.0 + q)
}

fn intercept_unchecked(rp: &RegionParams, q: f64) -> f64 {
    let d = denominator(rp, q);
    // Strictly positive on I: the discriminant of the denominator as a
    // quadratic in alpha is negative there.
    assert!(
        d > 0.0,
        "intercept denominator must be positive on the admissible interval (q = {q}, d = {d})"
    );
    numerator(rp, q) / d
}

/// The s-intercept `f(q)` of the constraint line `s + q t = f(q)`.
///
/// Rejects `q` outside the closure of the admissible interval; positive for
/// `q` strictly inside, zero at the endpoints.
pub fn s_intercept(rp: &RegionParams, q: f64) -> Result<f64> {
    let (q_lo, q_hi) = admissible_interval(rp);
    if !(q >= q_lo && q <= q_hi) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} lies outside the closure of the admissible interval ({q_lo}, {q_hi})"
        )));
    }
    Ok(intercept_unchecked(rp, q))
}

/// The t-intercept `g(q) = f(q)/q` of the constraint line.
pub fn t_intercept(rp: &RegionParams, q: f64) -> Result<f64> {
    Ok(s_intercept(rp, q)? / q)
}

/// Maximize `objective` over the interior of `I` by a log-uniform grid scan
/// followed by golden-section refinement around the best bracket.
fn maximize_over_interval(
    rp: &RegionParams,
    objective: impl Fn(f64) -> f64,
    tol: f64,
) -> (f64, f64) {
    let (q_lo, q_hi) = admissible_interval(rp);
    let lo = q_lo * (1.0 + ENDPOINT_SHRINK);
    let hi = q_hi * (1.0 - ENDPOINT_SHRINK);
    let log_ratio = (hi / lo).ln();
    let at = |i: usize| lo * (log_ratio * i as f64 / (Q_GRID - 1) as f64).exp();

    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..Q_GRID {
        let v = objective(at(i));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = at(best_i.saturating_sub(1));
    let b = at((best_i + 1).min(Q_GRID - 1));
    let (q_ref, v_ref) = golden_max(&objective, a, b, tol, 400);
    if v_ref >= best_v {
        (q_ref, v_ref)
    } else {
        (at(best_i), best_v)
    }
}

/// Maximizer `q0` of `f(q)/(1+q)` over `I`, located to tolerance `tol`.
pub fn box_bound_maximizer(rp: &RegionParams, tol: f64) -> f64 {
    maximize_over_interval(rp, |q| intercept_unchecked(rp, q) / (1.0 + q), tol).0
}

/// Precomputed geometry for one parameter set. Build once when testing many
/// points.
#[derive(Debug, Clone)]
pub struct RegionGeometry {
    pub params: RegionParams,
    pub q_minus: f64,
    pub q_plus: f64,
    /// `f(1)`: both intercepts of the fixed-slope condition.
    pub f_at_one: f64,
    /// Maximizer of `f(q)/(1+q)`.
    pub q0: f64,
    /// Side length `f(q0)/(1+q0)` of the box condition.
    pub box_bound: f64,
}

impl RegionGeometry {
    pub fn new(params: RegionParams) -> Self {
        let (q_minus, q_plus) = admissible_interval(&params);
        let f_at_one = intercept_unchecked(&params, 1.0);
        let (q0, ratio) = maximize_over_interval(
            &params,
            |q| intercept_unchecked(&params, q) / (1.0 + q),
            1e-12,
        );
        Self {
            params,
            q_minus,
            q_plus,
            f_at_one,
            q0,
            box_bound: ratio,
        }
    }

    /// Slack of the fixed-slope condition `s + t < f(1)`.
    pub fn margin_bw(&self, pt: RegionPoint) -> f64 {
        self.f_at_one - (pt.s + pt.t)
    }

    /// Slack of the box condition `max(s, t) < f(q0)/(1+q0)`.
    pub fn margin_miz(&self, pt: RegionPoint) -> f64 {
        self.box_bound - pt.s.max(pt.t)
    }

    /// Slack of the union condition: `max over q in I of f(q) − s − q t`,
    /// together with the maximizing slope.
    ///
    /// The objective is concave-over-linear on `I` whenever it is positive
    /// anywhere, so the grid-then-refine search is reliable; `q = 1` and
    /// `q = q0` are always included as candidates, which makes the two
    /// sub-region inclusions exact.
    pub fn margin_new(&self, pt: RegionPoint) -> (f64, f64) {
        let obj = |q: f64| intercept_unchecked(&self.params, q) - pt.s - q * pt.t;
        let (mut q_best, mut v_best) = maximize_over_interval(&self.params, obj, 1e-13);
        for q in [1.0, self.q0] {
            let v = obj(q);
            if v > v_best {
                v_best = v;
                q_best = q;
            }
        }
        (v_best, q_best)
    }

    pub fn in_bw(&self, pt: RegionPoint) -> Membership {
        let margin = self.margin_bw(pt);
        Membership {
            inside: margin > BOUNDARY_TOL,
            margin,
        }
    }

    pub fn in_miz(&self, pt: RegionPoint) -> Membership {
        let margin = self.margin_miz(pt);
        Membership {
            inside: margin > BOUNDARY_TOL,
            margin,
        }
    }

    pub fn in_new(&self, pt: RegionPoint) -> UnionMembership {
        let (margin, q) = self.margin_new(pt);
        UnionMembership {
            inside: margin > BOUNDARY_TOL,
            margin,
            q,
        }
    }
}

/// Fixed-slope membership: `s + t < f(1)`.
pub fn in_region_bw(rp: &RegionParams, pt: RegionPoint) -> Membership {
    RegionGeometry::new(*rp).in_bw(pt)
}

/// Box membership: `max(s, t) < f(q0)/(1+q0)`.
pub fn in_region_miz(rp: &RegionParams, pt: RegionPoint) -> Membership {
    RegionGeometry::new(*rp).in_miz(pt)
}

/// Union membership: some admissible slope `q` has `s + q t < f(q)`.
pub fn in_region_new(rp: &RegionParams, pt: RegionPoint) -> UnionMembership {
    RegionGeometry::new(*rp).in_new(pt)
}

/// Closed-form membership in the union region.
///
/// Writing the constraint as a quadratic in `q`, membership is equivalent to
/// a downward-opening parabola (the `t` bound), a positive discriminant
/// (`h1 > 0`), and a vertex inside the admissible interval (`h2+ > 0`,
/// `h2− < 0`). The `t` coefficient of `h1` is `−4γ(2 a2 β² − ...)`: the
/// dimensionally consistent form, which matches the union predicate for all
/// `γ` (see the region tests for the γ-scaled variant that does not).
pub fn closed_form_membership(rp: &RegionParams, pt: RegionPoint) -> bool {
    if pt.s < 0.0 || pt.t < 0.0 {
        return false;
    }
    let (a1, a2, al, be, ga) = (rp.a1, rp.a2, rp.alpha, rp.beta, rp.gamma);
    let m = a1 * a2;
    let root = (1.0 - m).sqrt();
    let p_coef = a1 * al * (al - a2 * be);
    let r_coef = a2 * be * (be - a1 * al);

    // t bound: the quadratic opens downward, i.e. t < a2 γ / (α (a2 β − α)+),
    // read as +infinity when a2 β <= α.
    if a2 * be > al {
        let bound = a2 * ga / (al * (a2 * be - al));
        if !(pt.t < bound) {
            return false;
        }
    }

    let h1 = p_coef * p_coef * pt.s * pt.s + r_coef * r_coef * pt.t * pt.t
        - 2.0 * p_coef * r_coef * pt.s * pt.t
        - 4.0
            * ga
            * (2.0 * a1 * al * al - 2.0 * m * al * be + a1 * a2 * a2 * be * be
                - a1 * a1 * a2 * al * al)
            * pt.s
        - 4.0
            * ga
            * (2.0 * a2 * be * be - 2.0 * m * al * be + a1 * a1 * a2 * al * al
                - a1 * a2 * a2 * be * be)
            * pt.t
        + 16.0 * ga * ga * (1.0 - m);
    if !(h1 > 0.0) {
        return false;
    }

    let h2 = |sign: f64| {
        p_coef * pt.s
            + (al * (4.0 - 2.0 * m + sign * 4.0 * root) * (al - a2 * be) / a2 + r_coef) * pt.t
            + sign * 4.0 * ga * root
    };
    h2(1.0) > 0.0 && h2(-1.0) < 0.0
}

/// Map model parameters to the rescaled plane.
pub fn point_from_params(p: &ModelParams) -> Result<RegionPoint> {
    p.validate()?;
    let ss = steady_state(p)?;
    let s = ss.u_star * p.m1 * p.m1 / (4.0 * p.d1 * p.d3 * p.a1 * p.mu1);
    let t = ss.v_star * p.m2 * p.m2 / (4.0 * p.d2 * p.d3 * p.a2 * p.mu2);
    RegionPoint::new(s, t)
}

/// Select the witness pair `(q, δ)` for parameters inside the union region.
///
/// `q` is the margin-maximizing slope. `δ` must satisfy two constraints:
/// above `(a2 μ2 u* M1²/(4 d1) + a1 μ1 v* q M2²/(4 d2)) / d3` so the
/// gradient dissipation constant stays positive, and below
/// `a1 a2 μ1 μ2 f(q)` so the kinetic quadratic form stays positive definite.
/// That open interval is nonempty exactly when the margin is positive; `δ`
/// is its geometric mean (midpoint when the lower end is zero, keeping it
/// strictly interior).
pub fn select_q_delta(p: &ModelParams) -> Result<Witness> {
    p.validate()?;
    let ss = steady_state(p)?;
    let rp = RegionParams::from_model(p)?;
    let geo = RegionGeometry::new(rp);
    let pt = point_from_params(p)?;
    let (margin, q) = geo.margin_new(pt);
    if !(margin > BOUNDARY_TOL) {
        return Err(Error::OutOfRegion { margin });
    }
    let lo = (p.a2 * p.mu2 * ss.u_star * p.m1 * p.m1 / (4.0 * p.d1)
        + p.a1 * p.mu1 * ss.v_star * q * p.m2 * p.m2 / (4.0 * p.d2))
        / p.d3;
    let hi = p.a1 * p.a2 * p.mu1 * p.mu2 * intercept_unchecked(&geo.params, q);
    debug_assert!(lo < hi);
    let delta = if lo > 0.0 { (lo * hi).sqrt() } else { hi / 2.0 };
    Ok(Witness { q, delta, margin })
}

/// Analytic derivatives of the two intercepts at `q = 1`:
///
/// ```text
/// f'(1) = 4 γ (1 − a1 a2) a2 β (β − a1 α) / D²
/// g'(1) = 4 γ (1 − a1 a2) a1 α (a2 β − α) / D²
/// D = a1 α² + a2 β² − 2 a1 a2 α β
/// ```
///
/// Each vanishes exactly in its degenerate case (`a1 α = β`, `a2 β = α`),
/// and both agree with central finite differences of the intercepts.
pub fn intercept_derivatives_at_one(rp: &RegionParams) -> (f64, f64) {
    let m = rp.a1 * rp.a2;
    let d = rp.a1 * rp.alpha * rp.alpha + rp.a2 * rp.beta * rp.beta - 2.0 * m * rp.alpha * rp.beta;
    let common = 4.0 * rp.gamma * (1.0 - m) / (d * d);
    let df = common * rp.a2 * rp.beta * (rp.beta - rp.a1 * rp.alpha);
    let dg = common * rp.a1 * rp.alpha * (rp.a2 * rp.beta - rp.alpha);
    (df, dg)
}

/// A point inside the union region but outside the fixed-slope region.
///
/// One of the two intercepts always improves past its `q = 1` value (unless
/// both degeneracies held at once, which `a1 a2 < 1` forbids), so a point
/// halfway between `f(1)` and the improved intercept on the matching axis
/// qualifies.
pub fn strict_inclusion_witness(rp: &RegionParams) -> RegionPoint {
    let geo = RegionGeometry::new(*rp);
    let f1 = geo.f_at_one;
    let (_, f_max) = maximize_over_interval(rp, |q| intercept_unchecked(rp, q), 1e-13);
    let (_, g_max) = maximize_over_interval(rp, |q| intercept_unchecked(rp, q) / q, 1e-13);
    let improvement_s = f_max - f1;
    let improvement_t = g_max - f1;
    let pt = if improvement_s >= improvement_t {
        RegionPoint {
            s: 0.5 * (f1 + f_max),
            t: 0.0,
        }
    } else {
        RegionPoint {
            s: 0.0,
            t: 0.5 * (f1 + g_max),
        }
    };
    let new = geo.in_new(pt);
    let bw = geo.in_bw(pt);
    assert!(
        new.inside && !bw.inside,
        "strict-inclusion search failed: pt = ({}, {}), new margin {}, bw margin {}",
        pt.s,
        pt.t,
        new.margin,
        bw.margin
    );
    pt
}
