//! Discrete evaluation of the logarithmic energy functional and its
//! dissipation constants.
//!
//! For positive fields the components are
//!
//! ```text
//! A = ∫ (u − u* − u* log(u/u*)),   B = ∫ (v − v* − v* log(v/v*)),
//! C = ½ ∫ (w − w*)²,               E = a2 μ2 A + q a1 μ1 B + δ C,
//! ```
//!
//! all nonnegative. Along solutions `E` dissipates at least as fast as
//! `ε (∫(u−u*)² + ∫(v−v*)² + ∫(w−w*)² + ∫|∇w|²)` with
//! `ε = min(ε1, ε2)`: `ε1` is the positivity margin of the kinetic
//! quadratic form and `ε2` the surplus of the gradient terms after the
//! Young-inequality absorption of the chemotaxis fluxes.

use crate::model::{ModelParams, SteadyState};
use crate::numeric::pairwise_sum_by;
use crate::quadform::{self, QuadForm3};
use crate::region::Witness;
use crate::solver::{FieldTriple, Grid};
use crate::{Error, Result};

/// Energy components and squared distances at one time level.
///
/// `e_rate` is the backward-difference estimate of `dE/dt`; it is absent at
/// the first sample of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub time: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub dist_u2: f64,
    pub dist_v2: f64,
    pub dist_w2: f64,
    pub grad_w2: f64,
    pub e_rate: Option<f64>,
}

/// Dissipation constants attached to a witness pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationConstants {
    /// Positivity margin of the kinetic quadratic form.
    pub eps1: f64,
    /// `d3 δ − a2 μ2 u* M1²/(4 d1) − a1 μ1 v* q M2²/(4 d2)`.
    pub eps2: f64,
    /// `min(eps1, eps2)`.
    pub eps: f64,
}

/// The ternary quadratic form controlling the kinetic part of `dE/dt`.
pub fn energy_quadform(p: &ModelParams, wit: &Witness) -> QuadForm3 {
    QuadForm3::new(
        p.a2 * p.mu1 * p.mu2,
        p.a1 * p.a2 * p.mu1 * p.mu2 * (1.0 + wit.q),
        -wit.delta * p.alpha,
        p.a1 * p.mu1 * p.mu2 * wit.q,
        -wit.delta * p.beta,
        wit.delta * p.gamma,
    )
}

/// Compute both dissipation constants for a witness; fails when either is
/// nonpositive (the witness is inconsistent with the parameters).
pub fn dissipation_constants(p: &ModelParams, wit: &Witness) -> Result<DissipationConstants> {
    let form = energy_quadform(p, wit);
    if !quadform::satisfies_hypothesis(&form) {
        return Err(Error::InconsistentWitness(format!(
            "kinetic quadratic form is not positive definite for q = {}, delta = {}",
            wit.q, wit.delta
        )));
    }
    let eps1 = quadform::max_margin(&form, 1e-12)?;
    let ss = crate::model::steady_state(p)?;
    let eps2 = p.d3 * wit.delta
        - p.a2 * p.mu2 * ss.u_star * p.m1 * p.m1 / (4.0 * p.d1)
        - p.a1 * p.mu1 * ss.v_star * wit.q * p.m2 * p.m2 / (4.0 * p.d2);
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(Error::InconsistentWitness(format!(
            "dissipation constants must be positive, got eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    Ok(DissipationConstants {
        eps1,
        eps2,
        eps: eps1.min(eps2),
    })
}

/// `x − x* − x* log(x/x*)` written as `x* φ((x−x*)/x*)` with
/// `φ(r) = r − log(1+r)`, which keeps the integrand nonnegative down to
/// roundoff.
fn log_integrand(x: f64, x_star: f64) -> f64 {
    let r = (x - x_star) / x_star;
    x_star * (r - r.ln_1p())
}

/// `∫ |∇w|²` by centered differences on interior cells and second-order
/// one-sided stencils at the boundaries.
pub fn grad_squared_integral(grid: &Grid, w: &[f64]) -> f64 {
    let nx = grid.nx();
    let ny = grid.ny();
    let hx = grid.hx();
    // One-sided stencils in difference form, so constant fields yield an
    // exactly zero gradient.
    let one_sided = |f0: f64, f1: f64, f2: f64, h: f64| (4.0 * (f1 - f0) - (f2 - f0)) / (2.0 * h);
    let total = pairwise_sum_by(nx * ny, |k| {
        let (i, j) = (k % nx, k / nx);
        let row = |ii: usize| w[j * nx + ii];
        let wx = if i == 0 {
            one_sided(row(0), row(1), row(2), hx)
        } else if i == nx - 1 {
            -one_sided(row(nx - 1), row(nx - 2), row(nx - 3), hx)
        } else {
            (row(i + 1) - row(i - 1)) / (2.0 * hx)
        };
        let mut g2 = wx * wx;
        if ny > 1 {
            let hy = grid.hy();
            let col = |jj: usize| w[jj * nx + i];
            let wy = if j == 0 {
                one_sided(col(0), col(1), col(2), hy)
            } else if j == ny - 1 {
                -one_sided(col(ny - 1), col(ny - 2), col(ny - 3), hy)
            } else {
                (col(j + 1) - col(j - 1)) / (2.0 * hy)
            };
            g2 += wy * wy;
        }
        g2
    });
    total * grid.cell_measure()
}

/// Evaluate the energy record for one field triple.
///
/// Integrals use the grid quadrature (cell value × cell measure). Rejects
/// nonpositive `u` or `v`, reporting the offending cell.
pub fn energy(
    grid: &Grid,
    fields: &FieldTriple,
    time: f64,
    ss: &SteadyState,
    wit: &Witness,
    p: &ModelParams,
) -> Result<EnergyRecord> {
    let n = grid.ncells();
    debug_assert_eq!(fields.u.len(), n);
    for (idx, &u) in fields.u.iter().enumerate() {
        if !(u > 0.0) {
            return Err(Error::NonpositiveField {
                field: "u",
                value: u,
                index: idx,
            });
        }
    }
    for (idx, &v) in fields.v.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonpositiveField {
                field: "v",
                value: v,
                index: idx,
            });
        }
    }
    let measure = grid.cell_measure();
    let a = pairwise_sum_by(n, |i| log_integrand(fields.u[i], ss.u_star)) * measure;
    let b = pairwise_sum_by(n, |i| log_integrand(fields.v[i], ss.v_star)) * measure;
    let c =
        0.5 * pairwise_sum_by(n, |i| {
            let d = fields.w[i] - ss.w_star;
            d * d
        }) * measure;
    let dist = |f: &[f64], star: f64| {
        pairwise_sum_by(n, |i| {
            let d = f[i] - star;
            d * d
        }) * measure
    };
    Ok(EnergyRecord {
        time,
        a,
        b,
        c,
        e: p.a2 * p.mu2 * a + wit.q * p.a1 * p.mu1 * b + wit.delta * c,
        dist_u2: dist(&fields.u, ss.u_star),
        dist_v2: dist(&fields.v, ss.v_star),
        dist_w2: dist(&fields.w, ss.w_star),
        grad_w2: grad_squared_integral(grid, &fields.w),
        e_rate: None,
    })
}

/// Evaluate a whole trajectory, filling `e_rate` by backward differences.
pub fn energy_series(
    grid: &Grid,
    times: &[f64],
    snapshots: &[FieldTriple],
    ss: &SteadyState,
    wit: &Witness,
    p: &ModelParams,
) -> Result<Vec<EnergyRecord>> {
    if times.len() != snapshots.len() {
        return Err(Error::InvalidParameter(format!(
            "times ({}) and snapshots ({}) differ in length",
            times.len(),
            snapshots.len()
        )));
    }
    let mut records = Vec::with_capacity(times.len());
    for (k, (&time, fields)) in times.iter().zip(snapshots).enumerate() {
        let mut rec = energy(grid, fields, time, ss, wit, p)?;
        if k > 0 {
            let prev: &EnergyRecord = &records[k - 1];
            let dt = time - prev.time;
            if dt > 0.0 {
                rec.e_rate = Some((rec.e - prev.e) / dt);
            }
        }
        records.push(rec);
    }
    Ok(records)
}

/// Outcome of checking the decay inequality along a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub fraction_satisfied: f64,
    /// Worst value of `(rate − bound) / scale` over the violating samples
    /// (zero when none violate), with `scale = max(|rate|, |bound|, 1e-300)`.
    pub worst_violation: f64,
    pub checked: usize,
}

/// Check `dE/dt ≤ −ε Σ(distances) (1 − slack) + slack |dE/dt|` at every
/// interior sample.
///
/// The slack absorbs the gap between the continuum identity and the
/// discrete scheme plus the backward-difference rate estimate.
pub fn verify_decay(
    records: &[EnergyRecord],
    dc: &DissipationConstants,
    slack: f64,
) -> Result<DecayReport> {
    if records.len() < 3 {
        return Err(Error::InvalidSeries(format!(
            "need at least 3 energy samples, got {}",
            records.len()
        )));
    }
    if !(slack >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "slack must be nonnegative, got {slack}"
        )));
    }
    if !records.windows(2).all(|w| w[0].time < w[1].time) {
        return Err(Error::InvalidSeries(
            "energy records must be strictly time-ordered".into(),
        ));
    }
    let mut checked = 0usize;
    let mut satisfied = 0usize;
    let mut worst = 0.0_f64;
    for rec in records {
        let Some(rate) = rec.e_rate else { continue };
        checked += 1;
        let dists = rec.dist_u2 + rec.dist_v2 + rec.dist_w2 + rec.grad_w2;
        let bound = -dc.eps * dists * (1.0 - slack) + slack * rate.abs();
        if rate <= bound {
            satisfied += 1;
        } else {
            let scale = rate.abs().max(bound.abs()).max(1e-300);
            worst = worst.max((rate - bound) / scale);
        }
    }
    Ok(DecayReport {
        fraction_satisfied: if checked == 0 {
            1.0
        } else {
            satisfied as f64 / checked as f64
        },
        worst_violation: worst,
        checked,
    })
}

/// Convenience for tests and the CLI: sum of all squared-distance terms.
pub fn distance_sum(rec: &EnergyRecord) -> f64 {
    rec.dist_u2 + rec.dist_v2 + rec.dist_w2 + rec.grad_w2
}
