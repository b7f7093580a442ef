//! Exponential decay-rate estimation: fit `C e^{-ℓ t}` to a nonnegative
//! time series by least squares on the log scale, and certify trajectories
//! as exponentially convergent.

use crate::{Error, Result};

/// Smallest value admitted into a log fit; below this a sample is treated
/// as saturated at the roundoff floor and skipped.
pub const LOG_FLOOR: f64 = 10.0 * f64::EPSILON;

/// Result of an exponential fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// Decay rate `ℓ` (negated log-slope).
    pub ell: f64,
    /// Prefactor `C`.
    pub c: f64,
    /// Coefficient of determination of the log-linear fit; 0 when the
    /// series is flat (see `no_decay`).
    pub r2: f64,
    /// Time window actually used.
    pub window: (f64, f64),
    /// Number of samples entering the fit.
    pub n_used: usize,
    /// Set when the log series is flat, where the slope carries no
    /// information and `r2` is undefined.
    pub no_decay: bool,
}

/// Least-squares fit of `log(value)` against time over `window`.
///
/// Rejects windows containing nonpositive values or fewer than 8 usable
/// samples (usable: inside the window and above [`LOG_FLOOR`]).
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateEstimate> {
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter(format!(
            "window must be increasing, got ({}, {})",
            window.0, window.1
        )));
    }
    let mut ts = Vec::new();
    let mut zs = Vec::new();
    for &(t, v) in series {
        if t < window.0 || t > window.1 {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::InvalidSeries(format!(
                "nonpositive value {v} at t = {t} inside the fit window"
            )));
        }
        if v <= LOG_FLOOR {
            continue; // saturated at the roundoff floor
        }
        ts.push(t);
        zs.push(v.ln());
    }
    let n = ts.len();
    if n < 8 {
        return Err(Error::InvalidSeries(format!(
            "need at least 8 usable samples in the window, got {n}"
        )));
    }
    let nf = n as f64;
    let t_mean = ts.iter().sum::<f64>() / nf;
    let z_mean = zs.iter().sum::<f64>() / nf;
    let mut stt = 0.0;
    let mut stz = 0.0;
    for i in 0..n {
        let dt = ts[i] - t_mean;
        stt += dt * dt;
        stz += dt * (zs[i] - z_mean);
    }
    if stt == 0.0 {
        return Err(Error::InvalidSeries(
            "all usable samples share one time; cannot fit a slope".into(),
        ));
    }
    let slope = stz / stt;
    let intercept = z_mean - slope * t_mean;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let r = zs[i] - (intercept + slope * ts[i]);
        ss_res += r * r;
        let d = zs[i] - z_mean;
        ss_tot += d * d;
    }
    let z_span = zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - zs.iter().cloned().fold(f64::INFINITY, f64::min);
    let no_decay = z_span < 1e-9;
    let r2 = if ss_tot > 0.0 && !no_decay {
        1.0 - ss_res / ss_tot
    } else {
        0.0
    };
    Ok(RateEstimate {
        ell: -slope,
        c: intercept.exp(),
        r2,
        window,
        n_used: n,
        no_decay,
    })
}

/// Outcome of certifying one diagnostic series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certification {
    /// Fitted rate exceeds the threshold with `r2 > 0.9`.
    Certified(RateEstimate),
    NotCertified(RateEstimate),
    /// Every sample in the window sits at the roundoff floor: the
    /// trajectory had already converged, nothing to fit.
    AlreadyConverged,
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }
    pub fn estimate(&self) -> Option<&RateEstimate> {
        match self {
            Certification::Certified(e) | Certification::NotCertified(e) => Some(e),
            Certification::AlreadyConverged => None,
        }
    }
}

/// A trailing plateau within a factor of this times the window minimum is
/// treated as the numerical saturation floor and dropped from the fit.
const SATURATION_FACTOR: f64 = 10.0;

/// Certify a series as exponentially decaying: fit over the fractional
/// window `[window_frac.0, window_frac.1]` of total time (skipping the
/// initial transient and the floor-saturated tail) and require
/// `ell > threshold_ell` and `r2 > 0.9`.
///
/// The saturation floor is scheme-dependent (a discrete trajectory freezes
/// once its update rounds to nothing), so the tail is detected relative to
/// the window minimum; it is only trimmed when that floor sits at least
/// three decades below the window maximum, which keeps a genuine physical
/// plateau from being silently discarded.
pub fn certify(
    series: &[(f64, f64)],
    threshold_ell: f64,
    window_frac: (f64, f64),
) -> Result<Certification> {
    if series.len() < 3 {
        return Err(Error::InvalidSeries(format!(
            "need at least 3 samples to certify, got {}",
            series.len()
        )));
    }
    let t0 = series[0].0;
    let t1 = series[series.len() - 1].0;
    let window = (
        t0 + window_frac.0 * (t1 - t0),
        t0 + window_frac.1 * (t1 - t0),
    );
    let in_window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if in_window.iter().all(|&(_, v)| v.abs() <= LOG_FLOOR) {
        return Ok(Certification::AlreadyConverged);
    }
    let floor_est = in_window
        .iter()
        .map(|&(_, v)| v)
        .filter(|&v| v > LOG_FLOOR)
        .fold(f64::INFINITY, f64::min);
    let peak = in_window.iter().map(|&(_, v)| v).fold(0.0_f64, f64::max);
    let mut window_end = window.1;
    if floor_est.is_finite() && floor_est < 1e-3 * peak {
        let level = SATURATION_FACTOR * floor_est;
        if let Some(idx) = in_window.iter().rposition(|&(_, v)| v > level) {
            if idx + 1 >= 8 {
                window_end = in_window[idx].0;
            }
        }
    }
    let est = fit_rate(series, (window.0, window_end))?;
    if est.ell > threshold_ell && est.r2 > 0.9 {
        Ok(Certification::Certified(est))
    } else {
        Ok(Certification::NotCertified(est))
    }
}

/// Default certification window: 25% to 90% of total time.
pub const DEFAULT_WINDOW_FRAC: (f64, f64) = (0.25, 0.90);
