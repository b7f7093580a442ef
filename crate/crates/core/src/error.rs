//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The rescaled point lies outside the union stability region, so no
    /// admissible `(q, δ)` pair exists.
    #[error(
        "stability condition violated: max over q of f(q) - s - q t is {margin:.6e} (not positive)"
    )]
    OutOfRegion { margin: f64 },

    /// A quadratic form handed to the margin search does not satisfy the
    /// positivity hypothesis (some leading minor is nonpositive).
    #[error(
        "quadratic form hypothesis not satisfied: minors at 0 are ({g1:.6e}, {g2:.6e}, {g3:.6e})"
    )]
    HypothesisNotSatisfied { g1: f64, g2: f64, g3: f64 },

    /// Dissipation constants came out nonpositive for the supplied witness.
    #[error("inconsistent witness: {0}")]
    InconsistentWitness(String),

    /// A field became NaN/infinite or negative during time stepping.
    #[error("solver blowup at step {step}: {what}")]
    Blowup { step: usize, what: String },

    /// Fixed timestep exceeds the stability bound for the explicit scheme.
    #[error("CFL violation at step {step}: dt = {dt:.6e} exceeds bound {bound:.6e}")]
    CflViolation { step: usize, dt: f64, bound: f64 },

    /// The implicit diffusion solve failed to reach the residual target.
    #[error(
        "conjugate gradient stalled after {iters} iterations (relative residual {residual:.3e})"
    )]
    LinearSolve { iters: usize, residual: f64 },

    /// Energy evaluation hit a nonpositive density where a logarithm is taken.
    #[error("nonpositive {field} value {value:.6e} at cell {index}")]
    NonpositiveField {
        field: &'static str,
        value: f64,
        index: usize,
    },

    /// A time series is unusable for rate fitting.
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// Configuration file problems (missing keys, unknown keys, bad values).
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
