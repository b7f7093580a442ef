//! Stability toolkit for a two-species chemotaxis-competition-diffusion system.
//!
//! The system couples two competing populations `u`, `v` and a chemical signal
//! `w` on a rectangle with zero-flux boundaries:
//!
//! ```text
//! u_t = d1 Δu − ∇·(u χ1(w) ∇w) + μ1 u (1 − u − a1 v)
//! v_t = d2 Δv − ∇·(v χ2(w) ∇w) + μ2 v (1 − a2 u − v)
//! w_t = d3 Δw + α u + β v − γ w
//! ```
//!
//! With `a1, a2 ∈ (0,1)` the system has a coexistence equilibrium
//! `(u*, v*, w*)`. This crate provides:
//!
//! - [`model`]: parameter sets, the coexistence steady state, sensitivity
//!   functions and hypothesis checkers for the constant-χ and decaying-χ
//!   sufficient conditions.
//! - [`quadform`]: positivity margins of ternary quadratic forms via the
//!   Sylvester criterion.
//! - [`region`]: the stability-region geometry in the rescaled `(s, t)`
//!   plane: three nested sufficient conditions, closed-form membership,
//!   and selection of the `(q, δ)` witness pair.
//! - [`lyapunov`]: the logarithmic energy functional, its dissipation
//!   constants and decay verification along discrete trajectories.
//! - [`solver`]: finite-difference simulation (explicit Euler and IMEX)
//!   with donor-cell chemotaxis fluxes.
//! - [`rate`]: exponential decay-rate fitting and certification.
//! - [`config`]: flat `key=value` run configuration.

// Validation uses negated comparisons (`!(v > 0.0)`) so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod lyapunov;
pub mod model;
pub mod numeric;
pub mod quadform;
pub mod rate;
pub mod region;
pub mod solver;

pub use error::Error;

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
