//! Flat `key=value` run configuration.
//!
//! One key per line; blank lines and lines starting with `#` are ignored.
//! Model keys: `d1 d2 d3 mu1 mu2 a1 a2 alpha beta gamma chi_kind chi1 chi2
//! K1 K2 M1 M2`. Solver keys: `nx ny lx ly dt t_end scheme cfl_safety
//! snapshot_every init_kind init_amplitude seed`. Optional hypothesis-check
//! keys: `n convex eta p_exp c_chi`.
//!
//! Unset solver keys take documented defaults; `ny` selects a 2D run when
//! present. `dt=auto` (the default) picks the adaptive stability bound each
//! step. Sensitivity bounds `M1, M2` default to the sensitivity's maximum
//! over the standard sample grid.

use std::collections::BTreeMap;
use std::path::Path;

use crate::model::{default_w_grid, ModelParams, SensitivitySpec};
use crate::solver::{Grid, InitialData, InitialKind, Scheme, SolverConfig};
use crate::{Error, Result};

/// Hypothesis-checker settings (all optional in the file).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    /// Space dimension used by the hypothesis checkers.
    pub n: u32,
    /// Whether the domain is taken as convex.
    pub convex: bool,
    /// Smoothness exponent for the decaying-sensitivity check.
    pub eta: f64,
    /// Integrability exponent; defaults to `n + 1` when absent.
    pub p_exp: Option<f64>,
    /// Bound for `w χ(w)`; defaults to the sampled maximum when absent.
    pub c_chi: Option<f64>,
}

/// A fully parsed run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub model: ModelParams,
    pub chi: SensitivitySpec,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub init: InitialData,
    pub checks: CheckSettings,
}

const KNOWN_KEYS: &[&str] = &[
    "d1",
    "d2",
    "d3",
    "mu1",
    "mu2",
    "a1",
    "a2",
    "alpha",
    "beta",
    "gamma",
    "chi_kind",
    "chi1",
    "chi2",
    "K1",
    "K2",
    "M1",
    "M2",
    "nx",
    "ny",
    "lx",
    "ly",
    "dt",
    "t_end",
    "scheme",
    "cfl_safety",
    "snapshot_every",
    "init_kind",
    "init_amplitude",
    "seed",
    "n",
    "convex",
    "eta",
    "p_exp",
    "c_chi",
];

/// Default floor applied to initial data.
pub const INIT_FLOOR: f64 = 1e-6;

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected key=value, got {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "line {}: unknown key {key:?}",
                lineno + 1
            )));
        }
        if map.insert(key, value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    build(&map)
}

fn get_f64(map: &BTreeMap<&str, &str>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("key {key}: expected a number, got {v:?}"))),
    }
}

fn get_usize(map: &BTreeMap<&str, &str>, key: &str, default: usize) -> Result<usize> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("key {key}: expected an integer, got {v:?}"))),
    }
}

fn build(map: &BTreeMap<&str, &str>) -> Result<Config> {
    let chi_kind = map.get("chi_kind").copied().unwrap_or("constant");
    let chi = match chi_kind {
        "constant" => {
            SensitivitySpec::constant(get_f64(map, "chi1", 0.0)?, get_f64(map, "chi2", 0.0)?)?
        }
        "reciprocal" => {
            SensitivitySpec::reciprocal(get_f64(map, "K1", 0.0)?, get_f64(map, "K2", 0.0)?)?
        }
        other => {
            return Err(Error::Config(format!(
                "chi_kind must be constant or reciprocal, got {other:?} \
                 (tabulated sensitivities are constructed through the API)"
            )))
        }
    };

    let grid_for_bounds = default_w_grid();
    let (sup1, sup2) = chi.max_on_grid(&grid_for_bounds)?;
    let model = ModelParams {
        d1: get_f64(map, "d1", 1.0)?,
        d2: get_f64(map, "d2", 1.0)?,
        d3: get_f64(map, "d3", 1.0)?,
        mu1: get_f64(map, "mu1", 1.0)?,
        mu2: get_f64(map, "mu2", 1.0)?,
        a1: get_f64(map, "a1", 0.5)?,
        a2: get_f64(map, "a2", 0.5)?,
        alpha: get_f64(map, "alpha", 1.0)?,
        beta: get_f64(map, "beta", 1.0)?,
        gamma: get_f64(map, "gamma", 1.0)?,
        m1: get_f64(map, "M1", sup1)?,
        m2: get_f64(map, "M2", sup2)?,
    };
    model.validate()?;
    model.validate_sensitivity_bounds(&chi, &grid_for_bounds)?;

    let nx = get_usize(map, "nx", 128)?;
    let lx = get_f64(map, "lx", 1.0)?;
    let grid = match map.get("ny") {
        Some(_) => {
            let ny = get_usize(map, "ny", 0)?;
            let ly = get_f64(map, "ly", lx)?;
            Grid::two_d(nx, ny, lx, ly)?
        }
        None => Grid::one_d(nx, lx)?,
    };

    let dt = match map.get("dt") {
        None => None,
        Some(&"auto") => None,
        Some(v) => Some(v.parse::<f64>().map_err(|_| {
            Error::Config(format!("key dt: expected a number or \"auto\", got {v:?}"))
        })?),
    };
    let scheme = match map.get("scheme").copied().unwrap_or("explicit-euler") {
        "explicit-euler" => Scheme::ExplicitEuler,
        "imex" => Scheme::Imex,
        other => {
            return Err(Error::Config(format!(
                "scheme must be explicit-euler or imex, got {other:?}"
            )))
        }
    };
    let solver = SolverConfig {
        dt,
        t_end: get_f64(map, "t_end", 10.0)?,
        scheme,
        cfl_safety: get_f64(map, "cfl_safety", 0.2)?,
        snapshot_every: get_usize(map, "snapshot_every", 100)?,
    };
    solver.validate()?;

    let amplitude = get_f64(map, "init_amplitude", 0.1)?;
    let seed = match map.get("seed") {
        None => 1,
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("key seed: expected an integer, got {v:?}")))?,
    };
    let init = InitialData {
        kind: match map.get("init_kind").copied().unwrap_or("random") {
            "random" => InitialKind::Random { amplitude, seed },
            "constant-perturbation" => InitialKind::ConstantPerturbation {
                amplitude,
                modes: (1, 1),
            },
            other => {
                return Err(Error::Config(format!(
                    "init_kind must be random or constant-perturbation, got {other:?}"
                )))
            }
        },
        floor: INIT_FLOOR,
    };

    let n = match map.get("n") {
        None => 2,
        Some(v) => v
            .parse::<u32>()
            .map_err(|_| Error::Config(format!("key n: expected an integer, got {v:?}")))?,
    };
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    let convex = match map.get("convex").copied() {
        None => false,
        Some("true") => true,
        Some("false") => false,
        Some(other) => {
            return Err(Error::Config(format!(
                "convex must be true or false, got {other:?}"
            )))
        }
    };
    let checks = CheckSettings {
        n,
        convex,
        eta: get_f64(map, "eta", 0.5)?,
        p_exp: map
            .get("p_exp")
            .map(|_| get_f64(map, "p_exp", 0.0))
            .transpose()?,
        c_chi: map
            .get("c_chi")
            .map(|_| get_f64(map, "c_chi", 0.0))
            .transpose()?,
    };

    Ok(Config {
        model,
        chi,
        grid,
        solver,
        init,
        checks,
    })
}

/// The symmetric reference parameter set used across tests and docs:
/// unit diffusivities and rates, `a1 = a2 = 1/2`, `χ` bounds `0.1`.
pub fn reference_params() -> ModelParams {
    ModelParams {
        d1: 1.0,
        d2: 1.0,
        d3: 1.0,
        mu1: 1.0,
        mu2: 1.0,
        a1: 0.5,
        a2: 0.5,
        alpha: 1.0,
        beta: 1.0,
        gamma: 1.0,
        m1: 0.1,
        m2: 0.1,
    }
}
