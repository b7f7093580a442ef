//! Finite-difference simulation of the chemotaxis-competition system on 1D
//! intervals and 2D rectangles with zero-flux boundaries.
//!
//! Space is discretized on a uniform cell-centered grid. Diffusion uses the
//! conservative flux form of the 3-point (1D) / 5-point (2D) stencil with
//! reflected ghost cells; the chemotaxis flux `u χ(w) ∇w` is evaluated at
//! faces with donor-cell (upwind) density, which preserves positivity;
//! kinetics are pointwise. Two time integrators are available: explicit
//! Euler (the reference scheme) and IMEX, which treats diffusion implicitly
//! via conjugate gradients and everything else explicitly.

use crate::model::{steady_state, ModelParams, SensitivitySpec, SteadyState};
use crate::numeric::pairwise_sum_by;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Floor applied to `w` when evaluating reciprocal sensitivities at faces.
pub const W_FLUX_FLOOR: f64 = 1e-12;

/// Relative residual target for the implicit diffusion solve.
const CG_TOL: f64 = 1e-10;

/// Uniform cell-centered rectangle grid (1D when `ny == 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn one_d(nx: usize, lx: f64) -> Result<Self> {
        if nx < 8 {
            return Err(Error::InvalidParameter(format!(
                "need at least 8 cells per direction, got nx = {nx}"
            )));
        }
        if !(lx > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "extent must be positive, got lx = {lx}"
            )));
        }
        Ok(Self {
            nx,
            ny: 1,
            lx,
            ly: 0.0,
        })
    }

    pub fn two_d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::InvalidParameter(format!(
                "need at least 8 cells per direction, got {nx} x {ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "extents must be positive, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn dimension(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn ncells(&self) -> usize {
        self.nx * self.ny
    }
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    /// Smallest spacing, the one entering stability bounds.
    pub fn h_min(&self) -> f64 {
        if self.ny == 1 {
            self.hx()
        } else {
            self.hx().min(self.hy())
        }
    }
    pub fn cell_measure(&self) -> f64 {
        if self.ny == 1 {
            self.hx()
        } else {
            self.hx() * self.hy()
        }
    }
    pub fn cell_x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx()
    }
    pub fn cell_y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy()
    }
}

/// Cell-centered values of the three unknowns at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTriple {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl FieldTriple {
    pub fn constant(grid: &Grid, u: f64, v: f64, w: f64) -> Self {
        let n = grid.ncells();
        Self {
            u: vec![u; n],
            v: vec![v; n],
            w: vec![w; n],
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let n = grid.ncells();
        for (name, f) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            if f.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "field {name} has {} cells, grid has {n}",
                    f.len()
                )));
            }
            if let Some((i, &bad)) = f
                .iter()
                .enumerate()
                .find(|(_, &x)| !x.is_finite() || x < 0.0)
            {
                return Err(Error::InvalidParameter(format!(
                    "field {name} has invalid value {bad} at cell {i}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    Imex,
}

/// Time-stepping configuration.
///
/// `dt = None` selects the adaptive step `cfl_bound` each step; a fixed `dt`
/// is validated against the bound every step under the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub snapshot_every: usize,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "dt must be positive, got {dt}"
                )));
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidParameter(
                "snapshot_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Initial data builder.
#[derive(Debug, Clone)]
pub enum InitialKind {
    /// Steady state times `1 + amplitude cos(mx π x/Lx) [cos(my π y/Ly)]`:
    /// cosine modes are compatible with zero-flux boundaries.
    ConstantPerturbation { amplitude: f64, modes: (u32, u32) },
    /// Steady state times `1 + amplitude ξ` with `ξ` uniform on `[-1, 1]`
    /// per cell, from a seeded generator.
    Random { amplitude: f64, seed: u64 },
    /// Externally supplied fields (e.g. parsed from snapshot files).
    FromFields(FieldTriple),
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub kind: InitialKind,
    /// Minimum value imposed on all fields; must be positive so the
    /// populations start not-identically-zero.
    pub floor: f64,
}

impl InitialData {
    pub fn build(&self, grid: &Grid, ss: Option<&SteadyState>) -> Result<FieldTriple> {
        if !(self.floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial-data floor must be positive, got {}",
                self.floor
            )));
        }
        let n = grid.ncells();
        let base = |what: &str| -> Result<(f64, f64, f64)> {
            match ss {
                Some(s) => Ok((s.u_star, s.v_star, s.w_star)),
                None => Err(Error::InvalidParameter(format!(
                    "{what} initial data needs a coexistence steady state"
                ))),
            }
        };
        let mut fields = match &self.kind {
            InitialKind::ConstantPerturbation { amplitude, modes } => {
                let (u0, v0, w0) = base("constant-perturbation")?;
                let (mx, my) = (modes.0 as f64, modes.1 as f64);
                let pattern = |k: usize| {
                    let i = k % grid.nx();
                    let j = k / grid.nx();
                    let px = (mx * std::f64::consts::PI * grid.cell_x(i) / grid.lx()).cos();
                    if grid.dimension() == 2 {
                        px * (my * std::f64::consts::PI * grid.cell_y(j) / grid.ly()).cos()
                    } else {
                        px
                    }
                };
                FieldTriple {
                    u: (0..n)
                        .map(|k| u0 * (1.0 + amplitude * pattern(k)))
                        .collect(),
                    v: (0..n)
                        .map(|k| v0 * (1.0 + amplitude * pattern(k)))
                        .collect(),
                    w: (0..n)
                        .map(|k| w0 * (1.0 + amplitude * pattern(k)))
                        .collect(),
                }
            }
            InitialKind::Random { amplitude, seed } => {
                let (u0, v0, w0) = base("random")?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut draw = |base: f64| -> Vec<f64> {
                    (0..n)
                        .map(|_| base * (1.0 + amplitude * rng.gen_range(-1.0..=1.0)))
                        .collect()
                };
                FieldTriple {
                    u: draw(u0),
                    v: draw(v0),
                    w: draw(w0),
                }
            }
            InitialKind::FromFields(f) => f.clone(),
        };
        for f in [&mut fields.u, &mut fields.v, &mut fields.w] {
            for x in f.iter_mut() {
                *x = x.max(self.floor);
            }
        }
        fields.validate(grid)?;
        Ok(fields)
    }
}

/// Conservative Neumann Laplacian (unit coefficient) in flux form.
fn laplacian_into(grid: &Grid, f: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let nx = grid.nx();
    let ny = grid.ny();
    let inv_hx2 = 1.0 / (grid.hx() * grid.hx());
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx - 1 {
            let d = (f[row + i + 1] - f[row + i]) * inv_hx2;
            out[row + i] += d;
            out[row + i + 1] -= d;
        }
    }
    if ny > 1 {
        let inv_hy2 = 1.0 / (grid.hy() * grid.hy());
        for j in 0..ny - 1 {
            for i in 0..nx {
                let k = j * nx + i;
                let d = (f[k + nx] - f[k]) * inv_hy2;
                out[k] += d;
                out[k + nx] -= d;
            }
        }
    }
}

/// Divergence of the donor-cell chemotaxis flux `dens · χ(w) ∇w`.
///
/// `component` selects χ1 (0) or χ2 (1). Faces on the boundary carry zero
/// flux. The donor cell is picked by the sign of the face gradient of `w`.
fn chemo_divergence_into(
    grid: &Grid,
    dens: &[f64],
    w: &[f64],
    spec: &SensitivitySpec,
    component: usize,
    out: &mut [f64],
) {
    out.fill(0.0);
    let nx = grid.nx();
    let ny = grid.ny();
    let pick = |pair: (f64, f64)| if component == 0 { pair.0 } else { pair.1 };

    let inv_hx = 1.0 / grid.hx();
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx - 1 {
            let k = row + i;
            let dw = (w[k + 1] - w[k]) * inv_hx;
            if dw == 0.0 {
                continue;
            }
            let chi = pick(spec.eval_floored(0.5 * (w[k] + w[k + 1]), W_FLUX_FLOOR));
            let vel = chi * dw;
            let flux = if vel >= 0.0 {
                dens[k] * vel
            } else {
                dens[k + 1] * vel
            };
            let c = flux * inv_hx;
            out[k] += c;
            out[k + 1] -= c;
        }
    }
    if ny > 1 {
        let inv_hy = 1.0 / grid.hy();
        for j in 0..ny - 1 {
            for i in 0..nx {
                let k = j * nx + i;
                let dw = (w[k + nx] - w[k]) * inv_hy;
                if dw == 0.0 {
                    continue;
                }
                let chi = pick(spec.eval_floored(0.5 * (w[k] + w[k + nx]), W_FLUX_FLOOR));
                let vel = chi * dw;
                let flux = if vel >= 0.0 {
                    dens[k] * vel
                } else {
                    dens[k + nx] * vel
                };
                let c = flux * inv_hy;
                out[k] += c;
                out[k + nx] -= c;
            }
        }
    }
}

/// Adaptive timestep bound.
///
/// `cfl_safety · min(diffusive, advective, kinetic)` with
///
/// - diffusive: `h² / (2 · dim · max dᵢ)` (skipped by the IMEX scheme),
/// - advective: `h / max |χ(w) ∇w|` over faces,
/// - kinetic: `1 / max(max(μ1, μ2)(1 + max u + max v), γ)`.
pub fn cfl_bound(
    p: &ModelParams,
    spec: &SensitivitySpec,
    grid: &Grid,
    fields: &FieldTriple,
    scheme: Scheme,
    cfl_safety: f64,
) -> f64 {
    let h = grid.h_min();
    let mut dt = f64::INFINITY;

    if scheme == Scheme::ExplicitEuler {
        let dmax = p.d1.max(p.d2).max(p.d3);
        if dmax > 0.0 {
            dt = dt.min(h * h / (2.0 * grid.dimension() as f64 * dmax));
        }
    }

    let mut vel_max = 0.0_f64;
    let nx = grid.nx();
    let ny = grid.ny();
    let w = &fields.w;
    let mut face_vel = |wa: f64, wb: f64, spacing: f64| {
        let dw = (wb - wa) / spacing;
        if dw != 0.0 {
            let (c1, c2) = spec.eval_floored(0.5 * (wa + wb), W_FLUX_FLOOR);
            vel_max = vel_max.max((c1 * dw).abs()).max((c2 * dw).abs());
        }
    };
    for j in 0..ny {
        for i in 0..nx - 1 {
            let k = j * nx + i;
            face_vel(w[k], w[k + 1], grid.hx());
        }
    }
    if ny > 1 {
        for j in 0..ny - 1 {
            for i in 0..nx {
                let k = j * nx + i;
                face_vel(w[k], w[k + nx], grid.hy());
            }
        }
    }
    if vel_max > 0.0 {
        dt = dt.min(h / vel_max);
    }

    let u_max = fields.u.iter().cloned().fold(0.0_f64, f64::max);
    let v_max = fields.v.iter().cloned().fold(0.0_f64, f64::max);
    let rate = (p.mu1.max(p.mu2) * (1.0 + u_max + v_max)).max(p.gamma);
    if rate > 0.0 {
        dt = dt.min(1.0 / rate);
    }

    cfl_safety * dt
}

struct Workspace {
    lap_u: Vec<f64>,
    lap_v: Vec<f64>,
    lap_w: Vec<f64>,
    div_u: Vec<f64>,
    div_v: Vec<f64>,
    cg_r: Vec<f64>,
    cg_p: Vec<f64>,
    cg_ap: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            lap_u: vec![0.0; n],
            lap_v: vec![0.0; n],
            lap_w: vec![0.0; n],
            div_u: vec![0.0; n],
            div_v: vec![0.0; n],
            cg_r: vec![0.0; n],
            cg_p: vec![0.0; n],
            cg_ap: vec![0.0; n],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `(I − coef·L) x = b` by conjugate gradients; `x` holds the initial
/// guess on entry. The operator is symmetric positive definite for any
/// `coef ≥ 0`.
fn cg_solve(grid: &Grid, coef: f64, b: &[f64], x: &mut [f64], ws: &mut Workspace) -> Result<()> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(());
    }
    laplacian_into(grid, x, &mut ws.lap_w);
    for i in 0..n {
        ws.cg_r[i] = b[i] - (x[i] - coef * ws.lap_w[i]);
    }
    let mut rs = dot(&ws.cg_r, &ws.cg_r);
    if rs.sqrt() <= CG_TOL * b_norm {
        return Ok(());
    }
    ws.cg_p.copy_from_slice(&ws.cg_r);
    let max_iters = 40 * (n as f64).sqrt() as usize + 200;
    for _ in 0..max_iters {
        laplacian_into(grid, &ws.cg_p, &mut ws.lap_w);
        for i in 0..n {
            ws.cg_ap[i] = ws.cg_p[i] - coef * ws.lap_w[i];
        }
        let alpha = rs / dot(&ws.cg_p, &ws.cg_ap);
        for (xi, &pi) in x.iter_mut().zip(&ws.cg_p) {
            *xi += alpha * pi;
        }
        for (ri, &api) in ws.cg_r.iter_mut().zip(&ws.cg_ap) {
            *ri -= alpha * api;
        }
        let rs_new = dot(&ws.cg_r, &ws.cg_r);
        if rs_new.sqrt() <= CG_TOL * b_norm {
            return Ok(());
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            ws.cg_p[i] = ws.cg_r[i] + beta * ws.cg_p[i];
        }
    }
    Err(Error::LinearSolve {
        iters: max_iters,
        residual: rs.sqrt() / b_norm,
    })
}

#[allow(clippy::too_many_arguments)]
fn step_into(
    grid: &Grid,
    p: &ModelParams,
    spec: &SensitivitySpec,
    scheme: Scheme,
    dt: f64,
    src: &FieldTriple,
    dst: &mut FieldTriple,
    ws: &mut Workspace,
) -> Result<()> {
    let n = grid.ncells();
    chemo_divergence_into(grid, &src.u, &src.w, spec, 0, &mut ws.div_u);
    chemo_divergence_into(grid, &src.v, &src.w, spec, 1, &mut ws.div_v);

    match scheme {
        Scheme::ExplicitEuler => {
            laplacian_into(grid, &src.u, &mut ws.lap_u);
            laplacian_into(grid, &src.v, &mut ws.lap_v);
            laplacian_into(grid, &src.w, &mut ws.lap_w);
            for i in 0..n {
                let (u, v, w) = (src.u[i], src.v[i], src.w[i]);
                dst.u[i] =
                    u + dt * (p.d1 * ws.lap_u[i] - ws.div_u[i] + p.mu1 * u * (1.0 - u - p.a1 * v));
                dst.v[i] =
                    v + dt * (p.d2 * ws.lap_v[i] - ws.div_v[i] + p.mu2 * v * (1.0 - p.a2 * u - v));
                dst.w[i] = w + dt * (p.d3 * ws.lap_w[i] + p.alpha * u + p.beta * v - p.gamma * w);
            }
        }
        Scheme::Imex => {
            // Explicit advection and kinetics assembled into the right-hand
            // side, then one implicit diffusion solve per field.
            for i in 0..n {
                let (u, v, w) = (src.u[i], src.v[i], src.w[i]);
                dst.u[i] = u + dt * (-ws.div_u[i] + p.mu1 * u * (1.0 - u - p.a1 * v));
                dst.v[i] = v + dt * (-ws.div_v[i] + p.mu2 * v * (1.0 - p.a2 * u - v));
                dst.w[i] = w + dt * (p.alpha * u + p.beta * v - p.gamma * w);
            }
            // Warm start from the explicit-part result itself: an early CG
            // exit then still carries the advection and kinetics, and a
            // spatially uniform field is solved exactly in zero iterations.
            ws.lap_u.copy_from_slice(&dst.u);
            let mut x = std::mem::take(&mut dst.u);
            let b = std::mem::take(&mut ws.lap_u);
            cg_solve(grid, dt * p.d1, &b, &mut x, ws)?;
            dst.u = x;
            ws.lap_u = b;

            ws.lap_v.copy_from_slice(&dst.v);
            let mut x = std::mem::take(&mut dst.v);
            let b = std::mem::take(&mut ws.lap_v);
            cg_solve(grid, dt * p.d2, &b, &mut x, ws)?;
            dst.v = x;
            ws.lap_v = b;

            ws.lap_u.copy_from_slice(&dst.w);
            let mut x = std::mem::take(&mut dst.w);
            let b = std::mem::take(&mut ws.lap_u);
            cg_solve(grid, dt * p.d3, &b, &mut x, ws)?;
            dst.w = x;
            ws.lap_u = b;
        }
    }
    Ok(())
}

fn check_fields(fields: &FieldTriple, step: usize) -> Result<()> {
    for (name, f) in [("u", &fields.u), ("v", &fields.v), ("w", &fields.w)] {
        for (i, &x) in f.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Blowup {
                    step,
                    what: format!("{name}[{i}] = {x}"),
                });
            }
        }
    }
    Ok(())
}

/// Advance one timestep, returning the new fields.
///
/// Uses `cfg.dt` when set (validated against [`cfl_bound`] for the explicit
/// scheme), the adaptive bound otherwise.
pub fn step(
    fields: &FieldTriple,
    p: &ModelParams,
    spec: &SensitivitySpec,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<FieldTriple> {
    cfg.validate()?;
    fields.validate(grid)?;
    let bound = cfl_bound(p, spec, grid, fields, cfg.scheme, cfg.cfl_safety);
    let dt = match cfg.dt {
        Some(dt) => {
            if cfg.scheme == Scheme::ExplicitEuler && dt > bound * (1.0 + 1e-12) {
                return Err(Error::CflViolation { step: 0, dt, bound });
            }
            dt
        }
        None => bound,
    };
    let mut dst = fields.clone();
    let mut ws = Workspace::new(grid.ncells());
    step_into(grid, p, spec, cfg.scheme, dt, fields, &mut dst, &mut ws)?;
    check_fields(&dst, 0)?;
    Ok(dst)
}

/// Per-snapshot diagnostics.
///
/// Distances are against the coexistence steady state and are NaN when the
/// parameters do not admit one (degenerate verification runs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub du_inf: f64,
    pub dv_inf: f64,
    pub dw_inf: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub mass_w: f64,
    pub gradw2: f64,
}

fn diagnostics(
    grid: &Grid,
    fields: &FieldTriple,
    ss: Option<&SteadyState>,
    time: f64,
) -> Diagnostics {
    let sup_dist = |f: &[f64], star: Option<f64>| match star {
        Some(s) => f.iter().fold(0.0_f64, |m, &x| m.max((x - s).abs())),
        None => f64::NAN,
    };
    let minmax = |f: &[f64]| {
        f.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    };
    let measure = grid.cell_measure();
    let mass = |f: &[f64]| pairwise_sum_by(f.len(), |i| f[i]) * measure;
    let (min_u, max_u) = minmax(&fields.u);
    let (min_v, max_v) = minmax(&fields.v);
    let (min_w, max_w) = minmax(&fields.w);
    Diagnostics {
        time,
        du_inf: sup_dist(&fields.u, ss.map(|s| s.u_star)),
        dv_inf: sup_dist(&fields.v, ss.map(|s| s.v_star)),
        dw_inf: sup_dist(&fields.w, ss.map(|s| s.w_star)),
        min_u,
        max_u,
        min_v,
        max_v,
        min_w,
        max_w,
        mass_u: mass(&fields.u),
        mass_v: mass(&fields.v),
        mass_w: mass(&fields.w),
        gradw2: crate::lyapunov::grad_squared_integral(grid, &fields.w),
    }
}

/// A completed run: snapshot times, field triples, and diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub fields: Vec<FieldTriple>,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
}

/// Run the simulation to `t_end`, snapshotting every `snapshot_every` steps
/// (plus the initial and final states).
pub fn run(
    p: &ModelParams,
    spec: &SensitivitySpec,
    grid: &Grid,
    cfg: &SolverConfig,
    init: &InitialData,
) -> Result<Trajectory> {
    cfg.validate()?;
    let ss = steady_state(p).ok();
    let mut cur = init.build(grid, ss.as_ref())?;
    let mut next = cur.clone();
    let mut ws = Workspace::new(grid.ncells());

    let mut traj = Trajectory {
        grid: *grid,
        times: vec![0.0],
        fields: vec![cur.clone()],
        diagnostics: vec![diagnostics(grid, &cur, ss.as_ref(), 0.0)],
        steps: 0,
    };

    let mut t = 0.0_f64;
    let t_tol = 1e-12 * cfg.t_end.max(1.0);
    let mut step_idx = 0usize;
    while t < cfg.t_end - t_tol {
        let needs_bound = cfg.dt.is_none() || cfg.scheme == Scheme::ExplicitEuler;
        let bound = if needs_bound {
            cfl_bound(p, spec, grid, &cur, cfg.scheme, cfg.cfl_safety)
        } else {
            f64::INFINITY
        };
        let mut dt = match cfg.dt {
            Some(dt) => {
                if cfg.scheme == Scheme::ExplicitEuler && dt > bound * (1.0 + 1e-12) {
                    return Err(Error::CflViolation {
                        step: step_idx,
                        dt,
                        bound,
                    });
                }
                dt
            }
            None => bound,
        };
        if t + dt > cfg.t_end {
            dt = cfg.t_end - t;
        }
        step_into(grid, p, spec, cfg.scheme, dt, &cur, &mut next, &mut ws)?;
        check_fields(&next, step_idx)?;
        std::mem::swap(&mut cur, &mut next);
        step_idx += 1;
        t += dt;
        if step_idx.is_multiple_of(cfg.snapshot_every) || t >= cfg.t_end - t_tol {
            traj.times.push(t);
            traj.fields.push(cur.clone());
            traj.diagnostics
                .push(diagnostics(grid, &cur, ss.as_ref(), t));
        }
    }
    traj.steps = step_idx;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_params;

    fn constant_chi(chi: f64) -> SensitivitySpec {
        SensitivitySpec::constant(chi, chi).unwrap()
    }

    fn explicit_cfg(t_end: f64) -> SolverConfig {
        SolverConfig {
            dt: None,
            t_end,
            scheme: Scheme::ExplicitEuler,
            cfl_safety: 0.2,
            snapshot_every: 100,
        }
    }

    #[test]
    fn steady_state_is_a_discrete_fixed_point() {
        let p = reference_params();
        let ss = steady_state(&p).unwrap();
        let grid = Grid::one_d(16, 1.0).unwrap();
        let spec = constant_chi(0.1);
        for scheme in [Scheme::ExplicitEuler, Scheme::Imex] {
            let cfg = SolverConfig {
                scheme,
                ..explicit_cfg(0.0)
            };
            let mut fields = FieldTriple::constant(&grid, ss.u_star, ss.v_star, ss.w_star);
            for _ in 0..100 {
                fields = step(&fields, &p, &spec, &grid, &cfg).unwrap();
            }
            for (f, star) in [
                (&fields.u, ss.u_star),
                (&fields.v, ss.v_star),
                (&fields.w, ss.w_star),
            ] {
                for &x in f {
                    assert!(
                        (x - star).abs() <= 100.0 * f64::EPSILON * star,
                        "drift {:.3e} under {scheme:?}",
                        (x - star).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn hand_computed_explicit_step() {
        // 8-cell interval, h = 0.25; values away from the active cells are
        // zero so only local stencils fire.
        let grid = Grid::one_d(8, 2.0).unwrap();
        let p = ModelParams {
            d1: 0.5,
            d2: 1.0,
            d3: 0.25,
            mu1: 2.0,
            mu2: 1.0,
            a1: 0.3,
            a2: 0.5,
            alpha: 1.0,
            beta: 0.5,
            gamma: 2.0,
            m1: 1.0,
            m2: 1.0,
        };
        let spec = constant_chi(1.0);
        let mut fields = FieldTriple::constant(&grid, 0.0, 0.0, 0.0);
        fields.u[0] = 0.1;
        fields.u[1] = 0.3;
        fields.u[2] = 0.2;
        fields.u[7] = 0.05;
        fields.w[0] = 0.2;
        fields.w[1] = 0.1;
        fields.w[2] = 0.4;
        fields.w[3] = 0.1;
        let cfg = SolverConfig {
            dt: Some(0.01),
            cfl_safety: 1.0,
            ..explicit_cfg(0.0)
        };
        let next = step(&fields, &p, &spec, &grid, &cfg).unwrap();
        // Cell 1: lap = -4.8, chemo divergence = 1.92, kinetics = 0.42.
        assert!((next.u[1] - 0.261).abs() < 1e-12, "u1 = {}", next.u[1]);
        // Cell 0: lap = 3.2, chemo divergence = -0.48, kinetics = 0.18.
        assert!((next.u[0] - 0.1226).abs() < 1e-12, "u0 = {}", next.u[0]);
        // Cell 1 of w: lap = 6.4, source = 1*0.3 + 0 - 2*0.1 = 0.1.
        assert!((next.w[1] - 0.117).abs() < 1e-12, "w1 = {}", next.w[1]);
        // v stays identically zero.
        assert!(next.v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pure_diffusion_conserves_mass() {
        // mu = 0 and chi = 0: u follows the discrete heat equation.
        let grid = Grid::one_d(32, 1.0).unwrap();
        let p = ModelParams {
            mu1: 0.0,
            mu2: 0.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            ..reference_params()
        };
        let spec = constant_chi(0.0);
        let mut fields = FieldTriple::constant(&grid, 0.0, 0.1, 0.1);
        fields.u[10] = 5.0; // spike
        let mass0: f64 = fields.u.iter().sum::<f64>() * grid.cell_measure();
        let cfg = explicit_cfg(0.0);
        for _ in 0..1000 {
            fields = step(&fields, &p, &spec, &grid, &cfg).unwrap();
        }
        let mass1: f64 = fields.u.iter().sum::<f64>() * grid.cell_measure();
        assert!((mass1 - mass0).abs() <= 1e-12 * mass0);
        // The spike spreads toward the mean.
        let mean = mass1 / grid.lx();
        assert!(fields.u.iter().all(|&x| (x - mean).abs() < 1.0));
    }

    #[test]
    fn zero_flux_conserves_all_masses_with_chemotaxis() {
        // Kinetics and signal source off, chemotaxis on: every field mass is
        // conserved by the flux-form stencils.
        let grid = Grid::one_d(24, 1.5).unwrap();
        let p = ModelParams {
            mu1: 0.0,
            mu2: 0.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            ..reference_params()
        };
        let spec = constant_chi(0.5);
        let mut fields = FieldTriple::constant(&grid, 0.2, 0.3, 0.0);
        for i in 0..24 {
            fields.w[i] = 0.5 + 0.3 * (grid.cell_x(i) * 2.0).sin();
            fields.u[i] += 0.1 * (grid.cell_x(i) * 3.0).cos().abs();
        }
        let mass = |f: &[f64]| f.iter().sum::<f64>() * grid.cell_measure();
        let m0 = (mass(&fields.u), mass(&fields.v), mass(&fields.w));
        let cfg = explicit_cfg(0.0);
        for _ in 0..1000 {
            fields = step(&fields, &p, &spec, &grid, &cfg).unwrap();
        }
        let m1 = (mass(&fields.u), mass(&fields.v), mass(&fields.w));
        assert!((m1.0 - m0.0).abs() <= 1e-12 * m0.0);
        assert!((m1.1 - m0.1).abs() <= 1e-12 * m0.1);
        assert!((m1.2 - m0.2).abs() <= 1e-12 * m0.2.max(1.0));
    }

    #[test]
    fn constant_fields_stay_constant() {
        let p = reference_params();
        let spec = constant_chi(0.1);
        let grid = Grid::one_d(16, 1.0).unwrap();
        let mut fields = FieldTriple::constant(&grid, 0.4, 0.9, 0.7);
        let cfg = explicit_cfg(0.0);
        for _ in 0..1000 {
            fields = step(&fields, &p, &spec, &grid, &cfg).unwrap();
            let spread = |f: &[f64]| {
                f.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - f.iter().cloned().fold(f64::INFINITY, f64::min)
            };
            assert_eq!(spread(&fields.u), 0.0);
            assert_eq!(spread(&fields.v), 0.0);
            assert_eq!(spread(&fields.w), 0.0);
        }
    }

    #[test]
    fn cfl_bound_examples() {
        let grid = Grid::one_d(10, 1.0).unwrap(); // h = 0.1
        let p = reference_params(); // d = 1, mu = 1, gamma = 1
        let spec = constant_chi(0.0);
        let zero = FieldTriple::constant(&grid, 0.0, 0.0, 0.0);
        let b = cfl_bound(&p, &spec, &grid, &zero, Scheme::ExplicitEuler, 0.5);
        assert!((b - 0.5 * 0.005).abs() < 1e-15);

        // Strong signal gradient: advective term governs.
        let spec_big = constant_chi(50.0);
        let mut fields = FieldTriple::constant(&grid, 0.1, 0.1, 0.0);
        for i in 0..10 {
            fields.w[i] = i as f64; // |grad w| = 10
        }
        let b_adv = cfl_bound(&p, &spec_big, &grid, &fields, Scheme::ExplicitEuler, 1.0);
        assert!((b_adv - 0.1 / 500.0).abs() < 1e-12);

        // IMEX drops the diffusive restriction.
        let b_imex = cfl_bound(&p, &spec, &grid, &zero, Scheme::Imex, 1.0);
        assert!((b_imex - 1.0).abs() < 1e-15); // kinetic bound 1/(mu*(1+0+0))
    }

    #[test]
    fn imex_matches_explicit_at_small_dt() {
        let p = reference_params();
        let spec = constant_chi(0.1);
        let grid = Grid::one_d(16, 1.0).unwrap();
        let ss = steady_state(&p).unwrap();
        let init = InitialData {
            kind: InitialKind::ConstantPerturbation {
                amplitude: 0.05,
                modes: (1, 0),
            },
            floor: 1e-6,
        };
        let fields = init.build(&grid, Some(&ss)).unwrap();
        let cfg_e = SolverConfig {
            dt: Some(1e-5),
            ..explicit_cfg(0.0)
        };
        let cfg_i = SolverConfig {
            scheme: Scheme::Imex,
            ..cfg_e
        };
        let mut fe = fields.clone();
        let mut fi = fields;
        for _ in 0..100 {
            fe = step(&fe, &p, &spec, &grid, &cfg_e).unwrap();
            fi = step(&fi, &p, &spec, &grid, &cfg_i).unwrap();
        }
        let max_diff =
            fe.u.iter()
                .zip(&fi.u)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
        assert!(max_diff < 1e-6, "schemes diverged by {max_diff}");
    }

    #[test]
    fn initial_data_floor_and_determinism() {
        let p = reference_params();
        let ss = steady_state(&p).unwrap();
        let grid = Grid::one_d(32, 1.0).unwrap();
        let init = InitialData {
            kind: InitialKind::Random {
                amplitude: 0.5,
                seed: 9,
            },
            floor: 1e-6,
        };
        let a = init.build(&grid, Some(&ss)).unwrap();
        let b = init.build(&grid, Some(&ss)).unwrap();
        assert_eq!(a, b);
        assert!(a.u.iter().all(|&x| x >= 1e-6));
        assert!(a.u.iter().any(|&x| x > 0.0));
        let other = InitialData {
            kind: InitialKind::Random {
                amplitude: 0.5,
                seed: 10,
            },
            floor: 1e-6,
        };
        assert_ne!(a, other.build(&grid, Some(&ss)).unwrap());
    }

    #[test]
    fn blowup_is_reported_with_step_index() {
        // IMEX skips the diffusive CFL check, so a huge dt drives the
        // explicit kinetics unstable and negative.
        let p = ModelParams {
            mu1: 50.0,
            mu2: 50.0,
            ..reference_params()
        };
        let spec = constant_chi(0.0);
        let grid = Grid::one_d(8, 1.0).unwrap();
        let cfg = SolverConfig {
            dt: Some(5.0),
            t_end: 50.0,
            scheme: Scheme::Imex,
            cfl_safety: 1.0,
            snapshot_every: 1,
        };
        let init = InitialData {
            kind: InitialKind::ConstantPerturbation {
                amplitude: 0.4,
                modes: (1, 0),
            },
            floor: 1e-6,
        };
        match run(&p, &spec, &grid, &cfg, &init) {
            Err(Error::Blowup { .. }) => {}
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn explicit_rejects_oversized_fixed_dt() {
        let p = reference_params();
        let spec = constant_chi(0.1);
        let grid = Grid::one_d(64, 1.0).unwrap();
        let cfg = SolverConfig {
            dt: Some(0.1),
            ..explicit_cfg(1.0)
        };
        let init = InitialData {
            kind: InitialKind::Random {
                amplitude: 0.1,
                seed: 1,
            },
            floor: 1e-6,
        };
        match run(&p, &spec, &grid, &cfg, &init) {
            Err(Error::CflViolation { .. }) => {}
            other => panic!("expected CFL violation, got {other:?}"),
        }
    }

    #[test]
    fn reciprocal_sensitivity_run_stays_positive() {
        // chi = K/w with the face floor active; the run must stay finite and
        // nonnegative and still settle toward the steady state.
        let p = ModelParams {
            mu1: 5.0,
            mu2: 5.0,
            m1: 0.2,
            m2: 0.2,
            ..reference_params()
        };
        // sup over w in [w_min, inf) is bounded by K / w_min; the fields sit
        // near w* = 4/3 so M = 0.2 comfortably bounds chi there.
        let spec = SensitivitySpec::reciprocal(0.05, 0.05).unwrap();
        let grid = Grid::one_d(32, 1.0).unwrap();
        let cfg = explicit_cfg(1.0);
        let init = InitialData {
            kind: InitialKind::Random {
                amplitude: 0.2,
                seed: 5,
            },
            floor: 1e-6,
        };
        let traj = run(&p, &spec, &grid, &cfg, &init).unwrap();
        let first = &traj.diagnostics[0];
        let last = traj.diagnostics.last().unwrap();
        assert!(last.min_u >= 0.0 && last.min_v >= 0.0 && last.min_w >= 0.0);
        assert!(last.du_inf < 0.1 * first.du_inf);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::one_d(4, 1.0).is_err());
        assert!(Grid::two_d(16, 4, 1.0, 1.0).is_err());
        assert!(Grid::one_d(8, 0.0).is_err());
        let g = Grid::two_d(8, 16, 2.0, 4.0).unwrap();
        assert_eq!(g.dimension(), 2);
        assert_eq!(g.cell_measure(), 0.25 * 0.25);
    }
}
