//! Model constants, the coexistence steady state, sensitivity functions, and
//! the hypothesis checkers for the two sufficient-condition families
//! (constant sensitivities; signal-dependent decaying sensitivities).

use crate::{Error, Result};

/// All constants of the PDE system plus the sensitivity bounds `M1, M2`.
///
/// `d1, d2, d3` are diffusivities, `mu1, mu2` kinetic rates, `a1, a2`
/// competition coefficients, `alpha, beta, gamma` signal production/decay
/// rates, and `m1, m2` upper bounds for `χ1, χ2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m1: f64,
    pub m2: f64,
}

impl ModelParams {
    /// Validate the invariants required by the stability analysis:
    /// strictly positive rates and diffusivities, `a1, a2 ∈ (0, 1)`,
    /// nonnegative sensitivity bounds.
    ///
    /// The solver accepts degenerate (zero-rate) parameters for verification
    /// runs, so this is enforced at the analysis entry points and on config
    /// load, not on construction.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        for (name, v) in [("a1", self.a1), ("a2", self.a2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        for (name, v) in [("M1", self.m1), ("M2", self.m2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Check that `m1, m2` really bound the attached sensitivity, by
    /// sampling over `grid`.
    pub fn validate_sensitivity_bounds(&self, spec: &SensitivitySpec, grid: &[f64]) -> Result<()> {
        let (sup1, sup2) = spec.max_on_grid(grid)?;
        if self.m1 < sup1 {
            return Err(Error::InvalidParameter(format!(
                "M1 = {} is below the sampled supremum {sup1} of chi1",
                self.m1
            )));
        }
        if self.m2 < sup2 {
            return Err(Error::InvalidParameter(format!(
                "M2 = {} is below the sampled supremum {sup2} of chi2",
                self.m2
            )));
        }
        Ok(())
    }
}

/// The spatially constant coexistence equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub u_star: f64,
    pub v_star: f64,
    pub w_star: f64,
}

/// Coexistence steady state
/// `u* = (1−a1)/(1−a1 a2)`, `v* = (1−a2)/(1−a1 a2)`, `w* = (α u* + β v*)/γ`.
///
/// Rejects `a1, a2` outside `(0, 1)` (where the triple degenerates or loses
/// positivity).
pub fn steady_state(p: &ModelParams) -> Result<SteadyState> {
    if !(p.a1 > 0.0 && p.a1 < 1.0 && p.a2 > 0.0 && p.a2 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coexistence steady state needs a1, a2 in (0, 1), got a1 = {}, a2 = {}",
            p.a1, p.a2
        )));
    }
    let denom = 1.0 - p.a1 * p.a2;
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "a1 * a2 = {} must be below 1",
            p.a1 * p.a2
        )));
    }
    let u_star = (1.0 - p.a1) / denom;
    let v_star = (1.0 - p.a2) / denom;
    let w_star = (p.alpha * u_star + p.beta * v_star) / p.gamma;
    Ok(SteadyState {
        u_star,
        v_star,
        w_star,
    })
}

/// Chemotactic sensitivity functions `w ↦ (χ1(w), χ2(w))`.
#[derive(Debug, Clone, PartialEq)]
pub enum SensitivitySpec {
    /// Constant sensitivities.
    Constant { chi1: f64, chi2: f64 },
    /// Nonnegative samples over a sorted `w` grid, evaluated by linear
    /// interpolation and clamped outside the tabulated range.
    Tabulated {
        w: Vec<f64>,
        chi1: Vec<f64>,
        chi2: Vec<f64>,
    },
    /// `χi(w) = Ki / w`; evaluation requires `w > 0`.
    Reciprocal { k1: f64, k2: f64 },
}

impl SensitivitySpec {
    pub fn constant(chi1: f64, chi2: f64) -> Result<Self> {
        if !(chi1 >= 0.0 && chi2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "constant sensitivities must be nonnegative, got ({chi1}, {chi2})"
            )));
        }
        Ok(Self::Constant { chi1, chi2 })
    }

    pub fn reciprocal(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 >= 0.0 && k2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reciprocal coefficients must be nonnegative, got ({k1}, {k2})"
            )));
        }
        Ok(Self::Reciprocal { k1, k2 })
    }

    pub fn tabulated(w: Vec<f64>, chi1: Vec<f64>, chi2: Vec<f64>) -> Result<Self> {
        if w.len() < 2 || w.len() != chi1.len() || w.len() != chi2.len() {
            return Err(Error::InvalidParameter(
                "tabulated sensitivity needs >= 2 samples with matching lengths".into(),
            ));
        }
        if !w.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::InvalidParameter(
                "tabulated sensitivity grid must be strictly increasing".into(),
            ));
        }
        if w[0] < 0.0 {
            return Err(Error::InvalidParameter(
                "tabulated sensitivity grid must be nonnegative".into(),
            ));
        }
        if chi1.iter().chain(chi2.iter()).any(|&c| c < 0.0) {
            return Err(Error::InvalidParameter(
                "sensitivity samples must be nonnegative".into(),
            ));
        }
        Ok(Self::Tabulated { w, chi1, chi2 })
    }

    /// Evaluate `(χ1(w), χ2(w))`.
    pub fn eval(&self, w: f64) -> Result<(f64, f64)> {
        match self {
            Self::Constant { chi1, chi2 } => Ok((*chi1, *chi2)),
            Self::Tabulated { w: ws, chi1, chi2 } => Ok((interp(ws, chi1, w), interp(ws, chi2, w))),
            Self::Reciprocal { k1, k2 } => {
                if !(w > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "reciprocal sensitivity requires w > 0, got {w}"
                    )));
                }
                Ok((k1 / w, k2 / w))
            }
        }
    }

    /// Infallible evaluation for flux assembly: the reciprocal kind floors
    /// `w` at `floor` instead of erroring, the others evaluate as usual.
    pub fn eval_floored(&self, w: f64, floor: f64) -> (f64, f64) {
        match self {
            Self::Constant { chi1, chi2 } => (*chi1, *chi2),
            Self::Tabulated { w: ws, chi1, chi2 } => (interp(ws, chi1, w), interp(ws, chi2, w)),
            Self::Reciprocal { k1, k2 } => {
                let w = w.max(floor);
                (k1 / w, k2 / w)
            }
        }
    }

    /// Derivative `(χ1'(w), χ2'(w))`: analytic for the constant and
    /// reciprocal kinds, central differences with step
    /// `h = max(1e-6, 1e-6 w)` otherwise.
    pub fn derivative(&self, w: f64) -> Result<(f64, f64)> {
        match self {
            Self::Constant { .. } => Ok((0.0, 0.0)),
            Self::Reciprocal { k1, k2 } => {
                if !(w > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "reciprocal sensitivity requires w > 0, got {w}"
                    )));
                }
                Ok((-k1 / (w * w), -k2 / (w * w)))
            }
            Self::Tabulated { .. } => {
                let h = (1e-6_f64).max(1e-6 * w);
                if w - h >= 0.0 {
                    let lo = self.eval(w - h)?;
                    let hi = self.eval(w + h)?;
                    Ok(((hi.0 - lo.0) / (2.0 * h), (hi.1 - lo.1) / (2.0 * h)))
                } else {
                    let at = self.eval(w)?;
                    let hi = self.eval(w + h)?;
                    Ok(((hi.0 - at.0) / h, (hi.1 - at.1) / h))
                }
            }
        }
    }

    /// Componentwise maximum of `(χ1, χ2)` over the sample grid.
    pub fn max_on_grid(&self, grid: &[f64]) -> Result<(f64, f64)> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty sample grid".into()));
        }
        let mut m1 = 0.0_f64;
        let mut m2 = 0.0_f64;
        for &w in grid {
            let (c1, c2) = self.eval(w)?;
            m1 = m1.max(c1);
            m2 = m2.max(c2);
        }
        Ok((m1, m2))
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Default sampling grid for sensitivity checks: 512 log-spaced points on
/// `[1e-3, 1e3]`.
pub fn default_w_grid() -> Vec<f64> {
    let n = 512;
    let (lo, hi) = (1e-3_f64, 1e3_f64);
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Verdict for the constant-sensitivity sufficient conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantChiVerdict {
    /// Dimension two: no further inequalities required.
    CaseI,
    /// Convex domain with all four strength inequalities satisfied.
    CaseII,
    Neither,
}

/// One inequality from the convex-domain case, with its slack `lhs − rhs`.
#[derive(Debug, Clone)]
pub struct InequalitySlack {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalitySlack {
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }
    pub fn holds(&self) -> bool {
        self.lhs > self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct ConstantChiReport {
    pub verdict: ConstantChiVerdict,
    pub inequalities: Vec<InequalitySlack>,
}

/// Hypothesis checker for constant sensitivities `χ1, χ2 > 0` on a domain of
/// dimension `n`.
///
/// Case I applies exactly when `n = 2`. Case II needs a convex domain and
/// the four kinetic-strength inequalities below; the report carries each
/// inequality's slack regardless of the verdict.
pub fn check_constant_chi(
    p: &ModelParams,
    chi1: f64,
    chi2: f64,
    n: u32,
    convex: bool,
) -> Result<ConstantChiReport> {
    if !(chi1 > 0.0 && chi2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "constant sensitivities must be positive, got ({chi1}, {chi2})"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let nf = n as f64;
    let inequalities = vec![
        InequalitySlack {
            label: "mu1 > n*chi1/4",
            lhs: p.mu1,
            rhs: nf * chi1 / 4.0,
        },
        InequalitySlack {
            label: "mu2 > n*chi2/4",
            lhs: p.mu2,
            rhs: nf * chi2 / 4.0,
        },
        InequalitySlack {
            label: "mu1 + a1*mu1/2 + a2*mu2*chi1/(2*chi2) > n*chi1/2",
            lhs: p.mu1 + p.a1 * p.mu1 / 2.0 + p.a2 * p.mu2 * chi1 / (2.0 * chi2),
            rhs: nf * chi1 / 2.0,
        },
        InequalitySlack {
            label: "mu2 + a2*mu2/2 + a1*mu1*chi2/chi1 > n*chi2/2",
            lhs: p.mu2 + p.a2 * p.mu2 / 2.0 + p.a1 * p.mu1 * chi2 / chi1,
            rhs: nf * chi2 / 2.0,
        },
    ];
    let verdict = if n == 2 {
        ConstantChiVerdict::CaseI
    } else if convex && inequalities.iter().all(InequalitySlack::holds) {
        ConstantChiVerdict::CaseII
    } else {
        ConstantChiVerdict::Neither
    };
    Ok(ConstantChiReport {
        verdict,
        inequalities,
    })
}

/// Which of the two pointwise conditions failed first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiDecayViolation {
    /// `2 di d3 χi'(w) + κi χi(w)² > 0` at the sample.
    Differential { value: f64 },
    /// `w χi(w) > C_χ` at the sample.
    Bound { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChiDecayVerdict {
    SatisfiedOnGrid,
    /// First violating sample: sensitivity index (1 or 2), location, and the
    /// failed condition.
    Violated {
        index: usize,
        w: f64,
        violation: ChiDecayViolation,
    },
}

/// Hypothesis checker for signal-dependent decaying sensitivities.
///
/// At every grid sample `w` and for `i = 1, 2` this checks
///
/// ```text
/// 2 di d3 χi'(w) + ((d3−di) p + sqrt((d3−di)² p² + 4 di d3 p)) χi(w)² ≤ 0
/// w χi(w) ≤ C_χ
/// ```
///
/// The verdict is explicitly on-grid: pointwise verification over all
/// `w ≥ 0` is not possible numerically. `eta` and `p_exp` are the smoothness
/// and integrability exponents of the hypothesis, constrained to
/// `eta ∈ (0, 1)` and `p_exp > n`.
pub fn check_chi_decay(
    spec: &SensitivitySpec,
    p: &ModelParams,
    n: u32,
    eta: f64,
    p_exp: f64,
    c_chi: f64,
    grid: &[f64],
) -> Result<ChiDecayVerdict> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sample grid".into()));
    }
    if !grid.windows(2).all(|w| w[0] <= w[1]) || grid[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "sample grid must be sorted and nonnegative".into(),
        ));
    }
    if !(p_exp > n as f64) {
        return Err(Error::InvalidParameter(format!(
            "integrability exponent p = {p_exp} must exceed the dimension n = {n}"
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothness exponent eta must lie in (0, 1), got {eta}"
        )));
    }
    if !(c_chi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "C_chi must be positive, got {c_chi}"
        )));
    }
    // Only chi1 and chi2 exist; the conditions are checked for i = 1, 2.
    let ds = [p.d1, p.d2];
    for &w in grid {
        let chis = spec.eval(w)?;
        let dchis = spec.derivative(w)?;
        for (i, &di) in ds.iter().enumerate() {
            let chi = if i == 0 { chis.0 } else { chis.1 };
            let dchi = if i == 0 { dchis.0 } else { dchis.1 };
            let gap = (p.d3 - di) * p_exp;
            let kappa = gap + (gap * gap + 4.0 * di * p.d3 * p_exp).sqrt();
            let lhs = 2.0 * di * p.d3 * dchi + kappa * chi * chi;
            if lhs > 0.0 {
                return Ok(ChiDecayVerdict::Violated {
                    index: i + 1,
                    w,
                    violation: ChiDecayViolation::Differential { value: lhs },
                });
            }
            let wchi = w * chi;
            if wchi > c_chi {
                return Ok(ChiDecayVerdict::Violated {
                    index: i + 1,
                    w,
                    violation: ChiDecayViolation::Bound { value: wchi },
                });
            }
        }
    }
    Ok(ChiDecayVerdict::SatisfiedOnGrid)
}
