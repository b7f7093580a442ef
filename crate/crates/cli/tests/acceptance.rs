//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them). Tolerances and
//! budgets are pinned in the asserts.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use chemstab_core::lyapunov::{dissipation_constants, energy_series, verify_decay};
use chemstab_core::model::{
    check_chi_decay, steady_state, ChiDecayVerdict, ModelParams, SensitivitySpec,
};
use chemstab_core::quadform::{
    max_margin, minors_at, negative_direction, satisfies_hypothesis, QuadForm3,
};
use chemstab_core::rate::{certify, Certification, DEFAULT_WINDOW_FRAC};
use chemstab_core::region::{
    closed_form_membership, intercept_derivatives_at_one, s_intercept, select_q_delta,
    RegionGeometry, RegionParams, RegionPoint,
};
use chemstab_core::solver::{
    run, step, FieldTriple, Grid, InitialData, InitialKind, Scheme, SolverConfig, Trajectory,
};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(criterion: &str, started: Instant, detail: String) {
    println!(
        "[acceptance] {criterion}: PASS ({:.2}s) {detail}",
        started.elapsed().as_secs_f64()
    );
}

fn parameter_sets() -> Vec<(&'static str, RegionParams)> {
    vec![
        (
            "symmetric",
            RegionParams::new(0.5, 0.5, 1.0, 1.0, 1.0).unwrap(),
        ),
        (
            "a1*alpha=beta",
            RegionParams::new(0.5, 0.25, 2.0, 1.0, 1.0).unwrap(),
        ),
        (
            "a2*beta=alpha",
            RegionParams::new(0.25, 0.5, 1.0, 2.0, 1.0).unwrap(),
        ),
        (
            "generic gamma!=1",
            RegionParams::new(0.3, 0.7, 1.5, 0.8, 2.5).unwrap(),
        ),
        (
            "strong competition",
            RegionParams::new(0.9, 0.95, 1.2, 0.7, 0.6).unwrap(),
        ),
        (
            "weak competition",
            RegionParams::new(0.05, 0.1, 3.0, 0.5, 1.3).unwrap(),
        ),
    ]
}

fn model_for_region(rp: &RegionParams) -> ModelParams {
    ModelParams {
        d1: 1.0,
        d2: 1.0,
        d3: 1.0,
        mu1: 1.0,
        mu2: 1.0,
        a1: rp.a1,
        a2: rp.a2,
        alpha: rp.alpha,
        beta: rp.beta,
        gamma: rp.gamma,
        m1: 0.1,
        m2: 0.1,
    }
}

fn config_text(p: &ModelParams) -> String {
    format!(
        "d1={}\nd2={}\nd3={}\nmu1={}\nmu2={}\na1={}\na2={}\nalpha={}\nbeta={}\ngamma={}\n\
         chi_kind=constant\nchi1=0.1\nchi2=0.1\nM1={}\nM2={}\n",
        p.d1, p.d2, p.d3, p.mu1, p.mu2, p.a1, p.a2, p.alpha, p.beta, p.gamma, p.m1, p.m2
    )
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_region_nesting_and_strict_inclusion() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut total_checked = 0usize;

    for (name, rp) in parameter_sets() {
        let geo = RegionGeometry::new(rp);
        let span = 1.3 * geo.in_new(RegionPoint::new(0.0, 0.0).unwrap()).margin;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
        for _ in 0..10_000 {
            let pt = RegionPoint::new(rng.gen_range(0.0..span), rng.gen_range(0.0..span)).unwrap();
            let bw = geo.in_bw(pt);
            let miz = geo.in_miz(pt);
            if bw.inside || miz.inside {
                total_checked += 1;
                let new = geo.in_new(pt);
                assert!(
                    new.inside,
                    "{name}: ({}, {}) in a sub-region but union margin {}",
                    pt.s, pt.t, new.margin
                );
            }
        }

        // The CLI produces a strict-inclusion witness for this set.
        let cfg_path = dir
            .path()
            .join(format!("{}.cfg", name.replace(['*', '=', ' ', '!'], "_")));
        std::fs::write(&cfg_path, config_text(&model_for_region(&rp))).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_chemstab"))
            .args(["compare-regions", "--config"])
            .arg(&cfg_path)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{name}: compare-regions failed");
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(
            stdout.contains("strict_inclusion: demonstrated"),
            "{name}: {stdout}"
        );
    }

    // Pinned value for the symmetric set: at (7.9, 0) the best slope is
    // q = 3 with margin f(3) - 7.9 = 0.1.
    let geo = RegionGeometry::new(parameter_sets()[0].1);
    let um = geo.in_new(RegionPoint::new(7.9, 0.0).unwrap());
    assert!(
        (um.margin - 0.1).abs() <= 1e-9,
        "margin at (7.9, 0) = {}",
        um.margin
    );
    assert!((um.q - 3.0).abs() <= 1e-3, "maximizing q = {}", um.q);

    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < 10.0,
        "criterion 1 took {elapsed:.2}s (budget 10s)"
    );
    pass(
        "criterion 1 (region nesting + strict inclusion)",
        started,
        format!("{total_checked} sub-region points nested across 6 sets"),
    );
}

// ---------------------------------------------------------------- 2

/// Closed-form variant carrying the extra γ on the `2 a2 β²` term of the
/// `t` coefficient, as printed; it breaks the equivalence whenever γ != 1.
fn closed_form_gamma_scaled_variant(rp: &RegionParams, pt: RegionPoint) -> bool {
    let (a1, a2, al, be, ga) = (rp.a1, rp.a2, rp.alpha, rp.beta, rp.gamma);
    let m = a1 * a2;
    let root = (1.0 - m).sqrt();
    let p_coef = a1 * al * (al - a2 * be);
    let r_coef = a2 * be * (be - a1 * al);
    if a2 * be > al && pt.t >= a2 * ga / (al * (a2 * be - al)) {
        return false;
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
            * (2.0 * a2 * be * be * ga - 2.0 * m * al * be + a1 * a1 * a2 * al * al
                - a1 * a2 * a2 * be * be)
            * pt.t
        + 16.0 * ga * ga * (1.0 - m);
    if h1 <= 0.0 {
        return false;
    }
    let h2 = |sign: f64| {
        p_coef * pt.s
            + (al * (4.0 - 2.0 * m + sign * 4.0 * root) * (al - a2 * be) / a2 + r_coef) * pt.t
            + sign * 4.0 * ga * root
    };
    h2(1.0) > 0.0 && h2(-1.0) < 0.0
}

#[test]
fn criterion_2_closed_form_equivalence() {
    let started = Instant::now();
    let mut variant_disagreements_on_gamma_sets = 0usize;
    for (name, rp) in parameter_sets() {
        let geo = RegionGeometry::new(rp);
        let span = 1.3 * geo.in_new(RegionPoint::new(0.0, 0.0).unwrap()).margin;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
        let mut checked = 0usize;
        for _ in 0..12_000 {
            let pt = RegionPoint::new(rng.gen_range(0.0..span), rng.gen_range(0.0..span)).unwrap();
            let um = geo.in_new(pt);
            if um.margin.abs() < 1e-6 {
                continue;
            }
            checked += 1;
            assert_eq!(
                closed_form_membership(&rp, pt),
                um.inside,
                "{name}: closed form disagrees at ({}, {}), margin {}",
                pt.s,
                pt.t,
                um.margin
            );
            if rp.gamma != 1.0 && closed_form_gamma_scaled_variant(&rp, pt) != um.inside {
                variant_disagreements_on_gamma_sets += 1;
            }
        }
        assert!(checked >= 10_000, "{name}: only {checked} usable samples");
    }
    // Typo finding: the as-printed t coefficient (extra γ) systematically
    // disagrees with the union predicate once γ != 1; the dimensionally
    // consistent coefficient above agrees everywhere.
    assert!(
        variant_disagreements_on_gamma_sets > 0,
        "expected the γ-scaled coefficient variant to break equivalence"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < 10.0,
        "criterion 2 took {elapsed:.2}s (budget 10s)"
    );
    pass(
        "criterion 2 (closed-form equivalence)",
        started,
        format!(
            "union form authoritative; γ-scaled variant disagreed on {variant_disagreements_on_gamma_sets} points"
        ),
    );
}

// ---------------------------------------------------------------- 3

fn smallest_eigenvalue(q: &QuadForm3) -> f64 {
    let m = q.symmetric_matrix();
    Matrix3::new(
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
    )
    .symmetric_eigenvalues()
    .iter()
    .cloned()
    .fold(f64::INFINITY, f64::min)
}

#[test]
fn criterion_3_quadratic_form_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);

    for _ in 0..1000 {
        // Random SPD matrix R^T R + 0.01 I.
        let r: [[f64; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let mut a = [[0.0_f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for row in &r {
                    a[i][j] += row[i] * row[j];
                }
            }
            a[i][i] += 0.01;
        }
        let q = QuadForm3::new(
            a[0][0],
            2.0 * a[0][1],
            2.0 * a[0][2],
            a[1][1],
            2.0 * a[1][2],
            a[2][2],
        );
        assert!(satisfies_hypothesis(&q));
        let eps = max_margin(&q, 1e-12).unwrap();
        let lam = smallest_eigenvalue(&q);
        assert!(
            (eps - lam).abs() <= 1e-8 * lam.abs().max(1.0),
            "margin {eps} vs eigenvalue {lam}"
        );
        for _ in 0..10_000 {
            let y = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            let n2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
            assert!(q.evaluate(y) >= eps * n2 - 1e-8 * n2);
        }
    }

    let mut violating = 0usize;
    while violating < 1000 {
        let q = QuadForm3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let (g1, g2, g3) = minors_at(&q, 0.0);
        if g1.min(g2).min(g3) >= -1e-3 {
            continue;
        }
        violating += 1;
        let y = negative_direction(&q).expect("violated minors admit a negative direction");
        assert!(q.evaluate(y) < 0.0);
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < 30.0,
        "criterion 3 took {elapsed:.2}s (budget 30s)"
    );
    pass(
        "criterion 3 (quadratic-form margin suite)",
        started,
        "1000 SPD forms vs eigenvalue oracle, 10^4 vectors each; 1000 indefinite forms refuted"
            .into(),
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_4_intercept_derivative_formulas() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let h = 1e-5;
    for _ in 0..1000 {
        let rp = RegionParams::new(
            rng.gen_range(0.05..0.95),
            rng.gen_range(0.05..0.95),
            rng.gen_range(0.1..4.0),
            rng.gen_range(0.1..4.0),
            rng.gen_range(0.1..4.0),
        )
        .unwrap();
        let (df, dg) = intercept_derivatives_at_one(&rp);
        let f = |q: f64| s_intercept(&rp, q).unwrap();
        let fd_f = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let fd_g = (f(1.0 + h) / (1.0 + h) - f(1.0 - h) / (1.0 - h)) / (2.0 * h);
        // 1e-6 relative, with an absolute allowance at the difference
        // quotient's cancellation floor eps * f(1) / h.
        let noise = 64.0 * f64::EPSILON * (1.0 + f(1.0).abs()) / h;
        assert!(
            (df - fd_f).abs() <= 1e-6 * df.abs().max(fd_f.abs()) + noise,
            "df = {df}, fd = {fd_f} for {rp:?}"
        );
        assert!(
            (dg - fd_g).abs() <= 1e-6 * dg.abs().max(fd_g.abs()) + noise,
            "dg = {dg}, fd = {fd_g} for {rp:?}"
        );
    }

    // Degenerate cases vanish identically (well below the 1e-12 budget).
    for _ in 0..200 {
        let a1 = rng.gen_range(0.05..0.95);
        let alpha = rng.gen_range(0.1..4.0);
        let rp = RegionParams::new(a1, rng.gen_range(0.05..0.95), alpha, a1 * alpha, 1.0).unwrap();
        let (df, _) = intercept_derivatives_at_one(&rp);
        assert!(df.abs() <= 1e-12, "df = {df} in the a1*alpha = beta case");

        let a2 = rng.gen_range(0.05..0.95);
        let beta = rng.gen_range(0.1..4.0);
        let rp = RegionParams::new(rng.gen_range(0.05..0.95), a2, a2 * beta, beta, 1.0).unwrap();
        let (_, dg) = intercept_derivatives_at_one(&rp);
        assert!(dg.abs() <= 1e-12, "dg = {dg} in the a2*beta = alpha case");
    }

    pass(
        "criterion 4 (intercept derivative formulas)",
        started,
        "analytic vs central differences on 1000 sets; degenerate zeros exact".into(),
    );
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_5_discrete_fixed_point_and_positivity() {
    let started = Instant::now();
    let p = ModelParams {
        mu1: 5.0,
        mu2: 5.0,
        ..model_for_region(&parameter_sets()[0].1)
    };
    let spec = SensitivitySpec::constant(0.1, 0.1).unwrap();
    let ss = steady_state(&p).unwrap();

    for scheme in [Scheme::ExplicitEuler, Scheme::Imex] {
        let grid = Grid::one_d(16, 1.0).unwrap();
        let cfg = SolverConfig {
            dt: None,
            t_end: 0.0,
            scheme,
            cfl_safety: 0.2,
            snapshot_every: 1,
        };
        let mut fields = FieldTriple::constant(&grid, ss.u_star, ss.v_star, ss.w_star);
        for _ in 0..10_000 {
            fields = step(&fields, &p, &spec, &grid, &cfg).unwrap();
        }
        for (f, star) in [
            (&fields.u, ss.u_star),
            (&fields.v, ss.v_star),
            (&fields.w, ss.w_star),
        ] {
            let worst = f.iter().fold(0.0_f64, |m, &x| m.max((x - star).abs()));
            assert!(
                worst <= 1e-12,
                "steady drift {worst:.3e} after 10^4 steps under {scheme:?}"
            );
        }
    }

    // Randomized in-region runs stay nonnegative at every step (the solver
    // aborts on any negative value, so completion certifies positivity).
    for (seed, dims) in [(11_u64, 1usize), (12, 1), (13, 2)] {
        let grid = if dims == 1 {
            Grid::one_d(64, 1.0).unwrap()
        } else {
            Grid::two_d(16, 16, 1.0, 1.0).unwrap()
        };
        let cfg = SolverConfig {
            dt: None,
            t_end: 1.0,
            scheme: Scheme::ExplicitEuler,
            cfl_safety: 0.2,
            snapshot_every: 50,
        };
        let init = InitialData {
            kind: InitialKind::Random {
                amplitude: 0.5,
                seed,
            },
            floor: 1e-6,
        };
        let traj = run(&p, &spec, &grid, &cfg, &init).unwrap();
        assert!(traj
            .diagnostics
            .iter()
            .all(|d| d.min_u >= 0.0 && d.min_v >= 0.0 && d.min_w >= 0.0));
    }

    pass(
        "criterion 5 (discrete fixed point + positivity)",
        started,
        "10^4-step steady runs within 1e-12 (both schemes); randomized runs nonnegative".into(),
    );
}

// ---------------------------------------------------------------- 6 & 7

fn desk_params() -> (ModelParams, SensitivitySpec) {
    let p = ModelParams {
        mu1: 5.0,
        mu2: 5.0,
        ..model_for_region(&parameter_sets()[0].1)
    };
    (p, SensitivitySpec::constant(0.1, 0.1).unwrap())
}

fn desk_run_1d() -> &'static Trajectory {
    static RUN: OnceLock<Trajectory> = OnceLock::new();
    RUN.get_or_init(|| {
        let (p, spec) = desk_params();
        let grid = Grid::one_d(128, 1.0).unwrap();
        let cfg = SolverConfig {
            dt: None,
            t_end: 20.0,
            scheme: Scheme::ExplicitEuler,
            cfl_safety: 0.2,
            snapshot_every: 2000,
        };
        let init = InitialData {
            kind: InitialKind::Random {
                amplitude: 0.1,
                seed: 7,
            },
            floor: 1e-6,
        };
        run(&p, &spec, &grid, &cfg, &init).expect("desk-scale 1D run")
    })
}

type DiagPick = fn(&chemstab_core::solver::Diagnostics) -> f64;

fn certify_trajectory(traj: &Trajectory) -> Vec<(String, f64, f64)> {
    let picks: [(&str, DiagPick); 3] = [
        ("u", |d| d.du_inf),
        ("v", |d| d.dv_inf),
        ("w", |d| d.dw_inf),
    ];
    picks
        .iter()
        .map(|(name, pick)| {
            let series: Vec<(f64, f64)> =
                traj.diagnostics.iter().map(|d| (d.time, pick(d))).collect();
            match certify(&series, 0.1, DEFAULT_WINDOW_FRAC).unwrap() {
                Certification::Certified(est) => (name.to_string(), est.ell, est.r2),
                other => panic!("field {name} not certified: {other:?}"),
            }
        })
        .collect()
}

#[test]
fn criterion_6_exponential_convergence_at_desk_scale() {
    let started = Instant::now();

    let traj = desk_run_1d();
    let one_d = Instant::now();
    let fits = certify_trajectory(traj);
    for (name, ell, r2) in &fits {
        assert!(*ell > 0.1 && *r2 > 0.9, "{name}: ell = {ell}, r2 = {r2}");
    }
    let last = traj.diagnostics.last().unwrap();
    assert!(
        last.du_inf < 1e-6 && last.dv_inf < 1e-6 && last.dw_inf < 1e-6,
        "final distances ({:.2e}, {:.2e}, {:.2e})",
        last.du_inf,
        last.dv_inf,
        last.dw_inf
    );
    let elapsed_1d = started.elapsed().as_secs_f64();
    assert!(
        elapsed_1d < 60.0,
        "1D run took {elapsed_1d:.1}s (budget 60s)"
    );

    // 2D variant under the IMEX scheme.
    let (p, spec) = desk_params();
    let grid = Grid::two_d(64, 64, 1.0, 1.0).unwrap();
    let cfg = SolverConfig {
        dt: None,
        t_end: 20.0,
        scheme: Scheme::Imex,
        cfl_safety: 0.2,
        snapshot_every: 10,
    };
    let init = InitialData {
        kind: InitialKind::Random {
            amplitude: 0.1,
            seed: 8,
        },
        floor: 1e-6,
    };
    let t2d = Instant::now();
    let traj2 = run(&p, &spec, &grid, &cfg, &init).unwrap();
    let fits2 = certify_trajectory(&traj2);
    for (name, ell, r2) in &fits2 {
        assert!(*ell > 0.1 && *r2 > 0.9, "2D {name}: ell = {ell}, r2 = {r2}");
    }
    let last2 = traj2.diagnostics.last().unwrap();
    assert!(last2.du_inf < 1e-6 && last2.dv_inf < 1e-6 && last2.dw_inf < 1e-6);
    let elapsed_2d = t2d.elapsed().as_secs_f64();
    assert!(
        elapsed_2d < 300.0,
        "2D run took {elapsed_2d:.1}s (budget 300s)"
    );

    let _ = one_d;
    pass(
        "criterion 6 (exponential convergence, 1D + 2D)",
        started,
        format!(
            "1D rates {:?}; 2D rates {:?}",
            fits.iter()
                .map(|f| (f.0.clone(), (f.1 * 1e3).round() / 1e3))
                .collect::<Vec<_>>(),
            fits2
                .iter()
                .map(|f| (f.0.clone(), (f.1 * 1e3).round() / 1e3))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_7_energy_decay_at_desk_scale() {
    let started = Instant::now();
    let (p, _) = desk_params();
    let traj = desk_run_1d();
    let ss = steady_state(&p).unwrap();
    let wit = select_q_delta(&p).unwrap();
    let dc = dissipation_constants(&p, &wit).unwrap();
    let records = energy_series(&traj.grid, &traj.times, &traj.fields, &ss, &wit, &p).unwrap();

    // Monotone after the first 1% of samples, to 1e-12 absolute.
    let skip = records.len() / 100 + 1;
    let mut increases = 0usize;
    for pair in records[skip..].windows(2) {
        if pair[1].e > pair[0].e + 1e-12 {
            increases += 1;
        }
    }
    assert_eq!(increases, 0, "energy increased beyond 1e-12 after warmup");

    let report = verify_decay(&records, &dc, 0.1).unwrap();
    assert!(
        report.fraction_satisfied >= 0.95,
        "fraction satisfied = {}",
        report.fraction_satisfied
    );

    pass(
        "criterion 7 (energy decay)",
        started,
        format!(
            "eps = {:.4}; fraction satisfied = {:.4} over {} samples",
            dc.eps, report.fraction_satisfied, report.checked
        ),
    );
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_ode_oracle_equivalence() {
    let started = Instant::now();
    let p = model_for_region(&parameter_sets()[0].1);
    let spec = SensitivitySpec::constant(0.1, 0.1).unwrap();
    let grid = Grid::one_d(8, 1.0).unwrap();
    let dt = 1e-4;
    let (u0, v0, w0) = (0.5, 0.9, 0.3);
    let cfg = SolverConfig {
        dt: Some(dt),
        t_end: 20.0,
        scheme: Scheme::ExplicitEuler,
        cfl_safety: 1.0,
        snapshot_every: 500,
    };
    let init = InitialData {
        kind: InitialKind::FromFields(FieldTriple::constant(&grid, u0, v0, w0)),
        floor: 1e-300,
    };
    let traj = run(&p, &spec, &grid, &cfg, &init).unwrap();

    // Independent forward-Euler integration of the space-free kinetics.
    let (mut u, mut v, mut w) = (u0, v0, w0);
    let mut states = vec![(u, v, w)];
    for k in 1..=traj.steps {
        let (pu, pv, pw) = (u, v, w);
        u = pu + dt * (p.mu1 * pu * (1.0 - pu - p.a1 * pv));
        v = pv + dt * (p.mu2 * pv * (1.0 - p.a2 * pu - pv));
        w = pw + dt * (p.alpha * pu + p.beta * pv - p.gamma * pw);
        if k % cfg.snapshot_every == 0 || k == traj.steps {
            states.push((u, v, w));
        }
    }
    assert_eq!(states.len(), traj.fields.len());
    let mut sup = 0.0_f64;
    for (fields, &(ou, ov, ow)) in traj.fields.iter().zip(&states) {
        for f in [&fields.u, &fields.v, &fields.w] {
            let spread = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - f.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(spread, 0.0, "fields must stay spatially constant");
        }
        sup = sup
            .max((fields.u[0] - ou).abs())
            .max((fields.v[0] - ov).abs())
            .max((fields.w[0] - ow).abs());
    }
    assert!(sup <= 1e-6, "sup deviation = {sup:.3e}");

    pass(
        "criterion 8 (ODE-oracle equivalence)",
        started,
        format!("sup deviation {sup:.2e} over t in [0, 20] at dt = 1e-4"),
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_9_decaying_sensitivity_threshold() {
    let started = Instant::now();
    let p = model_for_region(&parameter_sets()[0].1); // d1 = d2 = d3 = 1
    let grid = chemstab_core::model::default_w_grid();
    let k_star = 1.0 / 3.0_f64.sqrt();

    let below = SensitivitySpec::reciprocal(k_star * 0.99, k_star * 0.99).unwrap();
    assert_eq!(
        check_chi_decay(&below, &p, 2, 0.5, 3.0, 1.0, &grid).unwrap(),
        ChiDecayVerdict::SatisfiedOnGrid
    );

    let above = SensitivitySpec::reciprocal(k_star * 1.01, k_star * 1.01).unwrap();
    match check_chi_decay(&above, &p, 2, 0.5, 3.0, 1.0, &grid).unwrap() {
        ChiDecayVerdict::Violated { .. } => {}
        v => panic!("expected violation just above the threshold, got {v:?}"),
    }

    pass(
        "criterion 9 (decaying-sensitivity threshold)",
        started,
        format!("verdict flips at K = 1/sqrt(3) within 1% (K* = {k_star:.6})"),
    );
}
