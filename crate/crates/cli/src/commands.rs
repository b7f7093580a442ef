//! Command implementations: check, atlas, simulate, energy, rate,
//! compare-regions.

use std::path::Path;

use chemstab_core::config::{parse_config, Config};
use chemstab_core::lyapunov::{dissipation_constants, energy_series, verify_decay};
use chemstab_core::model::{
    check_chi_decay, check_constant_chi, default_w_grid, steady_state, ChiDecayVerdict,
    ChiDecayViolation, ConstantChiVerdict, SensitivitySpec,
};
use chemstab_core::rate::{certify, Certification};
use chemstab_core::region::{
    closed_form_membership, point_from_params, select_q_delta, strict_inclusion_witness,
    RegionGeometry, RegionParams, RegionPoint,
};
use chemstab_core::solver::run;
use chemstab_core::{Error, Result};

use crate::manifest;
use crate::output::{self, fmt, Report};

fn load(config_path: &Path) -> Result<(Config, Vec<u8>)> {
    let bytes = std::fs::read(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Config(format!("{} is not UTF-8: {e}", config_path.display())))?;
    let cfg = parse_config(text)?;
    Ok((cfg, bytes))
}

fn default_c_chi(chi: &SensitivitySpec, grid: &[f64]) -> f64 {
    let sup = grid
        .iter()
        .map(|&w| {
            let (c1, c2) = chi.eval_floored(w, 1e-12);
            (w * c1).max(w * c2)
        })
        .fold(0.0_f64, f64::max);
    sup.max(1.0)
}

/// Region membership, witness selection, and hypothesis checks for one
/// config. Exit 0 when the union condition holds, 1 otherwise.
pub fn cmd_check(config_path: &Path, out: Option<&Path>) -> Result<u8> {
    let (cfg, bytes) = load(config_path)?;
    let man = out
        .map(|o| manifest::start(o, "check", config_path, &bytes))
        .transpose()?;
    let mut report = Report::new();
    let p = cfg.model;

    let ss = steady_state(&p)?;
    report.line(format!(
        "steady_state: u_star={} v_star={} w_star={}",
        fmt(ss.u_star),
        fmt(ss.v_star),
        fmt(ss.w_star)
    ));
    let pt = point_from_params(&p)?;
    report.line(format!("point: s={} t={}", fmt(pt.s), fmt(pt.t)));

    let geo = RegionGeometry::new(RegionParams::from_model(&p)?);
    let bw = geo.in_bw(pt);
    let miz = geo.in_miz(pt);
    let new = geo.in_new(pt);
    report.line(format!("in_bw={} margin={}", bw.inside, fmt(bw.margin)));
    report.line(format!("in_miz={} margin={}", miz.inside, fmt(miz.margin)));
    report.line(format!(
        "in_new={} margin={} q={}",
        new.inside,
        fmt(new.margin),
        fmt(new.q)
    ));
    report.line(format!(
        "in_closed_form={}",
        closed_form_membership(&geo.params, pt)
    ));

    let mut exit = 0u8;
    match select_q_delta(&p) {
        Ok(wit) => {
            report.line(format!(
                "witness: q={} delta={} margin={}",
                fmt(wit.q),
                fmt(wit.delta),
                fmt(wit.margin)
            ));
            let dc = dissipation_constants(&p, &wit)?;
            report.line(format!(
                "dissipation: eps1={} eps2={} eps={}",
                fmt(dc.eps1),
                fmt(dc.eps2),
                fmt(dc.eps)
            ));
        }
        Err(Error::OutOfRegion { margin }) => {
            report.line(format!("witness: none (margin={})", fmt(margin)));
            exit = 1;
        }
        Err(e) => return Err(e),
    }

    let n = cfg.checks.n;
    match &cfg.chi {
        SensitivitySpec::Constant { chi1, chi2 } if *chi1 > 0.0 && *chi2 > 0.0 => {
            let rep = check_constant_chi(&p, *chi1, *chi2, n, cfg.checks.convex)?;
            let verdict = match rep.verdict {
                ConstantChiVerdict::CaseI => "case-i",
                ConstantChiVerdict::CaseII => "case-ii",
                ConstantChiVerdict::Neither => "neither",
            };
            report.line(format!(
                "constant_chi_check: n={n} convex={} verdict={verdict}",
                cfg.checks.convex
            ));
            for ineq in &rep.inequalities {
                report.line(format!("  {}: slack={}", ineq.label, fmt(ineq.slack())));
            }
        }
        SensitivitySpec::Constant { .. } => {
            report.line("constant_chi_check: skipped (requires positive constant sensitivities)");
        }
        _ => report.line("constant_chi_check: not applicable (non-constant sensitivity)"),
    }

    let wgrid = default_w_grid();
    let p_exp = cfg.checks.p_exp.unwrap_or((n + 1) as f64);
    let c_chi = cfg
        .checks
        .c_chi
        .unwrap_or_else(|| default_c_chi(&cfg.chi, &wgrid));
    match check_chi_decay(&cfg.chi, &p, n, cfg.checks.eta, p_exp, c_chi, &wgrid) {
        Ok(ChiDecayVerdict::SatisfiedOnGrid) => report.line(format!(
            "chi_decay_check: satisfied-on-grid (n={n} p={} C_chi={})",
            fmt(p_exp),
            fmt(c_chi)
        )),
        Ok(ChiDecayVerdict::Violated {
            index,
            w,
            violation,
        }) => {
            let kind = match violation {
                ChiDecayViolation::Differential { value } => {
                    format!("differential lhs={}", fmt(value))
                }
                ChiDecayViolation::Bound { value } => format!("bound w*chi={}", fmt(value)),
            };
            report.line(format!(
                "chi_decay_check: violated at w={} (chi{index}, {kind})",
                fmt(w)
            ));
        }
        Err(e) => report.line(format!("chi_decay_check: error ({e})")),
    }

    if let Some(o) = out {
        report.save(&o.join("check_report.txt"))?;
    }
    if let Some(m) = man {
        m.finish()?;
    }
    Ok(exit)
}

/// Membership atlas over a rectangle of the `(s, t)` plane, row-major in
/// `s` then `t`, written to `atlas.csv`.
pub fn cmd_atlas(
    config_path: &Path,
    out: &Path,
    rect: (f64, f64, f64, f64),
    res: usize,
) -> Result<u8> {
    let (cfg, bytes) = load(config_path)?;
    let man = manifest::start(out, "atlas", config_path, &bytes)?;
    let (s0, s1, t0, t1) = rect;
    if s0 < 0.0 || t0 < 0.0 {
        return Err(Error::Config(format!(
            "rectangle must lie in the nonnegative quadrant, got ({s0},{s1},{t0},{t1})"
        )));
    }
    let geo = RegionGeometry::new(RegionParams::from_model(&cfg.model)?);
    let mut csv = String::new();
    csv.push_str(output::ATLAS_HEADER);
    csv.push('\n');
    if res > 0 && s1 >= s0 && t1 >= t0 {
        let coord = |lo: f64, hi: f64, i: usize| {
            if res == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (res - 1) as f64
            }
        };
        for i in 0..res {
            let s = coord(s0, s1, i);
            for j in 0..res {
                let t = coord(t0, t1, j);
                let pt = RegionPoint::new(s, t)?;
                let bw = geo.in_bw(pt);
                let miz = geo.in_miz(pt);
                let new = geo.in_new(pt);
                let cf = closed_form_membership(&geo.params, pt);
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt(s),
                    fmt(t),
                    bw.inside as u8,
                    miz.inside as u8,
                    new.inside as u8,
                    cf as u8,
                    fmt(new.margin)
                ));
            }
        }
    }
    std::fs::write(out.join("atlas.csv"), csv)?;
    println!(
        "atlas: {} points -> {}",
        if res > 0 && s1 >= s0 && t1 >= t0 {
            res * res
        } else {
            0
        },
        out.join("atlas.csv").display()
    );
    man.finish()?;
    Ok(0)
}

/// Run the solver; write `diagnostics.csv` and per-field snapshot files.
pub fn cmd_simulate(config_path: &Path, out: &Path) -> Result<u8> {
    let (cfg, bytes) = load(config_path)?;
    let man = manifest::start(out, "simulate", config_path, &bytes)?;
    let traj = run(&cfg.model, &cfg.chi, &cfg.grid, &cfg.solver, &cfg.init)?;
    output::write_diagnostics(&out.join("diagnostics.csv"), &traj.diagnostics)?;
    std::fs::create_dir_all(output::snapshot_dir(out))?;
    for (idx, fields) in traj.fields.iter().enumerate() {
        output::write_snapshots(out, &traj.grid, idx, fields)?;
    }
    let last = traj
        .diagnostics
        .last()
        .expect("at least the initial snapshot");
    println!(
        "simulate: {} steps, {} snapshots, final distances ({}, {}, {})",
        traj.steps,
        traj.times.len(),
        fmt(last.du_inf),
        fmt(last.dv_inf),
        fmt(last.dw_inf)
    );
    man.finish()?;
    Ok(0)
}

/// Energy records over a prior simulation in `out`, plus the decay check.
pub fn cmd_energy(config_path: &Path, out: &Path, slack: f64) -> Result<u8> {
    let (cfg, bytes) = load(config_path)?;
    let diag_path = out.join("diagnostics.csv");
    if !diag_path.exists() {
        return Err(Error::Config(format!(
            "{} has no diagnostics.csv; run simulate first",
            out.display()
        )));
    }
    let man = manifest::start(out, "energy", config_path, &bytes)?;
    let rows = output::read_diagnostics(&diag_path)?;
    let mut times = Vec::with_capacity(rows.len());
    let mut snapshots = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        times.push(row.time);
        snapshots.push(output::read_snapshots(out, &cfg.grid, idx)?);
    }
    let p = cfg.model;
    let ss = steady_state(&p)?;
    let wit = select_q_delta(&p)?;
    let dc = dissipation_constants(&p, &wit)?;
    let records = energy_series(&cfg.grid, &times, &snapshots, &ss, &wit, &p)?;
    output::write_energy(&out.join("energy.csv"), &records)?;
    let rep = verify_decay(&records, &dc, slack)?;
    println!(
        "energy: witness q={} delta={}; eps1={} eps2={} eps={}",
        fmt(wit.q),
        fmt(wit.delta),
        fmt(dc.eps1),
        fmt(dc.eps2),
        fmt(dc.eps)
    );
    println!(
        "decay: fraction_satisfied={} worst_violation={} checked={} slack={}",
        fmt(rep.fraction_satisfied),
        fmt(rep.worst_violation),
        rep.checked,
        fmt(slack)
    );
    man.finish()?;
    Ok(0)
}

/// Fit decay rates to the sup-norm distance series of a prior simulation.
pub fn cmd_rate(
    config_path: &Path,
    out: &Path,
    window_frac: (f64, f64),
    threshold_ell: f64,
) -> Result<u8> {
    let (_cfg, bytes) = load(config_path)?;
    let diag_path = out.join("diagnostics.csv");
    if !diag_path.exists() {
        return Err(Error::Config(format!(
            "{} has no diagnostics.csv; run simulate first",
            out.display()
        )));
    }
    let man = manifest::start(out, "rate", config_path, &bytes)?;
    let rows = output::read_diagnostics(&diag_path)?;
    let mut csv = String::new();
    csv.push_str(output::RATE_HEADER);
    csv.push('\n');
    type Pick = fn(&output::DiagRow) -> f64;
    let series_of =
        |pick: Pick| -> Vec<(f64, f64)> { rows.iter().map(|r| (r.time, pick(r))).collect() };
    let fields: [(&str, Pick); 3] = [
        ("u", |r| r.du_inf),
        ("v", |r| r.dv_inf),
        ("w", |r| r.dw_inf),
    ];
    for (name, pick) in fields {
        let series = series_of(pick);
        let t0 = series.first().map(|s| s.0).unwrap_or(0.0);
        let t1 = series.last().map(|s| s.0).unwrap_or(0.0);
        let window = (
            t0 + window_frac.0 * (t1 - t0),
            t0 + window_frac.1 * (t1 - t0),
        );
        match certify(&series, threshold_ell, window_frac)? {
            Certification::AlreadyConverged => {
                println!("rate[{name}]: vacuous: already converged");
                csv.push_str(&format!(
                    "{name},{},{},{},{},{}\n",
                    fmt(0.0),
                    fmt(0.0),
                    fmt(0.0),
                    fmt(window.0),
                    fmt(window.1)
                ));
            }
            cert => {
                let est = cert.estimate().expect("estimate present");
                println!(
                    "rate[{name}]: ell={} C={} r2={} certified={}{}",
                    fmt(est.ell),
                    fmt(est.c),
                    fmt(est.r2),
                    cert.is_certified(),
                    if est.no_decay { " (no decay)" } else { "" }
                );
                csv.push_str(&format!(
                    "{name},{},{},{},{},{}\n",
                    fmt(est.ell),
                    fmt(est.c),
                    fmt(est.r2),
                    fmt(est.window.0),
                    fmt(est.window.1)
                ));
            }
        }
    }
    std::fs::write(out.join("rate.csv"), csv)?;
    man.finish()?;
    Ok(0)
}

/// Print the geometry comparison and a strict-inclusion witness.
pub fn cmd_compare_regions(config_path: &Path, out: Option<&Path>) -> Result<u8> {
    let (cfg, bytes) = load(config_path)?;
    let man = out
        .map(|o| manifest::start(o, "compare-regions", config_path, &bytes))
        .transpose()?;
    let mut report = Report::new();
    let rp = RegionParams::from_model(&cfg.model)?;
    let geo = RegionGeometry::new(rp);
    report.line(format!(
        "geometry: f(1)={} q0={} box_bound={}",
        fmt(geo.f_at_one),
        fmt(geo.q0),
        fmt(geo.box_bound)
    ));
    let wit = strict_inclusion_witness(&rp);
    let bw = geo.in_bw(wit);
    let new = geo.in_new(wit);
    report.line(format!("witness_point: s={} t={}", fmt(wit.s), fmt(wit.t)));
    report.line(format!(
        "witness_margins: bw={} new={} q={}",
        fmt(bw.margin),
        fmt(new.margin),
        fmt(new.q)
    ));
    report.line(format!(
        "strict_inclusion: {}",
        if new.inside && !bw.inside {
            "demonstrated"
        } else {
            "FAILED"
        }
    ));
    if let Some(o) = out {
        report.save(&o.join("compare_regions.txt"))?;
    }
    if let Some(m) = man {
        m.finish()?;
    }
    if new.inside && !bw.inside {
        Ok(0)
    } else {
        Ok(1)
    }
}
