//! CSV writers and readers with pinned headers and reproducible formatting.
//!
//! Every float is printed with 17 significant digits so that repeated runs
//! with identical configs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use chemstab_core::lyapunov::EnergyRecord;
use chemstab_core::solver::{Diagnostics, FieldTriple, Grid};
use chemstab_core::{Error, Result};

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub const DIAGNOSTICS_HEADER: &str =
    "time,du_inf,dv_inf,dw_inf,min_u,min_v,min_w,mass_u,mass_v,mass_w,gradw2";
pub const ATLAS_HEADER: &str = "s,t,in_bw,in_miz,in_new,in_closed_form,margin";
pub const ENERGY_HEADER: &str = "time,A,B,C,E,dist_u2,dist_v2,dist_w2,grad_w2,E_rate";
pub const RATE_HEADER: &str = "field,ell,C,r2,t_start,t_end";

pub fn write_diagnostics(path: &Path, rows: &[Diagnostics]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 192 + 128);
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for d in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(d.time),
            fmt(d.du_inf),
            fmt(d.dv_inf),
            fmt(d.dw_inf),
            fmt(d.min_u),
            fmt(d.min_v),
            fmt(d.min_w),
            fmt(d.mass_u),
            fmt(d.mass_v),
            fmt(d.mass_w),
            fmt(d.gradw2),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Diagnostics columns needed by downstream commands.
#[derive(Debug, Clone, Copy)]
pub struct DiagRow {
    pub time: f64,
    pub du_inf: f64,
    pub dv_inf: f64,
    pub dw_inf: f64,
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagRow>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DIAGNOSTICS_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "{} is not a diagnostics file (header {other:?})",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Config(format!(
                "{} row {}: expected 11 columns",
                path.display(),
                i + 2
            )));
        }
        let get = |k: usize| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{} row {}: bad number", path.display(), i + 2)))
        };
        rows.push(DiagRow {
            time: get(0)?,
            du_inf: get(1)?,
            dv_inf: get(2)?,
            dw_inf: get(3)?,
        });
    }
    Ok(rows)
}

pub fn write_energy(path: &Path, records: &[EnergyRecord]) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 180 + 80);
    out.push_str(ENERGY_HEADER);
    out.push('\n');
    for r in records {
        let rate = r.e_rate.map(fmt).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{rate}\n",
            fmt(r.time),
            fmt(r.a),
            fmt(r.b),
            fmt(r.c),
            fmt(r.e),
            fmt(r.dist_u2),
            fmt(r.dist_v2),
            fmt(r.dist_w2),
            fmt(r.grad_w2),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// One field on one snapshot: `x,value` rows (1D) or `x,y,value` rows (2D).
pub fn write_snapshot_field(path: &Path, grid: &Grid, field: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(field.len() * 48 + 16);
    if grid.dimension() == 1 {
        out.push_str("x,value\n");
        for (i, &v) in field.iter().enumerate() {
            out.push_str(&format!("{},{}\n", fmt(grid.cell_x(i)), fmt(v)));
        }
    } else {
        out.push_str("x,y,value\n");
        for (k, &v) in field.iter().enumerate() {
            let (i, j) = (k % grid.nx(), k / grid.nx());
            out.push_str(&format!(
                "{},{},{}\n",
                fmt(grid.cell_x(i)),
                fmt(grid.cell_y(j)),
                fmt(v)
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_snapshot_field(path: &Path, grid: &Grid) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let value_col = match (grid.dimension(), header) {
        (1, "x,value") => 1,
        (2, "x,y,value") => 2,
        _ => {
            return Err(Error::Config(format!(
                "{}: unexpected snapshot header {header:?}",
                path.display()
            )))
        }
    };
    let mut values = Vec::with_capacity(grid.ncells());
    for (i, line) in lines.enumerate() {
        let v = line.split(',').nth(value_col).ok_or_else(|| {
            Error::Config(format!("{} row {}: too few columns", path.display(), i + 2))
        })?;
        values.push(
            v.parse::<f64>().map_err(|_| {
                Error::Config(format!("{} row {}: bad number", path.display(), i + 2))
            })?,
        );
    }
    if values.len() != grid.ncells() {
        return Err(Error::Config(format!(
            "{} has {} cells, grid expects {}",
            path.display(),
            values.len(),
            grid.ncells()
        )));
    }
    Ok(values)
}

pub fn snapshot_dir(out: &Path) -> std::path::PathBuf {
    out.join("snapshots")
}

pub fn snapshot_path(out: &Path, field: &str, index: usize) -> std::path::PathBuf {
    snapshot_dir(out).join(format!("{field}_{index:06}.csv"))
}

pub fn write_snapshots(out: &Path, grid: &Grid, index: usize, fields: &FieldTriple) -> Result<()> {
    write_snapshot_field(&snapshot_path(out, "u", index), grid, &fields.u)?;
    write_snapshot_field(&snapshot_path(out, "v", index), grid, &fields.v)?;
    write_snapshot_field(&snapshot_path(out, "w", index), grid, &fields.w)?;
    Ok(())
}

pub fn read_snapshots(out: &Path, grid: &Grid, index: usize) -> Result<FieldTriple> {
    Ok(FieldTriple {
        u: read_snapshot_field(&snapshot_path(out, "u", index), grid)?,
        v: read_snapshot_field(&snapshot_path(out, "v", index), grid)?,
        w: read_snapshot_field(&snapshot_path(out, "w", index), grid)?,
    })
}

/// Append one line to a growing report both on stdout and a buffer.
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self { lines: Vec::new() }
    }
    pub fn line(&mut self, s: impl Into<String>) {
        let s = s.into();
        println!("{s}");
        self.lines.push(s);
    }
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}
