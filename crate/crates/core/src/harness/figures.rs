//! Tabulated curves for external plotting.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::csvout::{write_table, Cell};
use crate::math::{delta_beta, limit_phi, limit_psi, psi, Slope, Surrogate};

pub const CURVE_COLUMNS: [&str; 11] = [
    "beta",
    "x",
    "psi",
    "surrogate",
    "f_psi",
    "g_f_psi",
    "h_g_f_psi",
    "limit_psi",
    "limit_phi",
    "psi_over_x",
    "surrogate_over_x",
];

pub const DELTA_COLUMNS: [&str; 3] = ["beta", "delta", "ratio_at_delta"];

/// Slopes used when none are given.
pub const DEFAULT_BETAS: [f64; 8] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// The clipping chain applied to `ψ_β`: `f = max(·, ψ_β(1))`, then
/// `g = min(·, ψ_β(δ_β))`, then the affine `h` sending `ψ_β(1) ↦ 0` and
/// `ψ_β(δ_β) ↦ 1`.
#[derive(Debug, Clone, Copy)]
pub struct ClipChain {
    lo: f64,
    hi: f64,
}

impl ClipChain {
    pub fn new(s: &Surrogate) -> Self {
        Self {
            lo: psi(s.beta, 1.0),
            hi: s.breakpoint.value_at_delta(),
        }
    }

    pub fn f(&self, y: f64) -> f64 {
        y.max(self.lo)
    }

    pub fn g(&self, y: f64) -> f64 {
        y.min(self.hi)
    }

    pub fn h(&self, y: f64) -> f64 {
        (y - self.lo) / (self.hi - self.lo)
    }
}

pub struct CurvePoint {
    pub beta: f64,
    pub x: f64,
    pub psi: f64,
    pub surrogate: f64,
    pub f_psi: f64,
    pub g_f_psi: f64,
    pub h_g_f_psi: f64,
}

/// Sample all curves for one `β` on `resolution` evenly spaced points of `[0, 2]`.
pub fn curve(beta: Slope, resolution: usize) -> Result<Vec<CurvePoint>> {
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    let s = Surrogate::new(beta)?;
    let chain = ClipChain::new(&s);
    Ok((0..resolution)
        .map(|k| {
            let x = 2.0 * k as f64 / (resolution - 1) as f64;
            let p = psi(beta, x);
            let gf = chain.g(chain.f(p));
            CurvePoint {
                beta: beta.get(),
                x,
                psi: p,
                surrogate: s.eval(x),
                f_psi: chain.f(p),
                g_f_psi: gf,
                h_g_f_psi: chain.h(gf),
            }
        })
        .collect())
}

/// Write `psi_curves.csv` and `delta_beta.csv` into `dir`.
pub fn emit_figure_data(betas: &[f64], resolution: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let slopes = betas.iter().map(|&b| Slope::new(b)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut deltas = Vec::new();
    for &b in &slopes {
        for p in curve(b, resolution)? {
            let ratio = |v: f64| {
                if p.x > 0.0 {
                    Cell::Real(v / p.x)
                } else {
                    Cell::Empty
                }
            };
            rows.push(vec![
                p.beta.into(),
                p.x.into(),
                p.psi.into(),
                p.surrogate.into(),
                p.f_psi.into(),
                p.g_f_psi.into(),
                p.h_g_f_psi.into(),
                limit_psi(p.x).into(),
                limit_phi(p.x).into(),
                ratio(p.psi),
                ratio(p.surrogate),
            ]);
        }
        let bp = delta_beta(b, 1e-10)?;
        deltas.push(vec![b.get().into(), bp.delta.into(), bp.ratio_at_delta.into()]);
    }
    fs::create_dir_all(dir)?;
    let curves = dir.join("psi_curves.csv");
    write_table(BufWriter::new(File::create(&curves)?), &CURVE_COLUMNS, rows)?;
    let table = dir.join("delta_beta.csv");
    write_table(BufWriter::new(File::create(&table)?), &DELTA_COLUMNS, deltas)?;
    Ok(vec![curves, table])
}
