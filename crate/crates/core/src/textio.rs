//! Plain-text point files shared by epsilon-nets, finite priors and posterior
//! snapshots.
//!
//! ```text
//! d epsilon n
//! x_1 ... x_d [w]
//! ...            (n lines)
//! ```
//!
//! Reals are written with 17 significant digits so a file round-trips every
//! `f64` exactly. Files written for priors carry a trailing weight column and
//! `0` in the epsilon slot. Blank lines and lines starting with `#` are skipped
//! when reading.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Format a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFile {
    pub dim: usize,
    pub epsilon: f64,
    pub points: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

pub fn write_points<W: Write>(
    mut out: W,
    dim: usize,
    epsilon: f64,
    points: &[&[f64]],
    weights: Option<&[f64]>,
) -> Result<()> {
    writeln!(out, "{} {} {}", dim, fmt_real(epsilon), points.len())?;
    for (i, p) in points.iter().enumerate() {
        let mut line = p.iter().map(|&c| fmt_real(c)).collect::<Vec<_>>().join(" ");
        if let Some(w) = weights {
            line.push(' ');
            line.push_str(&fmt_real(w[i]));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_points_file(
    path: &Path,
    dim: usize,
    epsilon: f64,
    points: &[&[f64]],
    weights: Option<&[f64]>,
) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    write_points(f, dim, epsilon, points, weights)
}

pub fn read_points<R: BufRead>(reader: R, origin: &Path) -> Result<PointFile> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let t = s.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        });

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(perr(hline, format!("header needs `d epsilon n`, got {header:?}")));
    }
    let dim: usize = fields[0]
        .parse()
        .map_err(|e| perr(hline, format!("bad d: {e}")))?;
    let epsilon: f64 = fields[1]
        .parse()
        .map_err(|e| perr(hline, format!("bad epsilon: {e}")))?;
    let n: usize = fields[2]
        .parse()
        .map_err(|e| perr(hline, format!("bad n: {e}")))?;
    if dim == 0 {
        return Err(perr(hline, "d must be positive".into()));
    }

    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut weighted: Option<bool> = None;
    for (lno, line) in lines {
        let line = line?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| perr(lno, format!("bad number {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        let has_weight = match vals.len() {
            l if l == dim => false,
            l if l == dim + 1 => true,
            l => {
                return Err(perr(
                    lno,
                    format!("expected {dim} or {} values, got {l}", dim + 1),
                ))
            }
        };
        match weighted {
            None => weighted = Some(has_weight),
            Some(w) if w != has_weight => {
                return Err(perr(lno, "weight column present on some lines only".into()))
            }
            _ => {}
        }
        let mut vals = vals;
        if has_weight {
            weights.push(vals.pop().unwrap());
        }
        points.push(vals);
    }
    if points.len() != n {
        return Err(perr(
            0,
            format!("header announces {n} points, found {}", points.len()),
        ));
    }
    Ok(PointFile {
        dim,
        epsilon,
        points,
        weights: weighted.unwrap_or(false).then_some(weights),
    })
}

pub fn read_points_file(path: &Path) -> Result<PointFile> {
    read_points(BufReader::new(File::open(path)?), path)
}
