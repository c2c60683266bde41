//! File formats: sample CSVs, sweep tables, and atomic writes.

use crate::error::{Error, Result};
use crate::spdc::SweepRow;
use crate::triple_gaussian::{Basis, SampleSet};
use std::fmt::Write as _;
use std::path::Path;

pub const SWEEP_HEADER: &str = "sigma_p_m,witness_gebits,exact_gebits";

pub fn sample_header(basis: Basis) -> &'static str {
    match basis {
        Basis::Position => "x1,x2,x3",
        Basis::Momentum => "k1,k2,k3",
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Parses a three-column sample CSV. The header selects the basis.
pub fn parse_samples_csv(text: &str) -> Result<SampleSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Validation("sample CSV is empty".into()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    let basis = match columns.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x1", "x2", "x3"] => Basis::Position,
        ["k1", "k2", "k3"] => Basis::Momentum,
        _ => {
            return Err(Error::Validation(format!(
                "sample CSV header must be `x1,x2,x3` or `k1,k2,k3`, got `{header}`"
            )))
        }
    };
    let mut points = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Validation(format!(
                "line {}: expected 3 fields, got {}",
                i + 1,
                fields.len()
            )));
        }
        let mut p = [0.0; 3];
        for (slot, f) in p.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Validation(format!("line {}: bad number `{f}`", i + 1)))?;
        }
        points.push(p);
    }
    Ok(SampleSet::new(basis, points))
}

pub fn read_samples_csv(path: impl AsRef<Path>) -> Result<SampleSet> {
    parse_samples_csv(&read_text(path)?)
}

pub fn samples_to_csv(samples: &SampleSet) -> String {
    let mut out = String::with_capacity(samples.len() * 72);
    out.push_str(sample_header(samples.basis));
    out.push('\n');
    for p in &samples.points {
        let _ = writeln!(out, "{:e},{:e},{:e}", p[0], p[1], p[2]);
    }
    out
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            r.sigma_p, r.witness_gebits, r.exact_gebits
        );
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SWEEP_HEADER) {
        return Err(Error::Validation(format!("sweep CSV must start with `{SWEEP_HEADER}`")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Validation(format!("bad sweep row `{l}`: {e}")))?;
            match v.as_slice() {
                [s, w, e] => Ok(SweepRow {
                    sigma_p: *s,
                    witness_gebits: *w,
                    exact_gebits: *e,
                }),
                _ => Err(Error::Validation(format!("bad sweep row `{l}`"))),
            }
        })
        .collect()
}
