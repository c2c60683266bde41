//! Derivative-free search for the witness coefficients.
//!
//! Each combination is binned with a width proportional to its own sample
//! standard deviation, so the objective does not depend on the overall scale
//! of `η` or `β`. The search picks the best sign pattern for each vector,
//! then runs coordinate-wise log-magnitude searches (grid scan plus golden
//! section) within a factor of 8 of the initial magnitudes. Every ordering of
//! the three parties is tried and the best result kept, which makes the
//! returned witness invariant under relabeling the parties.

use super::WitnessCoefficients;
use crate::entropy::{differential_entropy_from_histogram, Histogram1D};
use crate::error::{Error, Result};
use crate::triple_gaussian::SampleSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Bin width used by the search, as a fraction of each combination's sample
/// standard deviation.
pub const OPTIMIZER_RELATIVE_BIN: f64 = 1.0 / 16.0;

const MAX_RATIO: f64 = 8.0;
const GRID_POINTS: usize = 9;
const LOG_TOL: f64 = 1e-3;
const MAX_SWEEPS: usize = 3;
const SWEEP_TOL: f64 = 1e-6;

/// Sign patterns modulo a global sign flip.
const SIGNS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedCoefficients {
    pub coefficients: WitnessCoefficients,
    /// Witness at the returned coefficients, with the search's binning.
    pub witness_gebits: f64,
    /// Witness at the initial coefficients, with the same binning.
    pub init_witness_gebits: f64,
    pub relative_bin_width: f64,
    pub warnings: Vec<String>,
}

/// Entropy of `c·p` binned at `OPTIMIZER_RELATIVE_BIN` of its sample sd;
/// `None` if the combination has no spread.
fn side_entropy(samples: &SampleSet, c: &[f64; 3]) -> Option<f64> {
    let values = samples.project(c);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return None;
    }
    let hist = Histogram1D::from_values(&values, sd * OPTIMIZER_RELATIVE_BIN).ok()?;
    differential_entropy_from_histogram(&hist).ok()
}

fn min_term(eta: &[f64; 3], beta: &[f64; 3]) -> f64 {
    let m = (0..3)
        .map(|i| (eta[i] * beta[i]).abs())
        .fold(f64::INFINITY, f64::min);
    (2.0 * PI * m).log2()
}

#[derive(Clone)]
struct Point {
    eta: [f64; 3],
    beta: [f64; 3],
    h_x: Option<f64>,
    h_k: Option<f64>,
}

impl Point {
    fn value(&self) -> f64 {
        match (self.h_x, self.h_k) {
            (Some(hx), Some(hk)) => min_term(&self.eta, &self.beta) - hx - hk,
            _ => f64::NEG_INFINITY,
        }
    }
}

struct Search<'a> {
    xs: &'a SampleSet,
    ks: &'a SampleSet,
    init: WitnessCoefficients,
}

impl Search<'_> {
    /// Coordinate `j`: `η_j` for `j < 3`, `β_{j-3}` otherwise.
    fn with_coord(&self, p: &Point, j: usize, value: f64) -> Point {
        let mut q = p.clone();
        if j < 3 {
            q.eta[j] = value;
            q.h_x = side_entropy(self.xs, &q.eta);
        } else {
            q.beta[j - 3] = value;
            q.h_k = side_entropy(self.ks, &q.beta);
        }
        q
    }

    fn init_coord(&self, j: usize) -> f64 {
        if j < 3 {
            self.init.eta()[j]
        } else {
            self.init.beta()[j - 3]
        }
    }

    fn coord(p: &Point, j: usize) -> f64 {
        if j < 3 {
            p.eta[j]
        } else {
            p.beta[j - 3]
        }
    }

    /// Returns the improved point, or `Err(())` if the coordinate hit a
    /// degenerate combination somewhere in its range.
    fn line_search(&self, p: &Point, j: usize) -> std::result::Result<Point, ()> {
        let sign = Self::coord(p, j).signum();
        let t0 = self.init_coord(j).abs().ln();
        let (lo, hi) = (t0 - MAX_RATIO.ln(), t0 + MAX_RATIO.ln());
        let at = |t: f64| self.with_coord(p, j, sign * t.exp());
        let mut best = p.clone();
        let mut best_v = p.value();
        let consider = |q: Point, best: &mut Point, best_v: &mut f64| -> std::result::Result<f64, ()> {
            let missing = if j < 3 { q.h_x.is_none() } else { q.h_k.is_none() };
            if missing {
                return Err(());
            }
            let v = q.value();
            if v > *best_v {
                *best_v = v;
                *best = q;
            }
            Ok(v)
        };

        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let mut grid = Vec::with_capacity(GRID_POINTS);
        for i in 0..GRID_POINTS {
            let t = lo + step * i as f64;
            grid.push(consider(at(t), &mut best, &mut best_v)?);
        }
        let imax = (0..GRID_POINTS)
            .fold(0, |b, i| if grid[i] > grid[b] { i } else { b });
        let (mut a, mut b) = (
            lo + step * imax.saturating_sub(1) as f64,
            lo + step * (imax + 1).min(GRID_POINTS - 1) as f64,
        );
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = consider(at(c), &mut best, &mut best_v)?;
        let mut fd = consider(at(d), &mut best, &mut best_v)?;
        while b - a > LOG_TOL {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = consider(at(c), &mut best, &mut best_v)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = consider(at(d), &mut best, &mut best_v)?;
            }
        }
        Ok(best)
    }

    fn run(&self, start: &Point, perm: [usize; 3], warnings: &mut Vec<String>) -> Point {
        let order: Vec<usize> = perm.iter().copied().chain(perm.iter().map(|p| p + 3)).collect();
        let mut frozen = [false; 6];
        let mut p = start.clone();
        for _ in 0..MAX_SWEEPS {
            let before = p.value();
            for &j in &order {
                if frozen[j] {
                    continue;
                }
                match self.line_search(&p, j) {
                    Ok(q) => p = q,
                    Err(()) => {
                        frozen[j] = true;
                        let name = if j < 3 { "eta" } else { "beta" };
                        warnings.push(format!(
                            "{name}[{}]: combination has zero variance within the search range; kept at its initial magnitude",
                            j % 3
                        ));
                    }
                }
            }
            if p.value() - before < SWEEP_TOL {
                break;
            }
        }
        p
    }
}

fn best_signs(samples: &SampleSet, magnitudes: [f64; 3], current: [f64; 3], h: Option<f64>) -> ([f64; 3], Option<f64>) {
    let mut best = (current, h);
    for s in SIGNS {
        let c = [s[0] * magnitudes[0], s[1] * magnitudes[1], s[2] * magnitudes[2]];
        if let Some(hc) = side_entropy(samples, &c) {
            if best.1.is_none_or(|hb| hc < hb) {
                best = (c, Some(hc));
            }
        }
    }
    best
}

/// Locally maximizes the sampled witness over the coefficients, starting
/// from `init`. The returned witness is never below the witness at `init`.
pub fn optimize_coefficients(
    samples_x: &SampleSet,
    samples_k: &SampleSet,
    init: &WitnessCoefficients,
) -> Result<OptimizedCoefficients> {
    if samples_x.is_empty() || samples_k.is_empty() {
        return Err(Error::Usage("optimizer needs non-empty position and momentum samples".into()));
    }
    let init = WitnessCoefficients::new(init.eta(), init.beta())?;
    let search = Search {
        xs: samples_x,
        ks: samples_k,
        init,
    };
    let start = Point {
        eta: init.eta(),
        beta: init.beta(),
        h_x: side_entropy(samples_x, &init.eta()),
        h_k: side_entropy(samples_k, &init.beta()),
    };
    let init_value = start.value();
    let mut warnings = Vec::new();
    if start.h_x.is_none() {
        warnings.push("initial position combination has zero variance".to_string());
    }
    if start.h_k.is_none() {
        warnings.push("initial momentum combination has zero variance".to_string());
    }

    let (eta, h_x) = best_signs(samples_x, init.eta().map(f64::abs), start.eta, start.h_x);
    let (beta, h_k) = best_signs(samples_k, init.beta().map(f64::abs), start.beta, start.h_k);
    let signed = Point { eta, beta, h_x, h_k };

    let runs: Vec<(Point, Vec<String>)> = PERMUTATIONS
        .par_iter()
        .map(|&perm| {
            let mut w = Vec::new();
            let p = search.run(&signed, perm, &mut w);
            (p, w)
        })
        .collect();
    let mut best = 0;
    for (i, (p, _)) in runs.iter().enumerate() {
        if p.value() > runs[best].0.value() {
            best = i;
        }
    }
    let (point, run_warnings) = runs[best].clone();
    for w in run_warnings {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    Ok(OptimizedCoefficients {
        coefficients: WitnessCoefficients::new(point.eta, point.beta)?,
        witness_gebits: point.value(),
        init_witness_gebits: init_value,
        relative_bin_width: OPTIMIZER_RELATIVE_BIN,
        warnings,
    })
}
