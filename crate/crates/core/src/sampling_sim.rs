//! Simulated adaptive multiresolution coincidence scans.
//!
//! Triplets are drawn from a triple-Gaussian source and deposited into an
//! octree over the cube `[-B, B]³`, `B = 6 × (largest width)`. A cell is
//! split into its 8 octants while it holds at least `threshold` counts and
//! is shallower than `max_depth`. Only cell-level counts reach the witness,
//! as in an experiment that records coincidences per illuminated region.

use crate::entropy::{DensityGrid, Histogram1D};
use crate::error::{Error, Result};
use crate::report::EntanglementReport;
use crate::triple_gaussian::{
    exact_e3f, sample_triplets_from_stream, Basis, TripleGaussianState,
};
use crate::witness::{
    analytic_witness, bootstrap_se, continuous_witness, resample_counts, BootstrapOptions,
    WitnessCoefficients,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;

/// Support half-width in units of the largest state width.
pub const SUPPORT_WIDTHS: f64 = 6.0;
/// Deepest refinement the cell addressing supports (3 bits per level in a u64).
pub const MAX_SUPPORTED_DEPTH: u32 = 20;
/// Grid bins per finest-leaf projected extent in the smeared estimator.
pub const SMEAR_BINS_PER_LEAF: f64 = 16.0;
const MAX_GRID_BINS: usize = 1 << 24;

/// `max(16, n/4096)`: keeps the relative Poisson error of a refined cell
/// below 25%.
pub fn default_threshold(n_samples: usize) -> u64 {
    16.max(n_samples as u64 / 4096)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Lower corner.
    pub lo: [f64; 3],
    /// Edge length; cells are cubes.
    pub edge: f64,
    pub depth: u32,
    pub count: u64,
    /// Index of the first of 8 consecutive children, if split.
    pub children: Option<usize>,
    /// Octant digits from the root. Digit bit `i` is set when the cell lies
    /// in the upper half of its parent along axis `i`.
    pub path: String,
}

impl Cell {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn center(&self) -> [f64; 3] {
        self.lo.map(|l| l + 0.5 * self.edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceRecord<'a> {
    pub path: &'a str,
    pub count: u64,
    pub basis: Basis,
}

/// Adaptive octree of coincidence counts. Cell 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub basis: Basis,
    pub half_width: f64,
    pub threshold: u64,
    pub max_depth: u32,
    pub n_samples: u64,
    /// Samples outside the support box.
    pub dropped: u64,
    cells: Vec<Cell>,
}

impl PartitionTree {
    /// Builds the tree from raw points. The result does not depend on the
    /// order of `points`.
    pub fn build(
        points: &[[f64; 3]],
        basis: Basis,
        half_width: f64,
        threshold: u64,
        max_depth: u32,
    ) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Usage(format!("support half-width must be positive, got {half_width}")));
        }
        if threshold < 1 {
            return Err(Error::Usage("refinement threshold must be at least 1".into()));
        }
        if !(1..=MAX_SUPPORTED_DEPTH).contains(&max_depth) {
            return Err(Error::Usage(format!(
                "max depth must be in 1..={MAX_SUPPORTED_DEPTH}, got {max_depth}"
            )));
        }
        let side = 1u64 << max_depth;
        let scale = side as f64 / (2.0 * half_width);
        let mut dropped = 0u64;
        let mut codes: Vec<u64> = Vec::with_capacity(points.len());
        for p in points {
            if p.iter().any(|c| !c.is_finite() || c.abs() > half_width) {
                dropped += 1;
                continue;
            }
            let idx = p.map(|c| (((c + half_width) * scale).floor() as u64).min(side - 1));
            codes.push(morton(idx, max_depth));
        }
        codes.sort_unstable();

        let mut cells = vec![Cell {
            lo: [-half_width; 3],
            edge: 2.0 * half_width,
            depth: 0,
            count: codes.len() as u64,
            children: None,
            path: String::new(),
        }];
        let mut queue = std::collections::VecDeque::from([(0usize, 0usize, codes.len())]);
        while let Some((id, start, end)) = queue.pop_front() {
            let cell = &cells[id];
            if cell.count < threshold || cell.depth >= max_depth {
                continue;
            }
            let depth = cell.depth;
            let half = 0.5 * cell.edge;
            let (lo, path) = (cell.lo, cell.path.clone());
            let shift = 3 * (max_depth - 1 - depth);
            let octant = |c: &u64| (c >> shift) & 7;
            let first = cells.len();
            let mut begin = start;
            for o in 0..8u64 {
                let stop = begin + codes[begin..end].partition_point(|c| octant(c) <= o);
                let child_lo = [0, 1, 2].map(|i| lo[i] + if o >> i & 1 == 1 { half } else { 0.0 });
                cells.push(Cell {
                    lo: child_lo,
                    edge: half,
                    depth: depth + 1,
                    count: (stop - begin) as u64,
                    children: None,
                    path: format!("{path}{o}"),
                });
                queue.push_back((first + o as usize, begin, stop));
                begin = stop;
            }
            cells[id].children = Some(first);
        }
        Ok(Self {
            basis,
            half_width,
            threshold,
            max_depth,
            n_samples: points.len() as u64,
            dropped,
            cells,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn root(&self) -> &Cell {
        &self.cells[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_leaf())
    }

    pub fn children(&self, cell: &Cell) -> Option<&[Cell]> {
        cell.children.map(|i| &self.cells[i..i + 8])
    }

    /// Every split cell's count equals the sum over its 8 children, and no
    /// leaf is deeper than `max_depth`.
    pub fn is_valid_partition(&self) -> bool {
        self.cells.iter().all(|c| match self.children(c) {
            Some(ch) => ch.iter().map(|k| k.count).sum::<u64>() == c.count,
            None => c.depth <= self.max_depth,
        })
    }

    pub fn records(&self) -> Vec<CoincidenceRecord<'_>> {
        self.leaves()
            .map(|c| CoincidenceRecord {
                path: &c.path,
                count: c.count,
                basis: self.basis,
            })
            .collect()
    }

    /// One `path,count` line per leaf, after a header.
    pub fn to_path_count_lines(&self) -> String {
        let mut out = String::from("path,count\n");
        for r in self.records() {
            let _ = writeln!(out, "{},{}", r.path, r.count);
        }
        out
    }

    fn occupied_leaves(&self) -> impl Iterator<Item = &Cell> {
        self.leaves().filter(|c| c.count > 0)
    }

    pub fn finest_occupied_edge(&self) -> Option<f64> {
        self.occupied_leaves().map(|c| c.edge).reduce(f64::min)
    }

    pub fn coarsest_occupied_edge(&self) -> Option<f64> {
        self.occupied_leaves().map(|c| c.edge).reduce(f64::max)
    }

    /// Standard deviations of `p₁ + p₂` and `p₁ - p₂`, treating counts as
    /// uniform within each leaf.
    pub fn pair_moments(&self) -> Result<(f64, f64)> {
        let total = self.root().count as f64;
        if total == 0.0 {
            return Err(Error::Usage("pair moments of an empty tree".into()));
        }
        let (mut s1, mut s2, mut d1, mut d2) = (0.0, 0.0, 0.0, 0.0);
        for c in self.occupied_leaves() {
            let w = c.count as f64;
            let m = c.center();
            let within = 2.0 * c.edge * c.edge / 12.0;
            let (s, d) = (m[0] + m[1], m[0] - m[1]);
            s1 += w * s;
            s2 += w * (s * s + within);
            d1 += w * d;
            d2 += w * (d * d + within);
        }
        let var = |a: f64, b: f64| (b / total - (a / total).powi(2)).max(0.0);
        Ok((var(s1, s2).sqrt(), var(d1, d2).sqrt()))
    }
}

fn morton(idx: [u64; 3], depth: u32) -> u64 {
    let mut code = 0u64;
    for level in (0..depth).rev() {
        let digit = (idx[0] >> level & 1) | (idx[1] >> level & 1) << 1 | (idx[2] >> level & 1) << 2;
        code = code << 3 | digit;
    }
    code
}

fn basis_stream(basis: Basis) -> u64 {
    match basis {
        Basis::Position => 0,
        Basis::Momentum => 1 << 32,
    }
}

/// Draws `n_samples` triplets in `basis` and builds the adaptive tree.
pub fn simulate_adaptive_scan(
    state: &TripleGaussianState,
    basis: Basis,
    n_samples: usize,
    threshold: u64,
    max_depth: u32,
    seed: u64,
) -> Result<PartitionTree> {
    if n_samples == 0 {
        return Err(Error::Usage("scan needs at least one sample".into()));
    }
    let s = state.in_basis(basis);
    let half_width = SUPPORT_WIDTHS * s.widths().into_iter().fold(0.0, f64::max);
    let samples = sample_triplets_from_stream(&s, n_samples, seed, basis_stream(basis))?;
    PartitionTree::build(&samples.points, basis, half_width, threshold, max_depth)
}

fn side_coefficients(tree: &PartitionTree, coeffs: &WitnessCoefficients) -> [f64; 3] {
    match tree.basis {
        Basis::Position => coeffs.eta(),
        Basis::Momentum => coeffs.beta(),
    }
}

/// Histogram of the basis-appropriate combination (`η` for positions, `β`
/// for momenta), each leaf's count placed at its center's value. The bin
/// width is the projected extent `edge·Σ|cᵢ|` of the coarsest occupied leaf.
pub fn tree_to_linear_histograms(
    tree: &PartitionTree,
    coeffs: &WitnessCoefficients,
) -> Result<Histogram1D> {
    let c = side_coefficients(tree, coeffs);
    let edge = tree
        .coarsest_occupied_edge()
        .ok_or_else(|| Error::Usage("tree holds no counts".into()))?;
    let width = edge * c.iter().map(|v| v.abs()).sum::<f64>();
    let entries: Vec<(i64, u64)> = tree
        .occupied_leaves()
        .map(|l| {
            let m = l.center();
            let v = c[0] * m[0] + c[1] * m[1] + c[2] * m[2];
            ((v / width).floor() as i64, l.count)
        })
        .collect();
    let lo = entries.iter().map(|e| e.0).min().expect("occupied");
    let hi = entries.iter().map(|e| e.0).max().expect("occupied");
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for (k, n) in entries {
        counts[(k - lo) as usize] += n;
    }
    Histogram1D::new(width, lo as f64 * width, counts)
}

/// Projection of one cube through `c`: offset of the minimum and the three
/// uniform-interval widths whose sum it is.
struct Footprint {
    start: f64,
    widths: [f64; 3],
}

impl Footprint {
    fn new(cell: &Cell, c: &[f64; 3]) -> Self {
        let start = (0..3)
            .map(|i| (c[i] * cell.lo[i]).min(c[i] * (cell.lo[i] + cell.edge)))
            .sum();
        Self {
            start,
            widths: c.map(|v| v.abs() * cell.edge),
        }
    }

    fn span(&self) -> f64 {
        self.widths.iter().sum()
    }

    /// CDF at `start + t` of the sum of three independent uniforms.
    fn cdf(&self, t: f64) -> f64 {
        let [a, b, c] = self.widths;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= a + b + c {
            return 1.0;
        }
        let cube = |x: f64| if x > 0.0 { x * x * x } else { 0.0 };
        let sum = cube(t) - cube(t - a) - cube(t - b) - cube(t - c)
            + cube(t - a - b)
            + cube(t - a - c)
            + cube(t - b - c)
            - cube(t - a - b - c);
        (sum / (6.0 * a * b * c)).clamp(0.0, 1.0)
    }
}

/// Per-leaf bin fractions, computed once and reused for bootstrap replicates.
struct SmearPlan {
    counts: Vec<u64>,
    /// First grid bin touched by each leaf.
    first: Vec<usize>,
    /// Offsets into `fractions`, one more than the number of leaves.
    offsets: Vec<usize>,
    fractions: Vec<f64>,
    bin: f64,
    first_bin: i64,
    bins: usize,
}

impl SmearPlan {
    fn new(tree: &PartitionTree, c: &[f64; 3]) -> Result<Self> {
        let finest = tree
            .finest_occupied_edge()
            .ok_or_else(|| Error::Usage("tree holds no counts".into()))?;
        let l1: f64 = c.iter().map(|v| v.abs()).sum();
        let leaves: Vec<&Cell> = tree.occupied_leaves().collect();
        let footprints: Vec<Footprint> = leaves.iter().map(|l| Footprint::new(l, c)).collect();
        let lo = footprints.iter().map(|f| f.start).fold(f64::INFINITY, f64::min);
        let hi = footprints.iter().map(|f| f.start + f.span()).fold(f64::NEG_INFINITY, f64::max);
        let mut bin = finest * l1 / SMEAR_BINS_PER_LEAF;
        while (hi - lo) / bin > MAX_GRID_BINS as f64 {
            bin *= 2.0;
        }
        let first_bin = (lo / bin).floor() as i64;
        let bins = ((hi / bin).floor() as i64 - first_bin + 1) as usize;
        let mut first = Vec::with_capacity(leaves.len());
        let mut offsets = vec![0];
        let mut fractions = Vec::new();
        for f in &footprints {
            let k0 = (f.start / bin).floor() as i64;
            let k1 = ((f.start + f.span()) / bin).floor() as i64;
            first.push((k0 - first_bin) as usize);
            let mut prev = 0.0;
            for k in k0..=k1 {
                let cur = f.cdf((k + 1) as f64 * bin - f.start);
                fractions.push(cur - prev);
                prev = cur;
            }
            offsets.push(fractions.len());
        }
        Ok(Self {
            counts: leaves.iter().map(|l| l.count).collect(),
            first,
            offsets,
            fractions,
            bin,
            first_bin,
            bins,
        })
    }

    fn grid(&self, counts: &[u64]) -> DensityGrid {
        let mut weights = vec![0.0; self.bins];
        for (leaf, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let n = n as f64;
            let fr = &self.fractions[self.offsets[leaf]..self.offsets[leaf + 1]];
            for (w, f) in weights[self.first[leaf]..].iter_mut().zip(fr) {
                *w += n * f;
            }
        }
        DensityGrid {
            bin_width: self.bin,
            origin: self.first_bin as f64 * self.bin,
            weights,
        }
    }
}

/// Distribution of the basis-appropriate combination with each leaf's count
/// spread uniformly over the leaf, projected exactly onto a fine grid.
pub fn tree_to_smeared_density(
    tree: &PartitionTree,
    coeffs: &WitnessCoefficients,
) -> Result<DensityGrid> {
    let plan = SmearPlan::new(tree, &side_coefficients(tree, coeffs))?;
    Ok(plan.grid(&plan.counts))
}

/// Runs position and momentum scans of `state` and evaluates the witness
/// from their cell counts, with the default bootstrap.
pub fn end_to_end_witness(
    state: &TripleGaussianState,
    coeffs: &WitnessCoefficients,
    n_samples: usize,
    threshold: u64,
    max_depth: u32,
    seed: u64,
) -> Result<EntanglementReport> {
    let bootstrap = BootstrapOptions {
        seed,
        ..BootstrapOptions::default()
    };
    end_to_end_witness_with(state, coeffs, n_samples, threshold, max_depth, seed, &bootstrap)
}

/// The witness uses the leaf-smeared densities. The leaf-center histograms
/// of [`tree_to_linear_histograms`] are evaluated too and recorded in the
/// metadata.
pub fn end_to_end_witness_with(
    state: &TripleGaussianState,
    coeffs: &WitnessCoefficients,
    n_samples: usize,
    threshold: u64,
    max_depth: u32,
    seed: u64,
    bootstrap: &BootstrapOptions,
) -> Result<EntanglementReport> {
    let coeffs = WitnessCoefficients::new(coeffs.eta(), coeffs.beta())?;
    let (tx, tk) = rayon::join(
        || simulate_adaptive_scan(state, Basis::Position, n_samples, threshold, max_depth, seed),
        || simulate_adaptive_scan(state, Basis::Momentum, n_samples, threshold, max_depth, seed),
    );
    let (tx, tk) = (tx?, tk?);

    let plan_x = SmearPlan::new(&tx, &coeffs.eta())?;
    let plan_k = SmearPlan::new(&tk, &coeffs.beta())?;
    let h_x = plan_x.grid(&plan_x.counts).differential_entropy()?;
    let h_k = plan_k.grid(&plan_k.counts).differential_entropy()?;
    let witness = continuous_witness(&coeffs, h_x, h_k)?;
    let offset = witness + h_x + h_k;
    let se = bootstrap_se(bootstrap, 0, |rng| {
        let rx = resample_counts(&plan_x.counts, rng);
        let rk = resample_counts(&plan_k.counts, rng);
        let hx = plan_x.grid(&rx).differential_entropy().unwrap_or(h_x);
        let hk = plan_k.grid(&rk).differential_entropy().unwrap_or(h_k);
        offset - hx - hk
    });

    let hist_x = tree_to_linear_histograms(&tx, &coeffs)?;
    let hist_k = tree_to_linear_histograms(&tk, &coeffs)?;
    let center_witness = continuous_witness(
        &coeffs,
        crate::entropy::differential_entropy_from_histogram(&hist_x)?,
        crate::entropy::differential_entropy_from_histogram(&hist_k)?,
    )?;

    let [su, sv, sw] = state.widths();
    let mut report = EntanglementReport::new(witness, h_x, h_k)
        .input(
            "state",
            json!({ "sigma_u": su, "sigma_v": sv, "sigma_w": sw, "basis": state.basis }),
        )
        .input("coefficients", json!({ "eta": coeffs.eta(), "beta": coeffs.beta() }))
        .input("n_samples", n_samples as u64)
        .input("threshold", threshold)
        .input("max_depth", max_depth)
        .input("seed", seed)
        .input("support_widths", SUPPORT_WIDTHS)
        .input("bootstrap_replicates", bootstrap.replicates as u64)
        .input("bootstrap_seed", bootstrap.seed)
        .meta("estimator", "leaf counts spread uniformly over each leaf")
        .meta("bin_width_x", plan_x.bin)
        .meta("bin_width_k", plan_k.bin)
        .meta("dropped_x", tx.dropped)
        .meta("dropped_k", tk.dropped)
        .meta("leaves_x", tx.leaves().count() as u64)
        .meta("leaves_k", tk.leaves().count() as u64)
        .meta("finest_edge_x", tx.finest_occupied_edge().unwrap_or(0.0))
        .meta("finest_edge_k", tk.finest_occupied_edge().unwrap_or(0.0))
        .meta("center_assignment_witness_gebits", center_witness)
        .meta("center_assignment_bin_width_x", hist_x.bin_width())
        .meta("center_assignment_bin_width_k", hist_k.bin_width())
        .meta("analytic_witness_gebits", analytic_witness(state, &coeffs)?);
    report.exact_e3f_gebits = exact_e3f(state).ok();
    report.bootstrap_se = se;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::differential_entropy_from_histogram;
    use crate::triple_gaussian::{pair_statistics, rotate_to_uvw, sample_triplets};

    #[test]
    fn threshold_above_n_gives_single_leaf() {
        let s = TripleGaussianState::symmetric(2.0, 1.0).unwrap();
        let t = simulate_adaptive_scan(&s, Basis::Position, 500, 501, 6, 1).unwrap();
        assert_eq!(t.cells().len(), 1);
        assert!(t.root().is_leaf());
        let h = tree_to_linear_histograms(&t, &WitnessCoefficients::spdc_default()).unwrap();
        assert_eq!(h.counts().len(), 1);
        let width = t.root().edge * 2.0;
        assert!((differential_entropy_from_histogram(&h).unwrap() - width.log2()).abs() < 1e-12);
    }

    #[test]
    fn partition_is_valid_and_counts_conserved() {
        let s = TripleGaussianState::symmetric(10.0, 1.0).unwrap();
        let t = simulate_adaptive_scan(&s, Basis::Position, 100_000, 30, 7, 2).unwrap();
        assert!(t.is_valid_partition());
        let leaf_total: u64 = t.leaves().map(|c| c.count).sum();
        assert_eq!(leaf_total + t.dropped, 100_000);
        assert_eq!(t.dropped, 0);
        assert!(t.leaves().all(|c| c.depth <= 7));
        for c in t.cells() {
            if let Some(ch) = t.children(c) {
                assert!(c.count >= 30);
                for (o, k) in ch.iter().enumerate() {
                    assert_eq!(k.path, format!("{}{o}", c.path));
                    assert_eq!(k.edge, c.edge / 2.0);
                }
            }
        }
    }

    #[test]
    fn build_is_order_independent() {
        let s = TripleGaussianState::symmetric(5.0, 1.0).unwrap();
        let mut pts = sample_triplets(&s, 20_000, 4).unwrap().points;
        let a = PartitionTree::build(&pts, Basis::Position, 30.0, 20, 6).unwrap();
        pts.reverse();
        pts.swap(3, 17_000);
        let b = PartitionTree::build(&pts, Basis::Position, 30.0, 20, 6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refined_leaves_follow_the_diagonal() {
        let s = TripleGaussianState::symmetric(100.0, 1.0).unwrap();
        let t = simulate_adaptive_scan(&s, Basis::Position, 200_000, 16, 8, 5).unwrap();
        let deepest: Vec<&Cell> = t.leaves().filter(|c| c.depth == 8 && c.count > 0).collect();
        assert!(!deepest.is_empty());
        // leaf edge is 1200/256 ≈ 4.7, so allow its half-diagonal on top of 3σ_v
        let slack = 3.0 + deepest[0].edge * 3f64.sqrt() / 2.0;
        let near = deepest
            .iter()
            .filter(|c| {
                let m = c.center();
                let [_, v, w] = rotate_to_uvw(m[0], m[1], m[2]);
                v.hypot(w) <= slack
            })
            .count();
        assert!(near as f64 >= 0.9 * deepest.len() as f64, "{near}/{}", deepest.len());
    }

    #[test]
    fn out_of_box_samples_are_counted() {
        let pts = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.5, -0.5, 0.9], [f64::NAN, 0.0, 0.0]];
        let t = PartitionTree::build(&pts, Basis::Position, 1.0, 1, 3).unwrap();
        assert_eq!(t.dropped, 2);
        assert_eq!(t.root().count, 2);
        assert_eq!(t.n_samples, 4);
    }

    #[test]
    fn export_lists_every_leaf() {
        let pts = [[0.1, 0.1, 0.1], [-0.1, -0.1, -0.1]];
        let t = PartitionTree::build(&pts, Basis::Position, 1.0, 2, 1).unwrap();
        let text = t.to_path_count_lines();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path,count");
        assert_eq!(lines.len(), 9);
        assert!(lines.contains(&"0,1") && lines.contains(&"7,1"));
    }

    #[test]
    fn parameter_errors() {
        let s = TripleGaussianState::symmetric(1.0, 1.0).unwrap();
        assert!(matches!(simulate_adaptive_scan(&s, Basis::Position, 0, 1, 3, 0), Err(Error::Usage(_))));
        assert!(simulate_adaptive_scan(&s, Basis::Position, 10, 0, 3, 0).is_err());
        assert!(simulate_adaptive_scan(&s, Basis::Position, 10, 1, 0, 0).is_err());
        assert!(simulate_adaptive_scan(&s, Basis::Position, 10, 1, 21, 0).is_err());
    }

    #[test]
    fn uniform_depth_tree_matches_direct_binning() {
        let s = TripleGaussianState::symmetric(3.0, 1.0).unwrap();
        let c = WitnessCoefficients::spdc_default();
        let n = 200_000;
        let t = simulate_adaptive_scan(&s, Basis::Position, n, 1, 6, 8).unwrap();
        assert_eq!(t.coarsest_occupied_edge(), t.finest_occupied_edge());
        let h = tree_to_linear_histograms(&t, &c).unwrap();
        let direct = Histogram1D::from_values(
            &sample_triplets_from_stream(&s, n, 8, 0).unwrap().project(&c.eta()),
            h.bin_width(),
        )
        .unwrap();
        let mean = |h: &Histogram1D| {
            h.counts()
                .iter()
                .enumerate()
                .map(|(i, &k)| k as f64 * (h.origin() + (i as f64 + 0.5) * h.bin_width()))
                .sum::<f64>()
                / h.total() as f64
        };
        assert!((mean(&h) - mean(&direct)).abs() <= h.bin_width());
        let eh = differential_entropy_from_histogram(&h).unwrap();
        let ed = differential_entropy_from_histogram(&direct).unwrap();
        assert!((eh - ed).abs() < 0.15, "{eh} vs {ed}");
    }

    #[test]
    fn footprint_cdf_is_a_distribution() {
        let cell = Cell {
            lo: [0.0, 1.0, -2.0],
            edge: 0.5,
            depth: 1,
            count: 1,
            children: None,
            path: "3".into(),
        };
        let f = Footprint::new(&cell, &[1.0, -0.5, -0.25]);
        assert!((f.start - (0.0 - 0.75 + 0.375)).abs() < 1e-15);
        assert!((f.span() - 0.875).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = f.cdf(f.span() * i as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!((prev - 1.0).abs() < 1e-12);
        assert!((f.cdf(0.5 * f.span()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pair_moments_match_closed_form() {
        let s = TripleGaussianState::symmetric(2.0, 1.0).unwrap();
        let t = simulate_adaptive_scan(&s, Basis::Position, 1_000_000, 16, 8, 9).unwrap();
        let (sum, diff) = t.pair_moments().unwrap();
        let p = pair_statistics(&s).unwrap();
        assert!((sum / p.sd_x_sum - 1.0).abs() < 0.02);
        assert!((diff / p.sd_x_diff - 1.0).abs() < 0.02);
        let tk = simulate_adaptive_scan(&s, Basis::Momentum, 1_000_000, 16, 8, 9).unwrap();
        let (sum, diff) = tk.pair_moments().unwrap();
        assert!((sum / p.sd_k_sum - 1.0).abs() < 0.02);
        assert!((diff / p.sd_k_diff - 1.0).abs() < 0.02);
    }

    #[test]
    fn end_to_end_is_deterministic_and_separable_certifies_nothing() {
        let s = TripleGaussianState::symmetric(1.0, 1.0).unwrap();
        let c = WitnessCoefficients::spdc_default();
        let a = end_to_end_witness(&s, &c, 50_000, default_threshold(50_000), 6, 3).unwrap();
        let b = end_to_end_witness(&s, &c, 50_000, default_threshold(50_000), 6, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.certified_gebits, 0.0);
        assert_eq!(a.exact_e3f_gebits, Some(0.0));
    }
}
