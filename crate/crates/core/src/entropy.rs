//! Entropy kernels.
//!
//! Everything here is in bits, differential entropies included. `0·log 0`
//! is taken to be `0`.
//!
//! | Function | Quantity |
//! |----------|----------|
//! | [`shannon_entropy`] | `H(p) = -Σ p log₂ p` |
//! | [`conditional_entropy`] | `H(target | rest) = H(joint) - H(rest)` |
//! | [`mutual_information`] | `H(A) + H(B) - H(AB)` |
//! | [`binary_entropy`] | `h₂(λ)` |
//! | [`gaussian_differential_entropy`] | `½ log₂(2πe σ²)` |
//! | [`differential_entropy_from_histogram`] | `H(bins) + log₂(width)` |

use crate::error::{Error, Result};
use std::f64::consts::{E, PI};

/// Normalization slack accepted by [`DiscretePmf::new`].
pub const PMF_TOLERANCE: f64 = 1e-12;

/// A probability mass function over 1 to 3 discrete axes, stored row-major
/// (last axis varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    probabilities: Vec<f64>,
    shape: Vec<usize>,
}

impl DiscretePmf {
    /// Validates and (within [`PMF_TOLERANCE`]) renormalizes `probabilities`.
    pub fn new(probabilities: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 {
            return Err(Error::Validation(format!(
                "a PMF needs 1 to 3 axes, got {}",
                shape.len()
            )));
        }
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::Validation("zero-length PMF axis".into()));
        }
        let expected: usize = shape.iter().product();
        if expected != probabilities.len() {
            return Err(Error::Validation(format!(
                "shape {:?} implies {} entries, got {}",
                shape,
                expected,
                probabilities.len()
            )));
        }
        if let Some(bad) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Validation(format!("invalid probability {bad}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let probabilities = probabilities.into_iter().map(|p| p / total).collect();
        Ok(Self {
            probabilities,
            shape,
        })
    }

    /// Builds a PMF from non-negative outcome counts.
    pub fn from_counts(counts: &[u64], shape: Vec<usize>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Validation("all counts are zero".into()));
        }
        let probabilities = counts.iter().map(|&c| c as f64 / total as f64).collect();
        // Rounding in the division can leave the sum a few ulps off; renormalize
        // through the validating constructor.
        Self::new(probabilities, shape)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn num_axes(&self) -> usize {
        self.shape.len()
    }

    /// Marginal distribution over the listed axes, in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<DiscretePmf> {
        if keep.is_empty() {
            return Err(Error::Usage("marginal needs at least one axis".into()));
        }
        for (i, &axis) in keep.iter().enumerate() {
            if axis >= self.shape.len() {
                return Err(Error::Usage(format!(
                    "axis {axis} out of range for a {}-axis PMF",
                    self.shape.len()
                )));
            }
            if keep[..i].contains(&axis) {
                return Err(Error::Usage(format!("axis {axis} listed twice")));
            }
        }
        let out_shape: Vec<usize> = keep.iter().map(|&a| self.shape[a]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        let mut index = vec![0usize; self.shape.len()];
        for &p in &self.probabilities {
            let mut flat = 0;
            for &axis in keep {
                flat = flat * self.shape[axis] + index[axis];
            }
            out[flat] += p;
            // odometer increment, last axis fastest
            for axis in (0..self.shape.len()).rev() {
                index[axis] += 1;
                if index[axis] < self.shape[axis] {
                    break;
                }
                index[axis] = 0;
            }
        }
        Ok(DiscretePmf {
            probabilities: out,
            shape: out_shape,
        })
    }
}

fn plogp_sum<I: IntoIterator<Item = f64>>(probabilities: I) -> f64 {
    -probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &DiscretePmf) -> f64 {
    plogp_sum(p.probabilities.iter().copied()).max(0.0)
}

/// `H(joint) - H(all axes except target)`.
pub fn conditional_entropy(p: &DiscretePmf, target_axis: usize) -> Result<f64> {
    if p.num_axes() < 2 {
        return Err(Error::Usage(
            "conditional entropy needs at least two axes".into(),
        ));
    }
    if target_axis >= p.num_axes() {
        return Err(Error::Usage(format!(
            "target axis {target_axis} out of range for a {}-axis PMF",
            p.num_axes()
        )));
    }
    let rest: Vec<usize> = (0..p.num_axes()).filter(|&a| a != target_axis).collect();
    let h_rest = shannon_entropy(&p.marginal(&rest)?);
    Ok((shannon_entropy(p) - h_rest).max(0.0))
}

/// Mutual information between the two axes of a 2-axis PMF.
pub fn mutual_information(p: &DiscretePmf) -> Result<f64> {
    if p.num_axes() != 2 {
        return Err(Error::Usage(format!(
            "mutual information needs exactly two axes, got {}",
            p.num_axes()
        )));
    }
    let ha = shannon_entropy(&p.marginal(&[0])?);
    let hb = shannon_entropy(&p.marginal(&[1])?);
    Ok((ha + hb - shannon_entropy(p)).max(0.0))
}

/// `-λ log₂ λ - (1-λ) log₂(1-λ)`.
pub fn binary_entropy(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!(
            "binary entropy argument {lambda} outside [0, 1]"
        )));
    }
    Ok(plogp_sum([lambda, 1.0 - lambda]))
}

/// Differential entropy of a normal distribution with standard deviation `sigma`.
pub fn gaussian_differential_entropy(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "standard deviation must be positive and finite, got {sigma}"
        )));
    }
    Ok(0.5 * (2.0 * PI * E * sigma * sigma).log2())
}

/// Regular 1D histogram with integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    bin_width: f64,
    origin: f64,
    counts: Vec<u64>,
}

impl Histogram1D {
    pub fn new(bin_width: f64, origin: f64, counts: Vec<u64>) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::Validation(format!(
                "bin width must be positive and finite, got {bin_width}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::Validation("histogram origin must be finite".into()));
        }
        Ok(Self {
            bin_width,
            origin,
            counts,
        })
    }

    /// Bins `values` on the lattice `k·bin_width`, `k ∈ ℤ`.
    pub fn from_values(values: &[f64], bin_width: f64) -> Result<Self> {
        let probe = Self::new(bin_width, 0.0, Vec::new())?;
        if values.is_empty() {
            return Ok(probe);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite value in histogram input".into()));
        }
        let lattice = |v: f64| (v / bin_width).floor() as i64;
        let lo = values.iter().map(|&v| lattice(v)).min().unwrap_or(0);
        let hi = values.iter().map(|&v| lattice(v)).max().unwrap_or(0);
        let len = usize::try_from(hi - lo + 1)
            .map_err(|_| Error::Usage("histogram span overflows".into()))?;
        if len > 1 << 28 {
            return Err(Error::Usage(format!(
                "histogram would need {len} bins; bin width {bin_width} is too fine for the data range"
            )));
        }
        let mut counts = vec![0u64; len];
        for &v in values {
            counts[(lattice(v) - lo) as usize] += 1;
        }
        Self::new(bin_width, lo as f64 * bin_width, counts)
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Merges adjacent bin pairs, doubling the bin width.
    pub fn coarsen(&self) -> Histogram1D {
        let counts = self.counts.chunks(2).map(|c| c.iter().sum()).collect();
        Histogram1D {
            bin_width: 2.0 * self.bin_width,
            origin: self.origin,
            counts,
        }
    }
}

/// Entropy in bits of the distribution proportional to `weights`.
pub(crate) fn entropy_of_weights(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let sum_wlogw: f64 = weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.log2())
        .sum();
    (total.log2() - sum_wlogw / total).max(0.0)
}

/// Plug-in estimate `H(normalized counts) + log₂(bin_width)`.
///
/// This is the exact differential entropy of the piecewise-uniform density
/// the histogram describes. Since that density is a coarse-graining of the
/// sampled one, its entropy is an over-estimate in expectation; no further
/// bias correction is applied.
pub fn differential_entropy_from_histogram(h: &Histogram1D) -> Result<f64> {
    let total = h.total();
    if total == 0 {
        return Err(Error::Usage("entropy requested for an empty histogram".into()));
    }
    let n = total as f64;
    let sum_clogc: f64 = h
        .counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c * c.log2()
        })
        .sum();
    let discrete = (n.log2() - sum_clogc / n).max(0.0);
    Ok(discrete + h.bin_width.log2())
}

/// Regular grid carrying real-valued probability weights, used where mass is
/// spread over bins analytically rather than counted.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub bin_width: f64,
    pub origin: f64,
    pub weights: Vec<f64>,
}

impl DensityGrid {
    /// `H(normalized weights) + log₂(bin_width)`.
    pub fn differential_entropy(&self) -> Result<f64> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Usage("entropy requested for an empty grid".into()));
        }
        Ok(entropy_of_weights(&self.weights) + self.bin_width.log2())
    }
}
