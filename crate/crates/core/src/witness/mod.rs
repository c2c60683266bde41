//! Entropic lower bounds on tripartite entanglement.
//!
//! The continuous bound uses the differential entropies of one linear
//! combination of positions, `η·x`, and one of momenta, `β·k`:
//!
//! `E₃F ≥ log₂(2π |η̄||β̄|) - h(η·x) - h(β·k)`, with `|η̄||β̄| = minᵢ |ηᵢ||βᵢ|`.

mod discrete;
mod optimize;
mod relation;

pub use discrete::{discrete_witness, DiscreteWitnessInput};
pub use optimize::{optimize_coefficients, OptimizedCoefficients, OPTIMIZER_RELATIVE_BIN};
pub use relation::{
    correlation_terms, haar_unitary, random_pure_state, verify_correlation_relation,
    CorrelationReport, CorrelationTerms, RELATION_TOLERANCE,
};

use crate::entropy::{differential_entropy_from_histogram, gaussian_differential_entropy, Histogram1D};
use crate::error::{Error, Result};
use crate::report::EntanglementReport;
use crate::rng::{substream, DERIVED_STREAM_BASE};
use crate::triple_gaussian::{rotate_to_uvw, Basis, SampleSet, TripleGaussianState};
use rand::Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::PI;

/// Linear-combination weights `(η_A, η_B, η_C)` for positions and
/// `(β_A, β_B, β_C)` for momenta. All components are nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessCoefficients {
    eta: [f64; 3],
    beta: [f64; 3],
}

impl WitnessCoefficients {
    pub fn new(eta: [f64; 3], beta: [f64; 3]) -> Result<Self> {
        for (name, v) in [("eta", eta), ("beta", beta)] {
            if v.iter().any(|c| *c == 0.0 || !c.is_finite()) {
                return Err(Error::Validation(format!(
                    "every {name} component must be finite and nonzero, got {v:?}"
                )));
            }
        }
        Ok(Self { eta, beta })
    }

    /// `η = (1, -½, -½)`, `β = (1, 1, 1)`: relative position of one photon
    /// against the other two, and total transverse momentum.
    pub fn spdc_default() -> Self {
        Self {
            eta: [1.0, -0.5, -0.5],
            beta: [1.0, 1.0, 1.0],
        }
    }

    pub fn eta(&self) -> [f64; 3] {
        self.eta
    }

    pub fn beta(&self) -> [f64; 3] {
        self.beta
    }

    /// `minᵢ |ηᵢ||βᵢ|`.
    pub fn min_product(&self) -> f64 {
        (0..3)
            .map(|i| (self.eta[i] * self.beta[i]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Relabels parties: party `i` of the result is party `perm[i]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self {
            eta: perm.map(|p| self.eta[p]),
            beta: perm.map(|p| self.beta[p]),
        }
    }

    fn to_json(self) -> serde_json::Value {
        json!({ "eta": self.eta, "beta": self.beta })
    }
}

/// `log₂(2π minᵢ|ηᵢ||βᵢ|) - h_x - h_k`, in gebits. Entropies in bits.
pub fn continuous_witness(coeffs: &WitnessCoefficients, h_x: f64, h_k: f64) -> Result<f64> {
    let coeffs = WitnessCoefficients::new(coeffs.eta, coeffs.beta)?;
    Ok((2.0 * PI * coeffs.min_product()).log2() - h_x - h_k)
}

/// Standard deviation of `c·p` for a triple-Gaussian state, in the state's
/// own basis.
pub fn gaussian_combination_sd(state: &TripleGaussianState, c: &[f64; 3]) -> f64 {
    let r = rotate_to_uvw(c[0], c[1], c[2]);
    let s = state.widths();
    (0..3).map(|j| (r[j] * s[j]).powi(2)).sum::<f64>().sqrt()
}

/// Exact Gaussian entropies `(h(η·x), h(β·k))` of the two combinations.
pub fn gaussian_combination_entropies(
    state: &TripleGaussianState,
    coeffs: &WitnessCoefficients,
) -> Result<(f64, f64)> {
    let x = state.in_basis(Basis::Position);
    let k = state.in_basis(Basis::Momentum);
    Ok((
        gaussian_differential_entropy(gaussian_combination_sd(&x, &coeffs.eta))?,
        gaussian_differential_entropy(gaussian_combination_sd(&k, &coeffs.beta))?,
    ))
}

/// The witness evaluated with exact Gaussian entropies.
pub fn analytic_witness(state: &TripleGaussianState, coeffs: &WitnessCoefficients) -> Result<f64> {
    let (h_x, h_k) = gaussian_combination_entropies(state, coeffs)?;
    continuous_witness(coeffs, h_x, h_k)
}

/// Multinomial resampling of binned data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    /// 0 disables the bootstrap.
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            replicates: 200,
            seed: 0,
        }
    }
}

/// Draws a multinomial resample of `counts` with the same total, through
/// sequential conditional binomials.
pub(crate) fn resample_counts<R: Rng>(counts: &[u64], rng: &mut R) -> Vec<u64> {
    let mut remaining_n: u64 = counts.iter().sum();
    let mut remaining_mass = remaining_n as f64;
    let mut out = Vec::with_capacity(counts.len());
    for &c in counts {
        if remaining_n == 0 || c == 0 {
            out.push(0);
            remaining_mass -= c as f64;
            continue;
        }
        let p = (c as f64 / remaining_mass).min(1.0);
        let draw = if p >= 1.0 {
            remaining_n
        } else {
            rng.sample(Binomial::new(remaining_n, p).expect("p in [0, 1)"))
        };
        out.push(draw);
        remaining_n -= draw;
        remaining_mass -= c as f64;
    }
    out
}

/// Standard deviation over bootstrap replicates of `f(resampled counts)`.
pub(crate) fn bootstrap_se<F>(opts: &BootstrapOptions, stream_offset: u64, f: F) -> Option<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    if opts.replicates < 2 {
        return None;
    }
    let values: Vec<f64> = (0..opts.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(opts.seed, DERIVED_STREAM_BASE + stream_offset + i as u64);
            f(&mut rng)
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(var.sqrt())
}

/// Witness from binned position and momentum combinations.
pub fn witness_from_histograms(
    hist_x: &Histogram1D,
    hist_k: &Histogram1D,
    coeffs: &WitnessCoefficients,
    bootstrap: &BootstrapOptions,
) -> Result<EntanglementReport> {
    let h_x = differential_entropy_from_histogram(hist_x)?;
    let h_k = differential_entropy_from_histogram(hist_k)?;
    let witness = continuous_witness(coeffs, h_x, h_k)?;
    let offset = (2.0 * PI * coeffs.min_product()).log2();
    let se = bootstrap_se(bootstrap, 0, |rng| {
        let rx = resample_counts(hist_x.counts(), rng);
        let rk = resample_counts(hist_k.counts(), rng);
        let hx = Histogram1D::new(hist_x.bin_width(), hist_x.origin(), rx)
            .and_then(|h| differential_entropy_from_histogram(&h))
            .unwrap_or(h_x);
        let hk = Histogram1D::new(hist_k.bin_width(), hist_k.origin(), rk)
            .and_then(|h| differential_entropy_from_histogram(&h))
            .unwrap_or(h_k);
        offset - hx - hk
    });
    let mut report = EntanglementReport::new(witness, h_x, h_k)
        .input("coefficients", coeffs.to_json())
        .input("bin_width_x", hist_x.bin_width())
        .input("bin_width_k", hist_k.bin_width())
        .input("bootstrap_replicates", bootstrap.replicates as u64)
        .input("bootstrap_seed", bootstrap.seed)
        .meta("count_x", hist_x.total())
        .meta("count_k", hist_k.total())
        .meta("bins_x", hist_x.counts().len() as u64)
        .meta("bins_k", hist_k.counts().len() as u64);
    report.bootstrap_se = se;
    Ok(report)
}

/// Bins `η·x` and `β·k` of the given samples and evaluates the witness,
/// with the default bootstrap.
pub fn witness_from_samples(
    samples_x: &SampleSet,
    samples_k: &SampleSet,
    coeffs: &WitnessCoefficients,
    bin_width_x: f64,
    bin_width_k: f64,
) -> Result<EntanglementReport> {
    witness_from_samples_with(
        samples_x,
        samples_k,
        coeffs,
        bin_width_x,
        bin_width_k,
        &BootstrapOptions::default(),
    )
}

pub fn witness_from_samples_with(
    samples_x: &SampleSet,
    samples_k: &SampleSet,
    coeffs: &WitnessCoefficients,
    bin_width_x: f64,
    bin_width_k: f64,
    bootstrap: &BootstrapOptions,
) -> Result<EntanglementReport> {
    if samples_x.is_empty() || samples_k.is_empty() {
        return Err(Error::Usage("witness needs non-empty position and momentum samples".into()));
    }
    let coeffs = WitnessCoefficients::new(coeffs.eta, coeffs.beta)?;
    let hist_x = Histogram1D::from_values(&samples_x.project(&coeffs.eta), bin_width_x)?;
    let hist_k = Histogram1D::from_values(&samples_k.project(&coeffs.beta), bin_width_k)?;
    witness_from_histograms(&hist_x, &hist_k, &coeffs, bootstrap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::gaussian_differential_entropy as hg;
    use crate::spdc::gaussian_witness_offset_bits;
    use crate::triple_gaussian::sample_triplets;

    #[test]
    fn coefficient_validation() {
        assert!(WitnessCoefficients::new([1.0, 0.0, 1.0], [1.0; 3]).is_err());
        assert!(WitnessCoefficients::new([1.0; 3], [1.0, 1.0, f64::NAN]).is_err());
        let c = WitnessCoefficients::new([2.0, -0.5, 3.0], [0.1, 4.0, -1.0]).unwrap();
        assert_eq!(c.min_product(), 0.2);
        assert!(continuous_witness(&c, 0.0, 0.0).is_ok());
    }

    #[test]
    fn gaussian_witness_matches_closed_form() {
        let c = WitnessCoefficients::spdc_default();
        for (su, sv) in [(1.0, 1.0), (3e-4, 2e-6), (0.1, 7.0)] {
            let s = TripleGaussianState::symmetric(su, sv).unwrap();
            let k = s.fourier_dual();
            let expected = -gaussian_witness_offset_bits()
                - 0.5 * (sv * sv * k.sigma_u * k.sigma_u).log2();
            let got = analytic_witness(&s, &c).unwrap();
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
    }

    #[test]
    fn independent_unit_gaussians() {
        // every x_i and k_i an independent unit Gaussian
        let c = WitnessCoefficients::spdc_default();
        let h_x = hg(1.5f64.sqrt()).unwrap();
        let h_k = hg(3f64.sqrt()).unwrap();
        let w = continuous_witness(&c, h_x, h_k).unwrap();
        assert!((w - (-3.527_657_541_610_12)).abs() < 1e-12, "{w}");
        // a pure product state with unit position widths has momentum widths ½
        let s = TripleGaussianState::symmetric(1.0, 1.0).unwrap();
        assert!((analytic_witness(&s, &c).unwrap() - (w + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn scaling_eta_is_neutral() {
        let c = WitnessCoefficients::new([1.0, -0.5, 2.0], [1.0, 3.0, 1.0]).unwrap();
        let w = continuous_witness(&c, 1.2, -0.4).unwrap();
        let scaled = WitnessCoefficients::new([4.0, -2.0, 8.0], [1.0, 3.0, 1.0]).unwrap();
        // all three products scale by 4, so the min term shifts by +2 bits
        let ws = continuous_witness(&scaled, 1.2 + 2.0, -0.4).unwrap();
        assert!((w - ws).abs() < 1e-14);
    }

    #[test]
    fn resampling_preserves_total() {
        let counts = [0u64, 5, 100, 0, 7, 1];
        let mut rng = substream(3, 9);
        for _ in 0..50 {
            let r = resample_counts(&counts, &mut rng);
            assert_eq!(r.iter().sum::<u64>(), 113);
            assert_eq!(r[0], 0);
            assert_eq!(r[3], 0);
        }
    }

    #[test]
    fn sampled_witness_near_analytic() {
        let s = TripleGaussianState::symmetric(50.0, 1.0).unwrap();
        let c = WitnessCoefficients::spdc_default();
        let x = sample_triplets(&s, 200_000, 1).unwrap();
        let k = sample_triplets(&s.fourier_dual(), 200_000, 2).unwrap();
        let sd_x = gaussian_combination_sd(&s, &c.eta());
        let sd_k = gaussian_combination_sd(&s.fourier_dual(), &c.beta());
        let r = witness_from_samples(&x, &k, &c, sd_x / 20.0, sd_k / 20.0).unwrap();
        let exact = analytic_witness(&s, &c).unwrap();
        assert!((r.witness_gebits - exact).abs() < 0.1, "{} vs {exact}", r.witness_gebits);
        let se = r.bootstrap_se.unwrap();
        assert!(se > 0.0 && se < 0.01, "{se}");
        assert!(r.witness_gebits <= exact + 3.0 * se + 1e-3);
    }

    #[test]
    fn empty_samples_rejected() {
        let c = WitnessCoefficients::spdc_default();
        let empty = SampleSet::new(Basis::Position, vec![]);
        let one = SampleSet::new(Basis::Momentum, vec![[0.0; 3]]);
        assert!(matches!(
            witness_from_samples(&empty, &one, &c, 1.0, 1.0),
            Err(Error::Usage(_))
        ));
    }
}
