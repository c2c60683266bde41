//! The triple-Gaussian triphoton state.
//!
//! In rotated coordinates
//!
//! ```text
//! x_u = (x1 + x2 + x3)/√3
//! x_v = (2/√6)(-x1 + (x2 + x3)/2)
//! x_w = (x2 - x3)/√2
//! ```
//!
//! the state factorizes into three independent Gaussians whose probability
//! densities have standard deviations `σ_u`, `σ_v`, `σ_w`. Position and
//! momentum representations are related by `σ_k = 1/(2σ_x)` on every axis.
//!
//! Closed forms here (exact E₃F, pair statistics, the Mancini bound, the
//! birth zone) are only established for the permutation-symmetric case
//! `σ_v = σ_w`; asymmetric states can be built and sampled but those
//! functions reject them.

use crate::error::{Error, Result};
use crate::rng::{substream, CHUNK};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, SQRT_2};

/// Measurement representation of a state or sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Transverse positions, meters.
    Position,
    /// Transverse wavenumbers, rad/m.
    Momentum,
}

impl Basis {
    pub fn dual(self) -> Basis {
        match self {
            Basis::Position => Basis::Momentum,
            Basis::Momentum => Basis::Position,
        }
    }
}

/// Relative tolerance used to decide `σ_v = σ_w`.
const SYMMETRY_RTOL: f64 = 1e-12;

/// Width ratio beyond which `h₂(λ₀)/λ₀` switches to its asymptotic series.
pub const E3F_ASYMPTOTIC_RATIO: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleGaussianState {
    pub sigma_u: f64,
    pub sigma_v: f64,
    pub sigma_w: f64,
    pub basis: Basis,
}

impl TripleGaussianState {
    /// Position-space state with the given rotated-coordinate widths (meters).
    pub fn new(sigma_u: f64, sigma_v: f64, sigma_w: f64) -> Result<Self> {
        Self::with_basis(sigma_u, sigma_v, sigma_w, Basis::Position)
    }

    /// Position-space state with `σ_w = σ_v`.
    pub fn symmetric(sigma_u: f64, sigma_v: f64) -> Result<Self> {
        Self::new(sigma_u, sigma_v, sigma_v)
    }

    pub fn with_basis(sigma_u: f64, sigma_v: f64, sigma_w: f64, basis: Basis) -> Result<Self> {
        for (name, s) in [("sigma_u", sigma_u), ("sigma_v", sigma_v), ("sigma_w", sigma_w)] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Validation(format!(
                    "{name} must be positive and finite, got {s}"
                )));
            }
        }
        Ok(Self {
            sigma_u,
            sigma_v,
            sigma_w,
            basis,
        })
    }

    pub fn widths(&self) -> [f64; 3] {
        [self.sigma_u, self.sigma_v, self.sigma_w]
    }

    pub fn is_symmetric(&self) -> bool {
        (self.sigma_v - self.sigma_w).abs() <= SYMMETRY_RTOL * self.sigma_v.max(self.sigma_w)
    }

    /// Fourier-dual representation: every width maps to `1/(2σ)` and the
    /// basis flips. Applying it twice returns the original state.
    pub fn fourier_dual(&self) -> TripleGaussianState {
        TripleGaussianState {
            sigma_u: 0.5 / self.sigma_u,
            sigma_v: 0.5 / self.sigma_v,
            sigma_w: 0.5 / self.sigma_w,
            basis: self.basis.dual(),
        }
    }

    /// This state expressed in `basis`.
    pub fn in_basis(&self, basis: Basis) -> TripleGaussianState {
        if self.basis == basis {
            *self
        } else {
            self.fourier_dual()
        }
    }

    fn require_symmetric(&self, what: &str) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{what} has no closed form for sigma_v != sigma_w ({} vs {})",
                self.sigma_v, self.sigma_w
            )))
        }
    }
}

/// Rotation `(x1, x2, x3) → (x_u, x_v, x_w)`.
pub fn rotate_to_uvw(x1: f64, x2: f64, x3: f64) -> [f64; 3] {
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let c_v = 2.0 / 6f64.sqrt();
    [
        (x1 + x2 + x3) * inv_sqrt3,
        c_v * (-x1 + 0.5 * (x2 + x3)),
        (x2 - x3) / SQRT_2,
    ]
}

/// Inverse (transpose) of [`rotate_to_uvw`].
pub fn rotate_from_uvw(u: f64, v: f64, w: f64) -> [f64; 3] {
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let inv_sqrt6 = 1.0 / 6f64.sqrt();
    [
        u * inv_sqrt3 - 2.0 * v * inv_sqrt6,
        u * inv_sqrt3 + v * inv_sqrt6 + w / SQRT_2,
        u * inv_sqrt3 + v * inv_sqrt6 - w / SQRT_2,
    ]
}

/// `λ₀` and `1 - λ₀` for a symmetric state, both computed without
/// cancellation.
///
/// `λ₀ = 2 / (1 + q)`, `q = ⅓√(5 + 2(t² + t⁻²))`, with `t = σ_u/σ_v` taken
/// ≥ 1 (the expression is symmetric under `t → 1/t`).
pub fn e3f_lambda0(state: &TripleGaussianState) -> Result<(f64, f64)> {
    state.require_symmetric("exact E3F")?;
    Ok(lambda0_from_ratio(state.sigma_u / state.sigma_v))
}

fn lambda0_from_ratio(ratio: f64) -> (f64, f64) {
    let t = if ratio >= 1.0 { ratio } else { 1.0 / ratio };
    let inv = 1.0 / t;
    // q = t·√(2 + 5/t² + 2/t⁴)/3 avoids overflowing t² for extreme ratios
    let q = t * (2.0 + inv * inv * (5.0 + 2.0 * inv * inv)).sqrt() / 3.0;
    // q - 1 = (q² - 1)/(q + 1) and q² - 1 = 2(t - 1/t)²/9, exact zero at t = 1
    let gap = t - inv;
    let q_minus_1 = 2.0 * gap * gap / (9.0 * (q + 1.0));
    (2.0 / (1.0 + q), q_minus_1 / (q + 1.0))
}

fn e3f_from_lambda(lambda: f64, complement: f64) -> f64 {
    if complement == 0.0 {
        return 0.0;
    }
    let ln_lambda = if complement < 0.5 {
        (-complement).ln_1p()
    } else {
        lambda.ln()
    };
    let ln_complement = if lambda < 0.5 {
        (-lambda).ln_1p()
    } else {
        complement.ln()
    };
    let h2 = -(lambda * ln_lambda + complement * ln_complement) / LN_2;
    h2 / lambda
}

/// Tripartite entanglement of formation of a symmetric triple-Gaussian
/// state, in gebits: `h₂(λ₀)/λ₀`.
pub fn exact_e3f(state: &TripleGaussianState) -> Result<f64> {
    let (lambda, complement) = e3f_lambda0(state)?;
    let ratio = state.sigma_u / state.sigma_v;
    if ratio.max(1.0 / ratio) > E3F_ASYMPTOTIC_RATIO {
        // log₂(1/λ) + 1/ln2 - λ/(2 ln2) + O(λ²)
        return Ok(-lambda.log2() + (1.0 - 0.5 * lambda) / LN_2);
    }
    Ok(e3f_from_lambda(lambda, complement))
}

/// Standard deviations of the sum and difference of two parties' positions
/// and wavenumbers (the marginal of any two photons is a double Gaussian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    /// `σ(x_B + x_C)`, meters.
    pub sd_x_sum: f64,
    /// `σ(x_B - x_C)`, meters.
    pub sd_x_diff: f64,
    /// `σ(k_B + k_C)`, rad/m.
    pub sd_k_sum: f64,
    /// `σ(k_B - k_C)`, rad/m.
    pub sd_k_diff: f64,
}

pub fn pair_statistics(state: &TripleGaussianState) -> Result<PairStatistics> {
    state.require_symmetric("pair statistics")?;
    let s = state.in_basis(Basis::Position);
    let (su2, sv2) = (s.sigma_u * s.sigma_u, s.sigma_v * s.sigma_v);
    Ok(PairStatistics {
        sd_x_sum: ((4.0 * su2 + 2.0 * sv2) / 3.0).sqrt(),
        sd_x_diff: s.sigma_v * SQRT_2,
        sd_k_sum: (1.0 / (3.0 * su2) + 1.0 / (6.0 * sv2)).sqrt(),
        sd_k_diff: 1.0 / (s.sigma_v * SQRT_2),
    })
}

/// Right-hand side of the Mancini separability criterion for two photons of
/// the triplet, in bits. Positive values witness two-party inseparability;
/// the value is capped at `-½ log₂(⅓) ≈ 0.79248`.
pub fn mancini_bound(state: &TripleGaussianState) -> Result<f64> {
    state.require_symmetric("the Mancini bound")?;
    let s = state.in_basis(Basis::Position);
    let r2 = (s.sigma_u / s.sigma_v).powi(2);
    let first = -0.5 * (2.0 / (3.0 * r2) + 1.0 / 3.0).log2();
    let second = -0.5 * (2.0 * r2 / 3.0 + 1.0 / 3.0).log2();
    // + 0.0 turns the -0.0 of the separable case into 0.0
    Ok(first.max(second) + 0.0)
}

/// Triphoton birth zone `(4/3)·σ(x1 - (x2 + x3)/2) = (4/3)√(3/2)·σ_v`, meters.
pub fn birth_zone(state: &TripleGaussianState) -> Result<f64> {
    state.require_symmetric("the birth zone")?;
    let s = state.in_basis(Basis::Position);
    Ok(4.0 / 3.0 * 1.5f64.sqrt() * s.sigma_v)
}

/// Monte Carlo triplets, in meters (position) or rad/m (momentum).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub basis: Basis,
    pub points: Vec<[f64; 3]>,
}

impl SampleSet {
    pub fn new(basis: Basis, points: Vec<[f64; 3]>) -> Self {
        Self { basis, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `c₁·p₁ + c₂·p₂ + c₃·p₃` for every triplet.
    ///
    /// The three terms are added in sorted order, so relabeling the parties
    /// consistently in points and coefficients gives bit-identical results.
    pub fn project(&self, coeffs: &[f64; 3]) -> Vec<f64> {
        self.points.iter().map(|p| dot3(coeffs, p)).collect()
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let mut t = [a[0] * b[0], a[1] * b[1], a[2] * b[2]];
    t.sort_by(f64::total_cmp);
    (t[0] + t[1]) + t[2]
}

/// Draws `n` i.i.d. triplets from the state's probability density, in the
/// state's own basis.
///
/// Independent Gaussians are drawn in `(u, v, w)` and rotated back. Work is
/// split into fixed-size chunks with one RNG substream each, so the output
/// is identical for a given seed regardless of thread count.
pub fn sample_triplets(state: &TripleGaussianState, n: usize, seed: u64) -> Result<SampleSet> {
    sample_triplets_from_stream(state, n, seed, 0)
}

/// As [`sample_triplets`], with chunk substreams numbered from `first_stream`.
pub(crate) fn sample_triplets_from_stream(
    state: &TripleGaussianState,
    n: usize,
    seed: u64,
    first_stream: u64,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Usage("cannot draw zero samples".into()));
    }
    let [su, sv, sw] = state.widths();
    let chunks = n.div_ceil(CHUNK);
    let points: Vec<[f64; 3]> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = substream(seed, first_stream + chunk as u64);
            let len = CHUNK.min(n - chunk * CHUNK);
            (0..len)
                .map(move |_| {
                    let u: f64 = rng.sample::<f64, _>(StandardNormal) * su;
                    let v: f64 = rng.sample::<f64, _>(StandardNormal) * sv;
                    let w: f64 = rng.sample::<f64, _>(StandardNormal) * sw;
                    rotate_from_uvw(u, v, w)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SampleSet::new(state.basis, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn rotation_examples() {
        let [u, v, w] = rotate_to_uvw(1.0, 1.0, 1.0);
        assert!(close(u, 3f64.sqrt(), 1e-15) && v.abs() < 1e-15 && w.abs() < 1e-15);
        let [u, v, w] = rotate_to_uvw(1.0, 0.0, 0.0);
        assert!(close(u, 1.0 / 3f64.sqrt(), 1e-15));
        assert!(close(v, -2.0 / 6f64.sqrt(), 1e-15));
        assert_eq!(w, 0.0);
    }

    #[test]
    fn rotation_round_trip() {
        let x = [0.3, -1.7, 2.25];
        let [u, v, w] = rotate_to_uvw(x[0], x[1], x[2]);
        let back = rotate_from_uvw(u, v, w);
        for i in 0..3 {
            assert!((back[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn e3f_examples() {
        let sep = TripleGaussianState::symmetric(1.0, 1.0).unwrap();
        assert_eq!(exact_e3f(&sep).unwrap(), 0.0);
        assert_eq!(e3f_lambda0(&sep).unwrap(), (1.0, 0.0));

        // mpmath (50 digits): λ₀ = 0.34644993806360784785, E₃F = 2.6868456969179180743
        let s = TripleGaussianState::symmetric(10.0, 1.0).unwrap();
        let (lambda, _) = e3f_lambda0(&s).unwrap();
        assert!(close(lambda, 0.346_449_938_063_607_85, 1e-14));
        assert!(close(exact_e3f(&s).unwrap(), 2.686_845_696_917_918, 1e-13));
        let inverse = TripleGaussianState::symmetric(1.0, 10.0).unwrap();
        assert_eq!(exact_e3f(&inverse).unwrap(), exact_e3f(&s).unwrap());
    }

    #[test]
    fn e3f_high_precision_table() {
        // (ratio, E₃F) from mpmath evaluation of h₂(λ₀)/λ₀ (50 digits; 300 for 1e100)
        let table = [
            (1.001, 5.227_135_388_905_642e-6),
            (2.0, 0.525_286_987_420_630_1),
            (50.0, 5.001_877_222_813_032),
            (100.0, 6.001_660_861_809_633),
            (1e3, 9.323_517_546_177_126),
            (1e6, 19.289_301_109_492_703),
            (1e8, 25.933_157_299_266_706),
            (1.000_000_1e8, 25.933_157_443_536_203),
            (1e12, 39.220_869_678_816_155),
            (1e100, 331.550_542_028_904_04),
        ];
        for (ratio, expected) in table {
            let s = TripleGaussianState::symmetric(ratio, 1.0).unwrap();
            let got = exact_e3f(&s).unwrap();
            assert!(close(got, expected, 1e-12), "ratio {ratio}: {got} vs {expected}");
        }
    }

    #[test]
    fn asymptotic_switchover_is_continuous() {
        let below = TripleGaussianState::symmetric(E3F_ASYMPTOTIC_RATIO, 1.0).unwrap();
        let above = TripleGaussianState::symmetric(E3F_ASYMPTOTIC_RATIO * (1.0 + 1e-12), 1.0).unwrap();
        let (l, c) = e3f_lambda0(&above).unwrap();
        let series = exact_e3f(&above).unwrap();
        let direct = e3f_from_lambda(l, c);
        assert!((series - direct).abs() < 1e-13);
        assert!((exact_e3f(&below).unwrap() - series).abs() < 1e-10);
    }

    #[test]
    fn near_separable_ratio_is_tiny_and_positive() {
        let s = TripleGaussianState::symmetric(1.000_000_001, 1.0).unwrap();
        let v = exact_e3f(&s).unwrap();
        // mpmath: 1.4090516819630926e-17
        assert!(v > 0.0 && close(v, 1.409_051_681_963_092_6e-17, 1e-6), "{v}");
    }

    #[test]
    fn asymmetric_states_rejected() {
        let s = TripleGaussianState::new(1.0, 0.1, 0.2).unwrap();
        assert!(matches!(exact_e3f(&s), Err(Error::Unsupported(_))));
        assert!(pair_statistics(&s).is_err());
        assert!(mancini_bound(&s).is_err());
        assert!(birth_zone(&s).is_err());
    }

    #[test]
    fn invalid_widths_rejected() {
        assert!(TripleGaussianState::new(0.0, 1.0, 1.0).is_err());
        assert!(TripleGaussianState::new(1.0, -1.0, 1.0).is_err());
        assert!(TripleGaussianState::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn pair_statistics_examples() {
        let s = TripleGaussianState::symmetric(2.0, 2.0).unwrap();
        let p = pair_statistics(&s).unwrap();
        assert!(close(p.sd_x_sum, 2.0 * SQRT_2, 1e-15));
        assert!(close(p.sd_x_diff, 2.0 * SQRT_2, 1e-15));

        let s = TripleGaussianState::symmetric(1.0, 0.1).unwrap();
        let p = pair_statistics(&s).unwrap();
        assert!(close(p.sd_x_diff, 0.141_421_356_237_309_5, 1e-15));
        assert!(close(p.sd_x_diff * p.sd_k_diff, 1.0, 1e-15));
    }

    #[test]
    fn mancini_examples() {
        let s = TripleGaussianState::symmetric(3.0, 3.0).unwrap();
        assert!(mancini_bound(&s).unwrap().abs() < 1e-15);
        let cap = -0.5 * (1.0f64 / 3.0).log2();
        let s = TripleGaussianState::symmetric(1000.0, 1.0).unwrap();
        let m = mancini_bound(&s).unwrap();
        assert!(m < cap && cap - m < 1e-3, "{m}");
    }

    #[test]
    fn mancini_matches_pair_statistics() {
        for ratio in [0.01, 0.3, 1.7, 25.0] {
            let s = TripleGaussianState::symmetric(ratio, 1.0).unwrap();
            let p = pair_statistics(&s).unwrap();
            let via_stats = (-(p.sd_x_diff * p.sd_k_sum).log2()).max(-(p.sd_x_sum * p.sd_k_diff).log2());
            assert!((mancini_bound(&s).unwrap() - via_stats).abs() < 1e-13);
        }
    }

    #[test]
    fn fourier_dual_examples() {
        let s = TripleGaussianState::new(0.5, 1e-3, 2.0).unwrap();
        let k = s.fourier_dual();
        assert_eq!(k.basis, Basis::Momentum);
        assert_eq!(k.sigma_u, 1.0);
        assert!(close(k.sigma_v, 500.0, 1e-15));
        let back = k.fourier_dual();
        for (a, b) in back.widths().iter().zip(s.widths()) {
            assert!(close(*a, b, 1e-12));
        }
        assert_eq!(back.basis, Basis::Position);
    }

    #[test]
    fn birth_zone_examples() {
        let s = TripleGaussianState::symmetric(5.0, 1.0).unwrap();
        assert!(close(birth_zone(&s).unwrap(), 1.632_993_161_855_452, 1e-15));
        let scaled = TripleGaussianState::symmetric(15.0, 3.0).unwrap();
        assert!(close(birth_zone(&scaled).unwrap(), 3.0 * birth_zone(&s).unwrap(), 1e-15));
        // √(4/3)·σ(x1 - x2) with σ(x1 - x2)² = (3/2)σ_v² + ½σ_w² = 2σ_v²
        let via_pair = (4.0f64 / 3.0).sqrt() * (2.0f64).sqrt() * 1.0;
        assert!(close(birth_zone(&s).unwrap(), via_pair, 1e-9));
    }

    #[test]
    fn momentum_state_quantities_use_position_widths() {
        let s = TripleGaussianState::symmetric(4.0, 0.5).unwrap();
        let k = s.fourier_dual();
        assert_eq!(exact_e3f(&k).unwrap(), exact_e3f(&s).unwrap());
        assert_eq!(pair_statistics(&k).unwrap(), pair_statistics(&s).unwrap());
        assert_eq!(birth_zone(&k).unwrap(), birth_zone(&s).unwrap());
    }

    #[test]
    fn sampling_is_deterministic_and_rejects_zero() {
        let s = TripleGaussianState::symmetric(1.0, 0.1).unwrap();
        let a = sample_triplets(&s, 200_000, 9).unwrap();
        let b = sample_triplets(&s, 200_000, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_triplets(&s, 200_000, 10).unwrap();
        assert_ne!(a.points[0], c.points[0]);
        assert!(matches!(sample_triplets(&s, 0, 1), Err(Error::Usage(_))));
        // a shorter draw is a prefix of a longer one with the same seed
        let short = sample_triplets(&s, 1000, 9).unwrap();
        assert_eq!(short.points[..], a.points[..1000]);
    }
}
