//! Numerical check of `H(Q_A:Q_B) ≤ E_F(AB) + min{S(AB), S(A), S(B)}` on
//! random bipartite pure states.

use crate::entropy::{mutual_information, DiscretePmf};
use crate::error::{Error, Result};
use crate::rng::substream;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Violations at or below this size are attributed to round-off.
pub const RELATION_TOLERANCE: f64 = 1e-9;

fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary: QR of a complex Gaussian matrix, with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let qr = complex_gaussian(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Unitarily invariant random pure state on `dim × dim`, as the coefficient
/// matrix `M[a, b] = ⟨a b|ψ⟩`.
pub fn random_pure_state<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let m = complex_gaussian(rng, dim, dim);
    let norm = m.norm();
    m / Complex64::new(norm, 0.0)
}

/// Terms of the relation for one pure state and one pair of local bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTerms {
    pub mutual_information: f64,
    /// `S(A) = S(B) = E_F(AB)` for a pure joint state.
    pub entanglement_entropy: f64,
    /// `H(Q_A:Q_B) - E_F - min{S(AB), S(A), S(B)}`; `S(AB) = 0`.
    pub slack: f64,
}

/// Evaluates the relation for state `m` measured in the columns of `basis_a`
/// and `basis_b`.
pub fn correlation_terms(
    m: &DMatrix<Complex64>,
    basis_a: &DMatrix<Complex64>,
    basis_b: &DMatrix<Complex64>,
) -> Result<CorrelationTerms> {
    let (da, db) = m.shape();
    if basis_a.shape() != (da, da) || basis_b.shape() != (db, db) {
        return Err(Error::Validation("basis dimensions do not match the state".into()));
    }
    let norm2 = m.norm_squared();
    if !(norm2 > 0.0) {
        return Err(Error::Validation("state vector is zero".into()));
    }
    let m = m / Complex64::new(norm2.sqrt(), 0.0);
    // ⟨e_i f_j|ψ⟩ = (U_A† M conj(U_B))_{ij}
    let amps = basis_a.adjoint() * &m * basis_b.conjugate();
    let probs: Vec<f64> = (0..da)
        .flat_map(|i| (0..db).map(move |j| (i, j)))
        .map(|(i, j)| amps[(i, j)].norm_sqr())
        .collect();
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
    let mi = mutual_information(&DiscretePmf::new(probs, vec![da, db])?)?;

    let rho_a = &m * m.adjoint();
    let eig = rho_a.symmetric_eigen();
    let s_a: f64 = eig
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    let s_ab = 0.0f64;
    let min_term = s_ab.min(s_a);
    Ok(CorrelationTerms {
        mutual_information: mi,
        entanglement_entropy: s_a,
        slack: mi - s_a - min_term,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest slack over all trials; positive values above the tolerance
    /// would contradict the relation.
    pub max_violation: f64,
    pub violations_above_tolerance: usize,
    pub tolerance: f64,
    pub mean_mutual_information: f64,
    pub mean_entanglement_entropy: f64,
}

/// Random pure states of local dimension `dim`, each measured in an
/// independent pair of Haar-random local bases.
pub fn verify_correlation_relation(dim: usize, trials: usize, seed: u64) -> Result<CorrelationReport> {
    if !(2..=8).contains(&dim) {
        return Err(Error::Usage(format!("dimension must be in 2..=8, got {dim}")));
    }
    if trials == 0 {
        return Err(Error::Usage("at least one trial is required".into()));
    }
    let terms: Vec<CorrelationTerms> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let m = random_pure_state(&mut rng, dim);
            let ua = haar_unitary(&mut rng, dim);
            let ub = haar_unitary(&mut rng, dim);
            correlation_terms(&m, &ua, &ub)
        })
        .collect::<Result<_>>()?;
    let n = trials as f64;
    Ok(CorrelationReport {
        dim,
        trials,
        seed,
        max_violation: terms.iter().map(|t| t.slack).fold(f64::NEG_INFINITY, f64::max),
        violations_above_tolerance: terms.iter().filter(|t| t.slack > RELATION_TOLERANCE).count(),
        tolerance: RELATION_TOLERANCE,
        mean_mutual_information: terms.iter().map(|t| t.mutual_information).sum::<f64>() / n,
        mean_entanglement_entropy: terms.iter().map(|t| t.entanglement_entropy).sum::<f64>() / n,
    })
}
