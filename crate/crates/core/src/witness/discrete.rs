use crate::entropy::{conditional_entropy, DiscretePmf};
use crate::error::{Error, Result};

/// Measured statistics of two observables per party, `Q` and `R`, on a
/// three-party system.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWitnessInput {
    pmf_q: DiscretePmf,
    pmf_r: DiscretePmf,
    omega: [f64; 3],
    d_max: usize,
}

impl DiscreteWitnessInput {
    /// `omega[i]` is `min_{j,k} 1/|⟨q_j|r_k⟩|²` for party `i`, declared by
    /// the caller; it lies between 1 and that party's dimension.
    pub fn new(pmf_q: DiscretePmf, pmf_r: DiscretePmf, omega: [f64; 3]) -> Result<Self> {
        if pmf_q.num_axes() != 3 || pmf_r.num_axes() != 3 {
            return Err(Error::Validation(
                "discrete witness needs 3-axis distributions for both observables".into(),
            ));
        }
        if pmf_q.shape() != pmf_r.shape() {
            return Err(Error::Validation(format!(
                "Q and R distributions disagree on party dimensions: {:?} vs {:?}",
                pmf_q.shape(),
                pmf_r.shape()
            )));
        }
        for (i, &w) in omega.iter().enumerate() {
            let dim = pmf_q.shape()[i] as f64;
            if !(w >= 1.0 && w <= dim * (1.0 + 1e-12)) {
                return Err(Error::Validation(format!(
                    "omega[{i}] = {w} must lie in [1, {dim}]"
                )));
            }
        }
        let d_max = *pmf_q.shape().iter().max().expect("three axes");
        Ok(Self {
            pmf_q,
            pmf_r,
            omega,
            d_max,
        })
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn omega(&self) -> [f64; 3] {
        self.omega
    }
}

/// `Σᵢ [log₂ Ωᵢ - H(Qᵢ|Q_jk) - H(Rᵢ|R_jk)] - 2 log₂ D_max`, in gebits.
pub fn discrete_witness(input: &DiscreteWitnessInput) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..3 {
        total += input.omega[i].log2()
            - conditional_entropy(&input.pmf_q, i)?
            - conditional_entropy(&input.pmf_r, i)?;
    }
    Ok(total - 2.0 * (input.d_max as f64).log2())
}
