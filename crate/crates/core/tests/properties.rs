use proptest::prelude::*;
use triphoton_core::entropy::{
    binary_entropy, conditional_entropy, differential_entropy_from_histogram,
    mutual_information, shannon_entropy, DiscretePmf, Histogram1D,
};
use triphoton_core::spdc::{
    closed_form_witness, gaussian_fit_widths, pump_wavenumber, triplet_rate, SpdcConfig,
};
use triphoton_core::triple_gaussian::{
    exact_e3f, mancini_bound, pair_statistics, rotate_to_uvw, TripleGaussianState,
};
use triphoton_core::witness::{
    analytic_witness, continuous_witness, discrete_witness, DiscreteWitnessInput,
    WitnessCoefficients,
};

fn pmf3() -> impl Strategy<Value = DiscretePmf> {
    (2usize..4, 2usize..4, 2usize..4).prop_flat_map(|(a, b, c)| {
        prop::collection::vec(0.001f64..1.0, a * b * c).prop_map(move |w| {
            let t: f64 = w.iter().sum();
            DiscretePmf::new(w.iter().map(|v| v / t).collect(), vec![a, b, c]).unwrap()
        })
    })
}

fn base_config() -> SpdcConfig {
    SpdcConfig {
        lambda_p: 516.67e-9,
        l_z: 3e-3,
        sigma_p: 1e-4,
        n_p: 1.0,
        n_1: 1.444,
        n_2: 1.444,
        n_3: 1.444,
        ng_p: 1.487,
        ng_1: 1.463,
        ng_2: 1.463,
        ng_3: 1.463,
        chi3_eff: 1.8e-22,
        kappa0: 2.8e-26,
        qpm_order: None,
        pump_power: 0.1,
        qpm_period: None,
    }
}

proptest! {
    #[test]
    fn entropy_bounds(p in pmf3()) {
        let h = shannon_entropy(&p);
        let n: usize = p.shape().iter().product();
        prop_assert!(h >= 0.0 && h <= (n as f64).log2() + 1e-12);
        for axis in 0..3 {
            let c = conditional_entropy(&p, axis).unwrap();
            let m = shannon_entropy(&p.marginal(&[axis]).unwrap());
            prop_assert!(c >= 0.0 && c <= m + 1e-9);
        }
    }

    #[test]
    fn chain_rule(p in pmf3()) {
        let h_a = shannon_entropy(&p.marginal(&[0]).unwrap());
        let h_b_a = conditional_entropy(&p.marginal(&[0, 1]).unwrap(), 1).unwrap();
        let h_c_ab = conditional_entropy(&p, 2).unwrap();
        prop_assert!((shannon_entropy(&p) - h_a - h_b_a - h_c_ab).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_nonnegative_and_symmetric(p in pmf3()) {
        let ab = p.marginal(&[0, 1]).unwrap();
        let ba = p.marginal(&[1, 0]).unwrap();
        let i_ab = mutual_information(&ab).unwrap();
        prop_assert!(i_ab >= 0.0);
        prop_assert!((i_ab - mutual_information(&ba).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn binary_entropy_symmetric(l in 0.0f64..=1.0) {
        let a = binary_entropy(l).unwrap();
        prop_assert!((a - binary_entropy(1.0 - l).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn coarsening_never_lowers_entropy(values in prop::collection::vec(-100.0f64..100.0, 1..500), w in 0.01f64..10.0) {
        let h = Histogram1D::from_values(&values, w).unwrap();
        let fine = differential_entropy_from_histogram(&h).unwrap();
        let coarse = differential_entropy_from_histogram(&h.coarsen()).unwrap();
        prop_assert!(coarse >= fine - 1e-12);
    }

    #[test]
    fn rotation_preserves_norm(v in prop::array::uniform3(-1e6f64..1e6)) {
        let r = rotate_to_uvw(v[0], v[1], v[2]);
        let n0 = v.iter().map(|x| x * x).sum::<f64>();
        let n1 = r.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((n0 - n1).abs() <= 1e-12 * n0.max(1.0));
    }

    #[test]
    fn e3f_monotone_in_log_ratio(a in -8.0f64..8.0, b in -8.0f64..8.0) {
        let e = |x: f64| exact_e3f(&TripleGaussianState::symmetric(10f64.powf(x), 1.0).unwrap()).unwrap();
        let (ea, eb) = (e(a), e(b));
        prop_assert!(ea >= 0.0 && eb >= 0.0);
        if a.abs() <= b.abs() {
            prop_assert!(ea <= eb + 1e-12);
        }
        prop_assert!((e(a) - e(-a)).abs() <= 1e-9 * e(a).max(1.0));
    }

    #[test]
    fn mancini_capped(x in -10.0f64..10.0) {
        let s = TripleGaussianState::symmetric(10f64.powf(x), 1.0).unwrap();
        prop_assert!(mancini_bound(&s).unwrap() <= 0.79249);
    }

    #[test]
    fn uncertainty_product_is_one(u in -6.0f64..6.0, v in -6.0f64..6.0) {
        let s = TripleGaussianState::symmetric(10f64.powf(u), 10f64.powf(v)).unwrap();
        let p = pair_statistics(&s).unwrap();
        prop_assert!((p.sd_x_diff * p.sd_k_diff - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_witness_is_conservative(sp in -8.0f64..0.0, lz in -4.0f64..0.0, np in 1.0f64..2.5) {
        let c = SpdcConfig { sigma_p: 10f64.powf(sp), l_z: 10f64.powf(lz), n_p: np, ..base_config() };
        let exact = exact_e3f(&gaussian_fit_widths(&c).unwrap()).unwrap();
        prop_assert!(closed_form_witness(&c) <= exact + 1e-9);
    }

    #[test]
    fn fit_ratio_formula(sp in -8.0f64..-1.0) {
        let c = base_config().with_sigma_p(10f64.powf(sp));
        let x = gaussian_fit_widths(&c).unwrap().fourier_dual();
        let expected = 4.0 + 4.5 * c.sigma_p.powi(2) * pump_wavenumber(&c) / c.l_z;
        prop_assert!(((x.sigma_u / x.sigma_v).powi(2) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_scaling(p in 0.001f64..10.0, l in 1e-4f64..1.0, k in 0.5f64..4.0) {
        let c = SpdcConfig { pump_power: p, l_z: l, ..base_config() };
        let r = triplet_rate(&c).unwrap();
        let scaled = SpdcConfig { pump_power: k * p, l_z: k * l, sigma_p: k * c.sigma_p, ..c.clone() };
        prop_assert!((triplet_rate(&scaled).unwrap() / r - 1.0 / (k * k)).abs() < 1e-12 / (k * k));
    }

    #[test]
    fn gaussian_witness_below_exact(x in -3.0f64..3.0) {
        let s = TripleGaussianState::symmetric(10f64.powf(x), 1.0).unwrap();
        let w = analytic_witness(&s, &WitnessCoefficients::spdc_default()).unwrap();
        prop_assert!(w <= exact_e3f(&s).unwrap() + 1e-9);
    }

    #[test]
    fn witness_eta_scaling_neutral(c in 0.01f64..100.0, hx in -5.0f64..5.0, hk in -5.0f64..5.0) {
        let base = WitnessCoefficients::new([1.0, -0.5, -0.5], [1.0, 1.0, 1.0]).unwrap();
        let scaled = WitnessCoefficients::new([c, -0.5 * c, -0.5 * c], [1.0, 1.0, 1.0]).unwrap();
        let w0 = continuous_witness(&base, hx, hk).unwrap();
        let w1 = continuous_witness(&scaled, hx + c.log2(), hk).unwrap();
        prop_assert!((w0 - w1).abs() < 1e-12);
    }

    /// Each party holds its own pure qubit state, measured in Z and in X,
    /// so the statistics respect the uncertainty relation for Ω = 2.
    #[test]
    fn product_states_never_certify(
        theta in prop::array::uniform3(0.0f64..std::f64::consts::PI),
        phi in prop::array::uniform3(0.0f64..std::f64::consts::TAU),
    ) {
        let z: Vec<[f64; 2]> = (0..3).map(|i| [theta[i].cos().powi(2), theta[i].sin().powi(2)]).collect();
        let x: Vec<[f64; 2]> = (0..3)
            .map(|i| {
                let (c, s) = (theta[i].cos(), theta[i].sin());
                let plus = 0.5 * (1.0 + 2.0 * c * s * phi[i].cos());
                [plus, 1.0 - plus]
            })
            .collect();
        let product = |m: &[[f64; 2]]| {
            let mut p = Vec::new();
            for a in 0..2 { for b in 0..2 { for c in 0..2 { p.push(m[0][a] * m[1][b] * m[2][c]); } } }
            DiscretePmf::new(p, vec![2, 2, 2]).unwrap()
        };
        let input = DiscreteWitnessInput::new(product(&z), product(&x), [2.0; 3]).unwrap();
        prop_assert!(discrete_witness(&input).unwrap() <= 1e-9);
    }
}
