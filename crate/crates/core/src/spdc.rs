//! Third-order SPDC modeling: phase matching, the triple-Gaussian fit to
//! the triphoton wavefunction, the closed-form witness bound, and the
//! triplet generation rate.
//!
//! SI units throughout. The pump radius `σ_p` follows the convention that
//! the 1/e² intensity diameter is `4σ_p`.

use crate::error::{Error, Result};
use crate::triple_gaussian::{exact_e3f, Basis, TripleGaussianState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LOG2_E, PI};
use std::fmt::Write as _;
use std::path::Path;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `sin(x)/x`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Pump and medium parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdcConfig {
    /// Pump vacuum wavelength, m.
    pub lambda_p: f64,
    /// Medium length, m.
    #[serde(rename = "L_z")]
    pub l_z: f64,
    /// Pump beam radius, m (1/e² diameter is 4σ_p).
    pub sigma_p: f64,
    pub n_p: f64,
    pub n_1: f64,
    pub n_2: f64,
    pub n_3: f64,
    pub ng_p: f64,
    pub ng_1: f64,
    pub ng_2: f64,
    pub ng_3: f64,
    /// Effective third-order susceptibility, m²/V².
    pub chi3_eff: f64,
    /// Group-velocity dispersion at the daughter central frequency, s²/m.
    pub kappa0: f64,
    /// Quasi-phase-matching order, if the rate should carry its penalty.
    pub qpm_order: Option<u32>,
    /// Pump power, W.
    pub pump_power: f64,
    /// User-supplied QPM period, m. Recorded for provenance only.
    pub qpm_period: Option<f64>,
}

const CONFIG_KEYS: &[&str] = &[
    "lambda_p",
    "L_z",
    "sigma_p",
    "n_p",
    "n_1",
    "n_2",
    "n_3",
    "ng_p",
    "ng_1",
    "ng_2",
    "ng_3",
    "chi3_eff",
    "kappa0",
    "qpm_order",
    "pump_power",
    "qpm_period",
];

impl SpdcConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_p", self.lambda_p),
            ("L_z", self.l_z),
            ("sigma_p", self.sigma_p),
            ("n_p", self.n_p),
            ("n_1", self.n_1),
            ("n_2", self.n_2),
            ("n_3", self.n_3),
            ("ng_p", self.ng_p),
            ("ng_1", self.ng_1),
            ("ng_2", self.ng_2),
            ("ng_3", self.ng_3),
            ("chi3_eff", self.chi3_eff),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !self.kappa0.is_finite() {
            return Err(Error::Config("kappa0 must be finite".into()));
        }
        if !(self.pump_power >= 0.0) || !self.pump_power.is_finite() {
            return Err(Error::Config(format!(
                "pump_power must be non-negative and finite, got {}",
                self.pump_power
            )));
        }
        if self.qpm_order == Some(0) {
            return Err(Error::Config("qpm_order must be at least 1".into()));
        }
        if let Some(period) = self.qpm_period {
            if !(period > 0.0) || !period.is_finite() {
                return Err(Error::Config(format!(
                    "qpm_period must be positive, got {period}"
                )));
            }
        }
        Ok(())
    }

    /// Parses the flat `key = value` format. `#` starts a comment; `none`
    /// clears an optional key. Every non-optional key must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: std::collections::BTreeMap<&str, &str> = Default::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let canonical = CONFIG_KEYS
                .iter()
                .find(|k| k.eq_ignore_ascii_case(key))
                .ok_or_else(|| Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if values.insert(canonical, value.trim()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        let real = |key: &str| -> Result<f64> {
            let v = values
                .get(key)
                .ok_or_else(|| Error::Config(format!("missing key `{key}`")))?;
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}` as a number")))
        };
        let optional = |key: &str| -> Option<&str> {
            values
                .get(key)
                .copied()
                .filter(|v| !v.eq_ignore_ascii_case("none") && !v.is_empty())
        };
        let qpm_order = optional("qpm_order")
            .map(|v| {
                v.parse::<u32>()
                    .map_err(|_| Error::Config(format!("`qpm_order`: cannot parse `{v}`")))
            })
            .transpose()?;
        let qpm_period = optional("qpm_period")
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("`qpm_period`: cannot parse `{v}`")))
            })
            .transpose()?;
        let config = SpdcConfig {
            lambda_p: real("lambda_p")?,
            l_z: real("L_z")?,
            sigma_p: real("sigma_p")?,
            n_p: real("n_p")?,
            n_1: real("n_1")?,
            n_2: real("n_2")?,
            n_3: real("n_3")?,
            ng_p: real("ng_p")?,
            ng_1: real("ng_1")?,
            ng_2: real("ng_2")?,
            ng_3: real("ng_3")?,
            chi3_eff: real("chi3_eff")?,
            kappa0: real("kappa0")?,
            qpm_order,
            pump_power: real("pump_power")?,
            qpm_period,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Serializes back to the `key = value` format with round-trip precision.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let reals = [
            ("lambda_p", self.lambda_p),
            ("L_z", self.l_z),
            ("sigma_p", self.sigma_p),
            ("n_p", self.n_p),
            ("n_1", self.n_1),
            ("n_2", self.n_2),
            ("n_3", self.n_3),
            ("ng_p", self.ng_p),
            ("ng_1", self.ng_1),
            ("ng_2", self.ng_2),
            ("ng_3", self.ng_3),
            ("chi3_eff", self.chi3_eff),
            ("kappa0", self.kappa0),
            ("pump_power", self.pump_power),
        ];
        for (k, v) in reals {
            let _ = writeln!(out, "{k} = {v:e}");
        }
        match self.qpm_order {
            Some(n) => writeln!(out, "qpm_order = {n}"),
            None => writeln!(out, "qpm_order = none"),
        }
        .ok();
        match self.qpm_period {
            Some(p) => writeln!(out, "qpm_period = {p:e}"),
            None => writeln!(out, "qpm_period = none"),
        }
        .ok();
        out
    }

    pub fn with_sigma_p(&self, sigma_p: f64) -> SpdcConfig {
        SpdcConfig {
            sigma_p,
            ..self.clone()
        }
    }
}

/// In-medium pump wavenumber `2π n_p / λ_p`, rad/m.
pub fn pump_wavenumber(c: &SpdcConfig) -> f64 {
    2.0 * PI * c.n_p / c.lambda_p
}

/// Phase-matching geometry: `a = 3 L_z / (4 k_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchGeometry {
    /// m².
    pub a: f64,
    /// rad/m.
    pub k_p: f64,
}

impl PhaseMatchGeometry {
    pub fn new(l_z: f64, k_p: f64) -> Result<Self> {
        if !(l_z > 0.0 && k_p > 0.0) || !l_z.is_finite() || !k_p.is_finite() {
            return Err(Error::Validation(format!(
                "geometry needs positive L_z and k_p, got {l_z} and {k_p}"
            )));
        }
        Ok(Self {
            a: 3.0 * l_z / (4.0 * k_p),
            k_p,
        })
    }

    pub fn from_config(c: &SpdcConfig) -> Result<Self> {
        Self::new(c.l_z, pump_wavenumber(c))
    }
}

/// Relative 1D triphoton momentum amplitude in rotated coordinates,
/// `α_p(√3 k_u) · sinc(a (4k_u² + k_v² + k_w²))`, with the Gaussian pump
/// amplitude `α_p(q) = exp(-σ_p² q²)` normalized to 1 at `q = 0`.
///
/// The amplitude is real: the overall phase and normalization are dropped.
pub fn triphoton_momentum_amplitude(
    g: &PhaseMatchGeometry,
    pump_sigma_p: f64,
    ku: f64,
    kv: f64,
    kw: f64,
) -> f64 {
    let q = 3f64.sqrt() * ku;
    let pump = (-pump_sigma_p * pump_sigma_p * q * q).exp();
    pump * sinc(g.a * (4.0 * ku * ku + kv * kv + kw * kw))
}

/// Triple-Gaussian fit to the triphoton wavefunction, in the momentum basis:
/// `σ_ku² = 1/(4(32a/9 + 3σ_p²))`, `σ_kv² = σ_kw² = 9/(32a)`.
pub fn gaussian_fit_widths(c: &SpdcConfig) -> Result<TripleGaussianState> {
    let g = PhaseMatchGeometry::from_config(c)?;
    let sigma_ku = 0.5 / (32.0 * g.a / 9.0 + 3.0 * c.sigma_p * c.sigma_p).sqrt();
    let sigma_kv = (9.0 / (32.0 * g.a)).sqrt();
    TripleGaussianState::with_basis(sigma_ku, sigma_kv, sigma_kv, Basis::Momentum)
}

/// `log₂(3√2 e)`, the constant offset of the Gaussian witness.
pub fn gaussian_witness_offset_bits() -> f64 {
    (3.0 * 2f64.sqrt()).log2() + LOG2_E
}

/// Closed-form entropic witness for the fitted triple-Gaussian state, in
/// gebits: `½ log₂(16 + 18σ_p²k_p/L_z) - log₂(3√2 e)`. Negative values
/// certify nothing.
pub fn closed_form_witness(c: &SpdcConfig) -> f64 {
    let k_p = pump_wavenumber(c);
    let x = 18.0 * c.sigma_p * c.sigma_p * k_p / c.l_z;
    0.5 * (16.0 + x).log2() - gaussian_witness_offset_bits()
}

/// Large-`σ_p` limit of `closed_form_witness - exact E₃F`: `1 - 2/ln 2`.
pub fn asymptotic_witness_offset() -> f64 {
    1.0 - 2.0 * LOG2_E
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma_p: f64,
    pub witness_gebits: f64,
    pub exact_gebits: f64,
}

/// Evaluates the witness and the exact E₃F of the fitted state on
/// `points` logarithmically spaced pump radii in `[min, max]`.
pub fn witness_sweep(c: &SpdcConfig, min: f64, max: f64, points: usize) -> Result<Vec<SweepRow>> {
    if !(min > 0.0 && min < max && max.is_finite()) {
        return Err(Error::Usage(format!(
            "sweep range must satisfy 0 < min < max, got [{min}, {max}]"
        )));
    }
    if points < 2 {
        return Err(Error::Usage(format!("sweep needs at least 2 points, got {points}")));
    }
    let (lo, hi) = (min.ln(), max.ln());
    (0..points)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            let sigma_p = match i {
                0 => min,
                _ if i == points - 1 => max,
                _ => (lo + t * (hi - lo)).exp(),
            };
            let cfg = c.with_sigma_p(sigma_p);
            Ok(SweepRow {
                sigma_p,
                witness_gebits: closed_form_witness(&cfg),
                exact_gebits: exact_e3f(&gaussian_fit_widths(&cfg)?)?,
            })
        })
        .collect()
}

/// Rate penalty of n-th order quasi-phase matching, `4/(π² n²)`.
pub fn qpm_penalty(order: u32) -> Result<f64> {
    if order < 1 {
        return Err(Error::Usage("QPM order must be at least 1".into()));
    }
    let n = f64::from(order);
    Ok(4.0 / (PI * PI * n * n))
}

/// Rate penalty of phase matching by refractive-index modulation.
///
/// An index modulation `Δn` changes `χ⁽³⁾_eff` by the relative amount
/// `m = sensitivity·Δn`. Only the first Fourier component of that
/// modulation, amplitude `(m/2)·(2/π)`, phase-matches, and the rate goes as
/// its square: `(m/2)²·4/π²`.
pub fn index_modulation_penalty(delta_n: f64, chi3_sensitivity: f64) -> Result<f64> {
    if !(delta_n >= 0.0) || !delta_n.is_finite() || !chi3_sensitivity.is_finite() {
        return Err(Error::Validation(format!(
            "index modulation must be non-negative and finite, got {delta_n}"
        )));
    }
    let m = chi3_sensitivity * delta_n;
    Ok((m / 2.0).powi(2) * 4.0 / (PI * PI))
}

/// Triplet generation rate divided by `L_z·P`, triplets/(s·m·W), before any
/// QPM penalty.
pub fn rate_per_length_power(c: &SpdcConfig) -> Result<f64> {
    if c.kappa0 == 0.0 {
        return Err(Error::Domain(
            "kappa0 = 0: the triplet rate diverges without dispersion".into(),
        ));
    }
    let omega_p = 2.0 * PI * SPEED_OF_LIGHT / c.lambda_p;
    let c4 = SPEED_OF_LIGHT.powi(4);
    let prefactor = HBAR / (2592.0 * 3f64.sqrt() * PI * PI * EPSILON_0 * EPSILON_0 * c4);
    let index_ratio = (c.ng_1 * c.ng_2 * c.ng_3 * c.ng_p)
        / (c.n_p * c.n_1 * c.n_2 * c.n_3).powi(2);
    let nonlinear = c.chi3_eff * c.chi3_eff * omega_p.powi(3) / c.kappa0.abs();
    Ok(prefactor * index_ratio * nonlinear / c.sigma_p.powi(4))
}

/// Mean triplet generation rate, triplets/s, including the QPM penalty when
/// `qpm_order` is set.
pub fn triplet_rate(c: &SpdcConfig) -> Result<f64> {
    let base = rate_per_length_power(c)? * c.l_z * c.pump_power;
    match c.qpm_order {
        Some(order) => Ok(base * qpm_penalty(order)?),
        None => Ok(base),
    }
}

/// Gaussian pump spectral amplitude `s(δω_p) = exp(-δω_p²/(4σ_ω²))`, where
/// `σ_ω` (rad/s) is the standard deviation of the spectral intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpectrum {
    pub sigma_omega: f64,
}

impl PumpSpectrum {
    pub fn amplitude(&self, delta_omega_p: f64) -> f64 {
        (-delta_omega_p * delta_omega_p / (4.0 * self.sigma_omega * self.sigma_omega)).exp()
    }
}

/// Longitudinal mismatch `Δk_z ≈ (κ₀/2)(δω_v² + δω_w²)`, rad/m.
pub fn longitudinal_mismatch(c: &SpdcConfig, dw_v: f64, dw_w: f64) -> f64 {
    0.5 * c.kappa0.abs() * (dw_v * dw_v + dw_w * dw_w)
}

/// Phase-matching overlap of zero-order Gaussian modes with daughter radii
/// `σ_p√3`: `L_z/(√108 π σ_p²) · sinc(Δk_z L_z/2)`.
pub fn phase_matching_overlap(c: &SpdcConfig, delta_kz: f64) -> f64 {
    c.l_z / (108f64.sqrt() * PI * c.sigma_p * c.sigma_p) * sinc(0.5 * delta_kz * c.l_z)
}

/// Relative joint spectral amplitude in rotated detuning coordinates (rad/s):
/// `s(√3 δω_u) · sinc((κ₀ L_z/4)(δω_v² + δω_w²))`.
pub fn joint_spectral_amplitude(
    c: &SpdcConfig,
    pump: &PumpSpectrum,
    dw_u: f64,
    dw_v: f64,
    dw_w: f64,
) -> f64 {
    pump.amplitude(3f64.sqrt() * dw_u)
        * sinc(0.25 * c.kappa0.abs() * c.l_z * (dw_v * dw_v + dw_w * dw_w))
}
