//! Ohmic-bath coefficient engine for the secular QBM family.
//!
//! The bath has spectral density `J(ω) = ω·e^{-ω/ω_c}` with an exponential
//! cutoff. Everything is expressed in reduced units: frequencies in units of
//! ω_c, times as the dimensionless τ = ω_c·t, and the system frequency fixed
//! by the cutoff ratio `x = ω_c/ω₀` as ω₀ = 1/x. The coupling strength α²
//! multiplies the spectral density as a whole.
//!
//! To second order in the coupling the damping and diffusion coefficients are
//! built from the dissipation and noise kernels,
//!
//! ```text
//! μ(s) = α² ∫₀^∞ J(ω) sin(ωs) dω            = α² · 2s/(1+s²)²
//! κ(s) = α² ∫₀^∞ J(ω) c(ω,T) cos(ωs) dω
//! γ(τ) = ∫₀^τ μ(s) sin(ω₀ s) ds
//! Δ(τ) = ∫₀^τ κ(s) cos(ω₀ s) ds
//! ```
//!
//! where the thermal factor is `c = coth(ω/2T)` on the exact/low-temperature
//! path (reducing to `c = 1` at T = 0) and its first-order expansion
//! `c = 2T/ω` on the high-temperature path, which gives the closed form
//! `κ(s) = α²·2T/(1+s²)`. The frequency integral for μ and the
//! high-temperature κ are evaluated from those closed forms; the
//! low-temperature κ is computed by adaptive quadrature and cached on a dense
//! `s`-grid. The overall normalization of the coefficients is fixed by these
//! kernels; the divisibility structure (sign changes, window locations,
//! asymptotic Markovianity) is what the engine pins down.

use std::sync::Arc;

use super::qbm::{qbm_family_with_table, QbmModel};
use super::ModelError;
use crate::divisibility::ChannelFamily;
use crate::quad::{adaptive_quad_segmented, CubicInterp};

/// Frequency cutoff of the ω-quadrature; the integrand carries `e^{-ω}`, so
/// the truncated tail is below 1e-24 of the total.
const OMEGA_MAX: f64 = 60.0;

/// Thermal regimes of the bundled bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemperatureRegime {
    /// `c(ω,T) = 2T/ω`: first-order expansion of coth, closed-form kernel.
    High,
    /// `c(ω,T) = coth(ω/2T)` by quadrature; T = 0 gives the vacuum limit c = 1.
    Low,
}

/// Ohmic bath with exponential cutoff, in reduced (ω_c = 1) units.
#[derive(Debug, Clone, Copy)]
pub struct OhmicBath {
    coupling: f64,
    x: f64,
    regime: TemperatureRegime,
    temperature: f64,
}

impl OhmicBath {
    pub fn new(
        coupling: f64,
        x: f64,
        regime: TemperatureRegime,
        temperature: f64,
    ) -> Result<Self, ModelError> {
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(ModelError::BadParameter(format!("coupling must be positive, got {coupling}")));
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(ModelError::BadParameter(format!("cutoff ratio x must be positive, got {x}")));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(ModelError::BadParameter(format!("temperature must be non-negative, got {temperature}")));
        }
        if regime == TemperatureRegime::High && temperature == 0.0 {
            return Err(ModelError::BadParameter(
                "the high-temperature regime needs a positive temperature".into(),
            ));
        }
        Ok(Self { coupling, x, regime, temperature })
    }

    /// Bundled high-temperature bath: α² = 0.01, T = 100 (units of ω_c).
    pub fn high_temperature(x: f64) -> Self {
        Self::new(0.01, x, TemperatureRegime::High, 100.0).expect("valid bundled parameters")
    }

    /// Bundled low-temperature bath: α² = 0.01 at the T = 0 limit.
    pub fn low_temperature(x: f64) -> Self {
        Self::new(0.01, x, TemperatureRegime::Low, 0.0).expect("valid bundled parameters")
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn regime(&self) -> TemperatureRegime {
        self.regime
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// System frequency in reduced units, ω₀ = ω_c/x = 1/x.
    pub fn omega0(&self) -> f64 {
        1.0 / self.x
    }
}

/// The six demonstration regimes bundled with the crate: high temperature at
/// x ∈ {0.1, 0.2, 0.3} and low temperature at x ∈ {0.2, 1.0, 2.0}.
pub fn bundled_regimes() -> Vec<OhmicBath> {
    vec![
        OhmicBath::high_temperature(0.1),
        OhmicBath::high_temperature(0.2),
        OhmicBath::high_temperature(0.3),
        OhmicBath::low_temperature(0.2),
        OhmicBath::low_temperature(1.0),
        OhmicBath::low_temperature(2.0),
    ]
}

/// Dissipation kernel μ(s) = α² ∫ J(ω) sin(ωs) dω = α²·2s/(1+s²)².
pub(crate) fn dissipation_kernel(coupling: f64, s: f64) -> f64 {
    let d = 1.0 + s * s;
    coupling * 2.0 * s / (d * d)
}

/// High-temperature noise kernel κ(s) = α²·2T/(1+s²).
fn noise_kernel_high(coupling: f64, temperature: f64, s: f64) -> f64 {
    coupling * 2.0 * temperature / (1.0 + s * s)
}

/// `ω·c(ω,T)` with the coth pole at ω → 0 handled by series.
fn thermal_weight(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return omega;
    }
    let z = omega / (2.0 * temperature);
    if z < 1e-4 {
        2.0 * temperature + omega * omega / (6.0 * temperature)
    } else {
        omega / z.tanh()
    }
}

/// Exact/low-temperature noise kernel by adaptive ω-quadrature.
fn noise_kernel_low_quad(coupling: f64, temperature: f64, s: f64) -> Result<f64, ModelError> {
    let segments = (OMEGA_MAX * s / (2.0 * std::f64::consts::PI)).ceil() as usize + 1;
    let tol = 1e-11 * (coupling * (1.0 + 2.0 * temperature)).max(1e-3);
    let value = adaptive_quad_segmented(
        &|omega: f64| thermal_weight(omega, temperature) * (-omega).exp() * (omega * s).cos(),
        0.0,
        OMEGA_MAX,
        tol,
        segments,
    )?;
    Ok(coupling * value)
}

/// Direct ω-quadrature of the dissipation kernel; the oracle against which
/// the closed form is checked in tests.
#[doc(hidden)]
pub fn dissipation_kernel_quad(coupling: f64, s: f64) -> Result<f64, ModelError> {
    let segments = (OMEGA_MAX * s / (2.0 * std::f64::consts::PI)).ceil() as usize + 1;
    let value = adaptive_quad_segmented(
        &|omega: f64| omega * (-omega).exp() * (omega * s).sin(),
        0.0,
        OMEGA_MAX,
        1e-12,
        segments,
    )?;
    Ok(coupling * value)
}

/// Direct ω-quadrature of the high-temperature noise kernel (test oracle).
#[doc(hidden)]
pub fn noise_kernel_high_quad(coupling: f64, temperature: f64, s: f64) -> Result<f64, ModelError> {
    let segments = (OMEGA_MAX * s / (2.0 * std::f64::consts::PI)).ceil() as usize + 1;
    let value = adaptive_quad_segmented(
        &|omega: f64| 2.0 * temperature * (-omega).exp() * (omega * s).cos(),
        0.0,
        OMEGA_MAX,
        1e-11 * temperature.max(1.0),
        segments,
    )?;
    Ok(coupling * value)
}

/// Noise kernel evaluator: closed form in the high-T regime, cached
/// quadrature in the low-T regime.
enum NoiseKernel {
    High { coupling: f64, temperature: f64 },
    Low { cache: CubicInterp },
}

impl NoiseKernel {
    fn build(bath: &OhmicBath, s_max: f64) -> Result<Self, ModelError> {
        match bath.regime {
            TemperatureRegime::High => {
                Ok(Self::High { coupling: bath.coupling, temperature: bath.temperature })
            }
            TemperatureRegime::Low => {
                // Dense where the kernel curves (s ≲ 5), sparser on the
                // slowly decaying tail.
                let mut grid = Vec::new();
                let fine_end = s_max.min(5.0);
                let fine_n = (fine_end / 0.01).ceil().max(8.0) as usize;
                for i in 0..=fine_n {
                    grid.push(fine_end * i as f64 / fine_n as f64);
                }
                if s_max > fine_end {
                    let coarse_n = ((s_max - fine_end) / 0.05).ceil().max(4.0) as usize;
                    for i in 1..=coarse_n {
                        grid.push(fine_end + (s_max - fine_end) * i as f64 / coarse_n as f64);
                    }
                }
                let mut values = Vec::with_capacity(grid.len());
                for &s in &grid {
                    values.push(noise_kernel_low_quad(bath.coupling, bath.temperature, s)?);
                }
                Ok(Self::Low { cache: CubicInterp::new(grid, values)? })
            }
        }
    }

    fn eval(&self, s: f64) -> f64 {
        match self {
            Self::High { coupling, temperature } => noise_kernel_high(*coupling, *temperature, s),
            Self::Low { cache } => cache.eval(s),
        }
    }
}

/// One-shot evaluation of the damping and diffusion coefficients
/// `(γ(t), Δ(t))` by direct quadrature.
///
/// This is the reference route: exact up to quadrature tolerance but
/// expensive in the low-temperature regime, where every noise-kernel value is
/// itself an adaptive frequency integral. Families are built from the cached
/// route ([`OhmicCoefficients`]) instead and cross-checked against this one.
pub fn ohmic_coefficients(bath: &OhmicBath, omega0: f64, t: f64) -> Result<(f64, f64), ModelError> {
    if !(t >= 0.0) {
        return Err(ModelError::BadParameter(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let segments = (t * omega0 / std::f64::consts::PI).ceil() as usize + 1;
    let coupling = bath.coupling;
    let gamma = adaptive_quad_segmented(
        &|s: f64| dissipation_kernel(coupling, s) * (omega0 * s).sin(),
        0.0,
        t,
        1e-10,
        segments,
    )?;
    let delta = match bath.regime {
        TemperatureRegime::High => adaptive_quad_segmented(
            &|s: f64| noise_kernel_high(coupling, bath.temperature, s) * (omega0 * s).cos(),
            0.0,
            t,
            1e-10,
            segments,
        )?,
        TemperatureRegime::Low => {
            let temperature = bath.temperature;
            adaptive_quad_segmented(
                &|s: f64| {
                    noise_kernel_low_quad(coupling, temperature, s)
                        .expect("noise-kernel quadrature converges for finite parameters")
                        * (omega0 * s).cos()
                },
                0.0,
                t,
                1e-8,
                segments,
            )?
        }
    };
    Ok((gamma, delta))
}

/// Cached coefficient curves γ(τ), Δ(τ) of an Ohmic bath on `[0, t_max]`.
///
/// Built once by incremental quadrature on a grid fine enough to resolve the
/// ω₀-oscillation of the coefficients, then evaluated by cubic interpolation.
#[derive(Debug)]
pub struct OhmicCoefficients {
    bath: OhmicBath,
    omega0: f64,
    t_max: f64,
    gamma: Arc<CubicInterp>,
    delta: Arc<CubicInterp>,
}

impl OhmicCoefficients {
    pub fn build(bath: &OhmicBath, t_max: f64) -> Result<Self, ModelError> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(ModelError::BadParameter(format!("t_max must be positive, got {t_max}")));
        }
        let omega0 = bath.omega0();
        let kernel = NoiseKernel::build(bath, t_max)?;
        let step = (0.04 / omega0).min(0.01);
        let n = ((t_max / step).ceil() as usize).clamp(64, 1 << 21);
        let coupling = bath.coupling;
        let mut times = Vec::with_capacity(n + 1);
        let mut gamma = Vec::with_capacity(n + 1);
        let mut delta = Vec::with_capacity(n + 1);
        times.push(0.0);
        gamma.push(0.0);
        delta.push(0.0);
        for j in 0..n {
            let a = t_max * j as f64 / n as f64;
            let b = t_max * (j + 1) as f64 / n as f64;
            let dg = adaptive_quad_segmented(
                &|s: f64| dissipation_kernel(coupling, s) * (omega0 * s).sin(),
                a,
                b,
                1e-13,
                1,
            )?;
            let dd = adaptive_quad_segmented(
                &|s: f64| kernel.eval(s) * (omega0 * s).cos(),
                a,
                b,
                1e-13,
                1,
            )?;
            times.push(b);
            gamma.push(gamma[j] + dg);
            delta.push(delta[j] + dd);
        }
        Ok(Self {
            bath: *bath,
            omega0,
            t_max,
            gamma: Arc::new(CubicInterp::new(times.clone(), gamma)?),
            delta: Arc::new(CubicInterp::new(times, delta)?),
        })
    }

    pub fn bath(&self) -> &OhmicBath {
        &self.bath
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn gamma_at(&self, t: f64) -> f64 {
        self.gamma.eval(t)
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        self.delta.eval(t)
    }

    /// Wrap the cached curves as a [`QbmModel`].
    pub fn to_model(&self) -> QbmModel {
        let gamma = self.gamma.clone();
        let delta = self.delta.clone();
        QbmModel::new(self.omega0, move |t| (gamma.eval(t), delta.eval(t)))
            .expect("omega0 of a valid bath is positive")
    }
}

/// Build the Ohmic QBM family on the reduced-time interval `[0, t_end]`,
/// returning the coefficient curves alongside it.
pub fn ohmic_qbm_family_parts(
    bath: &OhmicBath,
    t_end: f64,
) -> Result<(ChannelFamily, Arc<OhmicCoefficients>), ModelError> {
    let coeffs = Arc::new(OhmicCoefficients::build(bath, t_end)?);
    let (family, _table) = qbm_family_with_table(&coeffs.to_model(), t_end)?;
    Ok((family, coeffs))
}

/// Build the Ohmic QBM family on the reduced-time interval `[0, t_end]`.
pub fn ohmic_qbm_family(bath: &OhmicBath, t_end: f64) -> Result<ChannelFamily, ModelError> {
    Ok(ohmic_qbm_family_parts(bath, t_end)?.0)
}
