//! Bundled physical channel families: pure damping of a single field mode,
//! secular quantum Brownian motion driven by damping/diffusion coefficient
//! functions, and an Ohmic-bath engine that derives those coefficients from
//! spectral-density kernels. A fixed-step Runge-Kutta oracle integrates the
//! corresponding covariance equations of motion independently, for
//! cross-checks.

pub mod damping;
pub mod ohmic;
pub mod oracle;
pub mod qbm;

use std::sync::Arc;

use thiserror::Error;

use crate::divisibility::EngineError;
use crate::linalg::RealMatrix;
use crate::quad::{InterpError, QuadError};

pub use damping::{damping_family, damping_nm_closed_form, DampingModel};
pub use ohmic::{
    ohmic_coefficients, ohmic_qbm_family, ohmic_qbm_family_parts, OhmicBath, OhmicCoefficients,
    TemperatureRegime,
};
pub use oracle::{ode_oracle, OdeGenerator};
pub use qbm::{qbm_f_closed_form, qbm_family, qbm_family_with_table, CoefficientTable, QbmModel};

/// Scalar rate function of time, shared by models and their tables.
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Damping/diffusion coefficient pair `t ↦ (γ(t), Δ(t))`.
pub type CoeffFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("ODE step count too small: halving check estimates error {estimated:.3e} (limit {limit:.3e})")]
    StepCountTooSmall { estimated: f64, limit: f64 },
}

/// Phase-space rotation by `angle`: `[[cos, sin], [-sin, cos]]`.
pub(crate) fn rotation(angle: f64) -> RealMatrix {
    RealMatrix::from_row_slice(2, 2, &[angle.cos(), angle.sin(), -angle.sin(), angle.cos()])
}
