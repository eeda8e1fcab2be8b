//! Independent fixed-step integration of the covariance equations of motion,
//! used to cross-check the channel families.
//!
//! For the damping model the covariance matrix obeys
//! `dσ/dt = -Γ'(t)·(σ - ½·1)` with `Γ'(t) = 2αγ(t)`; for secular QBM the
//! interaction-picture matrix obeys `dσ/dt = -2γ(t)σ + Δ(t)·1`, and the
//! rotation `R(ω₀t)` is applied when mapping back to the lab frame. Both are
//! integrated with the classic fourth-order Runge-Kutta scheme, and the
//! result of `steps` is compared against `2·steps` so that an insufficient
//! step count is detected instead of silently polluting a cross-check.

use super::{rotation, DampingModel, ModelError, QbmModel};
use crate::channel::CovarianceState;
use crate::linalg::RealMatrix;

/// Acceptable halving-check discrepancy; a failed check means the requested
/// step count cannot support the 1e-6 agreement the oracle is used for.
const HALVING_LIMIT: f64 = 1e-8;

/// Which master-equation generator to integrate.
#[derive(Clone, Copy)]
pub enum OdeGenerator<'a> {
    Damping(&'a DampingModel),
    Qbm(&'a QbmModel),
}

fn rk4<F: Fn(f64, &RealMatrix) -> RealMatrix>(
    rhs: &F,
    sigma0: &RealMatrix,
    t_end: f64,
    steps: usize,
) -> RealMatrix {
    let h = t_end / steps as f64;
    let mut sigma = sigma0.clone();
    let mut t = 0.0;
    for _ in 0..steps {
        let k1 = rhs(t, &sigma);
        let k2 = rhs(t + h / 2.0, &(&sigma + &k1 * (h / 2.0)));
        let k3 = rhs(t + h / 2.0, &(&sigma + &k2 * (h / 2.0)));
        let k4 = rhs(t + h, &(&sigma + &k3 * h));
        sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        t += h;
    }
    sigma
}

/// Integrate the covariance equation of motion of a bundled model up to `t`
/// with `steps ≥ 100` fixed Runge-Kutta steps.
///
/// The step count is validated by a halving check; the finer of the two runs
/// is returned. Note that evolutions with negative rates need not preserve
/// physicality, so the returned state is only guaranteed symmetric.
pub fn ode_oracle(
    generator: OdeGenerator<'_>,
    sigma0: &CovarianceState,
    t: f64,
    steps: usize,
) -> Result<CovarianceState, ModelError> {
    if steps < 100 {
        return Err(ModelError::BadParameter(format!("steps must be at least 100, got {steps}")));
    }
    if sigma0.n_modes() != 1 {
        return Err(ModelError::BadParameter("the bundled models are single-mode".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ModelError::BadParameter(format!("time must be non-negative, got {t}")));
    }
    let half = RealMatrix::identity(2, 2) * 0.5;
    let run = |steps: usize| -> RealMatrix {
        match generator {
            OdeGenerator::Damping(model) => {
                let rhs = |s: f64, sigma: &RealMatrix| -> RealMatrix {
                    (sigma - &half) * (-2.0 * model.alpha() * model.gamma(s))
                };
                rk4(&rhs, sigma0.sigma(), t, steps)
            }
            OdeGenerator::Qbm(model) => {
                let rhs = |s: f64, sigma: &RealMatrix| -> RealMatrix {
                    let (gamma, delta) = model.coefficients(s);
                    sigma * (-2.0 * gamma) + RealMatrix::identity(2, 2) * delta
                };
                let interaction = rk4(&rhs, sigma0.sigma(), t, steps);
                let r = rotation(model.omega0() * t);
                &r * interaction * r.transpose()
            }
        }
    };
    let coarse = run(steps);
    let fine = run(2 * steps);
    let estimated = (&fine - &coarse).amax();
    if estimated > HALVING_LIMIT {
        return Err(ModelError::StepCountTooSmall { estimated, limit: HALVING_LIMIT });
    }
    let symmetric = (&fine + fine.transpose()) * 0.5;
    Ok(CovarianceState::from_symmetric(symmetric))
}
