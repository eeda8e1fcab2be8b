//! Pure damping of a single field mode with a time-dependent rate.
//!
//! The decay of a single mode with coupling α and rate γ(t) acts on the
//! covariance matrix through
//!
//! ```text
//! X(t, 0) = e^{-Γ(t)/2}·1 ,   Y(t, 0) = (1 - e^{-Γ(t)})·½·1 ,
//! Γ(t) = 2α ∫₀ᵗ γ(s) ds ,
//! ```
//!
//! which drives every state towards the vacuum σ = ½·1. The family is
//! divisible exactly where γ(t) ≥ 0; the punctual non-Markovianity works out
//! to `F(t) = 2α·max(0, -γ(t))`, whose time integral [`damping_nm_closed_form`]
//! provides an independent closed-form route to the measure.

use std::sync::Arc;

use super::{ModelError, RateFn};
use crate::channel::GaussianChannel;
use crate::divisibility::ChannelFamily;
use crate::linalg::RealMatrix;
use crate::quad::adaptive_quad;

/// Per-increment tolerance of the cumulative rate integration.
const INCREMENT_TOL: f64 = 1e-13;

/// Checkpoint spacing of the cumulative Γ cache.
const CHECKPOINT_STEP: f64 = 0.05;

/// Single-mode damping model: coupling `alpha` (dimensionless, α ≪ 1) and
/// rate function `gamma` in inverse model-time units.
#[derive(Clone)]
pub struct DampingModel {
    alpha: f64,
    gamma: RateFn,
}

impl DampingModel {
    pub fn new<G>(alpha: f64, gamma: G) -> Result<Self, ModelError>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(ModelError::BadParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha, gamma: Arc::new(gamma) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }
}

struct DampingEngine {
    alpha: f64,
    gamma: RateFn,
    step: f64,
    /// Γ(t_j) at checkpoints t_j = j·step.
    checkpoints: Vec<f64>,
}

impl DampingEngine {
    fn build(model: &DampingModel, t_max: f64) -> Result<Self, ModelError> {
        let cells = ((t_max / CHECKPOINT_STEP).ceil() as usize).clamp(64, 262_144);
        let step = t_max / cells as f64;
        let mut checkpoints = Vec::with_capacity(cells + 1);
        checkpoints.push(0.0);
        let mut acc = 0.0;
        for j in 0..cells {
            let a = j as f64 * step;
            let b = if j + 1 == cells { t_max } else { (j + 1) as f64 * step };
            acc += 2.0 * model.alpha * adaptive_quad(&|s| (model.gamma)(s), a, b, INCREMENT_TOL)?;
            checkpoints.push(acc);
        }
        Ok(Self { alpha: model.alpha, gamma: model.gamma.clone(), step, checkpoints })
    }

    fn big_gamma(&self, t: f64) -> f64 {
        let j = ((t / self.step) as usize).min(self.checkpoints.len() - 2);
        let t_j = j as f64 * self.step;
        let tail = adaptive_quad(&|s| (self.gamma)(s), t_j, t.max(t_j), INCREMENT_TOL)
            .expect("rate function must stay finite on the family domain");
        self.checkpoints[j] + 2.0 * self.alpha * tail
    }

    fn channel_at(&self, t: f64) -> GaussianChannel {
        let big_gamma = self.big_gamma(t);
        let x = RealMatrix::identity(2, 2) * (-big_gamma / 2.0).exp();
        let y = RealMatrix::identity(2, 2) * ((1.0 - (-big_gamma).exp()) / 2.0);
        GaussianChannel::new(x, y).expect("damping channels are valid by construction")
    }
}

/// Build the damping family on `[0, t_max]`. The cumulative exponent Γ is
/// integrated adaptively and cached at checkpoints, so evaluation anywhere in
/// the domain costs one short adaptive tail integral.
pub fn damping_family(model: &DampingModel, t_max: f64) -> Result<ChannelFamily, ModelError> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(ModelError::BadParameter(format!("t_max must be positive, got {t_max}")));
    }
    let engine = DampingEngine::build(model, t_max)?;
    Ok(ChannelFamily::from_fn(1, t_max, move |t| engine.channel_at(t))?)
}

/// Closed-form total non-Markovianity of the damping family over
/// `[t_start, t_end]`: the quadrature of `2α·max(0, -γ(t))`, which is
/// supported exactly on the sub-intervals where the rate is negative.
pub fn damping_nm_closed_form(
    model: &DampingModel,
    t_start: f64,
    t_end: f64,
) -> Result<f64, ModelError> {
    if !(t_end > t_start) {
        return Err(ModelError::BadParameter(format!("invalid interval [{t_start}, {t_end}]")));
    }
    let alpha = model.alpha;
    let gamma = model.gamma.clone();
    Ok(adaptive_quad(&|s| 2.0 * alpha * (-(gamma)(s)).max(0.0), t_start, t_end, 1e-10)?)
}
