//! Divisibility analysis of Gaussian dynamical maps.
//!
//! A time-indexed family of channels `t ↦ (X(t,0), Y(t,0))` is divisible
//! (Markovian) when every intermediate map over `[t, t+ε]` is completely
//! positive. The intermediate map follows from the composition law:
//!
//! ```text
//! X(t+ε, t) = X(t+ε, 0) · X(t, 0)⁻¹
//! Y(t+ε, t) = Y(t+ε, 0) - X(t+ε, t) Y(t, 0) X(t+ε, t)ᵀ
//! ```
//!
//! with the inverse replaced by an SVD pseudo-inverse so that singular or
//! nearly singular `X(t,0)` degrade into diagnostics instead of failures.
//!
//! Violation of complete positivity is scored by the eigenvalues
//! `ν_k(t+ε, t)` of the intermediate map's CP matrix. Each eigenvalue
//! contributes its negative-part rate
//!
//! ```text
//! f_k(t) = lim_{ε→0⁺} max(0, -ν_k(t+ε, t)) / ε ,
//! ```
//!
//! the punctual non-Markovianity is `F(t) = Σ_k f_k(t)`, and the total
//! non-Markovianity over an interval is `N = ∫ F(t) dt`. The ε → 0 limit is
//! taken numerically on the halving schedule `{ε₀, ε₀/2, ε₀/4}` with a
//! two-point Richardson extrapolation of the rate, which removes the
//! first-order bias without assuming the family has a generator.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{ChannelError, GaussianChannel};
use crate::linalg::{
    pseudo_inverse, HermitianMatrix, RealMatrix, Spectrum, CONDITION_WARN_THRESHOLD,
    DEFAULT_PINV_CUTOFF,
};
use crate::quad::{composite_simpson, CubicInterp, InterpError};

/// Default tolerance on the punctual rate below which a grid point counts as
/// Markovian (inverse model-time units).
pub const DEFAULT_RATE_TOL: f64 = 1e-8;

/// Tolerance for the `eval(0) = identity` family invariant.
pub const FAMILY_IDENTITY_TOL: f64 = 1e-9;

/// Extrapolation residuals larger than this fraction of `max(1, F)` are
/// surfaced as warnings.
const RESIDUAL_WARN_FRACTION: f64 = 0.05;

/// Default base step of the ε-halving schedule at time `t`.
pub fn default_eps0(t: f64) -> f64 {
    1e-4 * t.max(1.0)
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("time {t} with step {eps} leaves the family domain [0, {t_max}]")]
    Domain { t: f64, eps: f64, t_max: f64 },
    #[error("grid must have an odd number of points >= 3, got {n_points}")]
    BadGridPoints { n_points: usize },
    #[error("invalid analysis interval [{t_start}, {t_end}]")]
    BadInterval { t_start: f64, t_end: f64 },
    #[error("family evaluation at t = 0 is not the identity channel (deviation {deviation:.3e})")]
    NotIdentityAtZero { deviation: f64 },
    #[error("tabulated family needs at least 2 rows with strictly increasing times starting at 0")]
    BadTable,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

type EvalFn = dyn Fn(f64) -> GaussianChannel + Send + Sync;

/// A time-indexed Gaussian dynamical map `t ↦ (X(t,0), Y(t,0))` on `[0, T]`,
/// backed by a closed-form closure or an interpolated table.
///
/// Evaluation is pure and reentrant, so families can be shared freely across
/// threads.
#[derive(Clone)]
pub struct ChannelFamily {
    n_modes: usize,
    t_max: f64,
    eval_fn: Arc<EvalFn>,
}

impl fmt::Debug for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelFamily")
            .field("n_modes", &self.n_modes)
            .field("t_max", &self.t_max)
            .finish_non_exhaustive()
    }
}

impl ChannelFamily {
    /// Wrap a closure as a family on `[0, t_max]`. The closure must return a
    /// valid channel for every time in the domain, and its value at `t = 0`
    /// must be the identity within [`FAMILY_IDENTITY_TOL`].
    pub fn from_fn<F>(n_modes: usize, t_max: f64, eval_fn: F) -> Result<Self, EngineError>
    where
        F: Fn(f64) -> GaussianChannel + Send + Sync + 'static,
    {
        if !(t_max > 0.0) {
            return Err(EngineError::BadInterval { t_start: 0.0, t_end: t_max });
        }
        let family = Self { n_modes, t_max, eval_fn: Arc::new(eval_fn) };
        let at_zero = family.eval(0.0)?;
        let d = 2 * n_modes;
        let deviation = (at_zero.x() - RealMatrix::identity(d, d))
            .amax()
            .max(at_zero.y().amax());
        if deviation > FAMILY_IDENTITY_TOL {
            return Err(EngineError::NotIdentityAtZero { deviation });
        }
        Ok(family)
    }

    /// Build a family from tabulated rows by cubic interpolation of every
    /// X and Y entry. Times must be strictly increasing and start at 0, and
    /// row 0 must already be the identity (it is validated, not corrected).
    pub fn from_table(times: &[f64], channels: &[GaussianChannel]) -> Result<Self, EngineError> {
        if times.len() < 2
            || times.len() != channels.len()
            || times[0].abs() > 1e-12
            || times.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(EngineError::BadTable);
        }
        let n_modes = channels[0].n_modes();
        if channels.iter().any(|c| c.n_modes() != n_modes) {
            return Err(EngineError::BadTable);
        }
        let d = 2 * n_modes;
        let xs: Vec<f64> = times.to_vec();
        let mut x_interp = Vec::with_capacity(d * d);
        let mut y_interp = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let xv: Vec<f64> = channels.iter().map(|c| c.x()[(i, j)]).collect();
                let yv: Vec<f64> = channels.iter().map(|c| c.y()[(i, j)]).collect();
                x_interp.push(CubicInterp::new(xs.clone(), xv)?);
                y_interp.push(CubicInterp::new(xs.clone(), yv)?);
            }
        }
        let t_max = *times.last().expect("nonempty table");
        Self::from_fn(n_modes, t_max, move |t| {
            let x = RealMatrix::from_fn(d, d, |i, j| x_interp[d * i + j].eval(t));
            let y_raw = RealMatrix::from_fn(d, d, |i, j| y_interp[d * i + j].eval(t));
            let y = (&y_raw + y_raw.transpose()) * 0.5;
            GaussianChannel::new(x, y).expect("interpolated rows of a valid table stay valid")
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Upper end of the time domain.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Evaluate the map from time 0 to `t`.
    pub fn eval(&self, t: f64) -> Result<GaussianChannel, EngineError> {
        if !(0.0..=self.t_max * (1.0 + 1e-12) + 1e-300).contains(&t) {
            return Err(EngineError::Domain { t, eps: 0.0, t_max: self.t_max });
        }
        Ok((self.eval_fn)(t.min(self.t_max)))
    }
}

/// The channel acting over `[t, t+ε]`, with the condition number recorded
/// from the pseudo-inversion of `X(t, 0)`.
#[derive(Debug, Clone)]
pub struct IntermediateMap {
    pub t: f64,
    pub epsilon: f64,
    pub channel: GaussianChannel,
    pub x_condition_number: f64,
}

impl IntermediateMap {
    pub fn is_ill_conditioned(&self) -> bool {
        self.x_condition_number > CONDITION_WARN_THRESHOLD
    }
}

/// Extract the intermediate map of `family` over `[t, t+eps]`.
pub fn intermediate_map(
    family: &ChannelFamily,
    t: f64,
    eps: f64,
) -> Result<IntermediateMap, EngineError> {
    if !(t >= 0.0) || !(eps > 0.0) || t + eps > family.t_max() * (1.0 + 1e-12) {
        return Err(EngineError::Domain { t, eps, t_max: family.t_max() });
    }
    let now = family.eval(t)?;
    let later = family.eval(t + eps)?;
    let pinv = pseudo_inverse(now.x(), DEFAULT_PINV_CUTOFF);
    let x_int = later.x() * &pinv.matrix;
    let y_raw = later.y() - &x_int * now.y() * x_int.transpose();
    let y_int = (&y_raw + y_raw.transpose()) * 0.5;
    let channel = GaussianChannel::new(x_int, y_int)?;
    Ok(IntermediateMap { t, epsilon: eps, channel, x_condition_number: pinv.condition })
}

/// CP matrix of the intermediate map over `[t, t+eps]`. The map fails
/// complete positivity at `(t, eps)` exactly when this matrix has a negative
/// eigenvalue.
pub fn nm_matrix(family: &ChannelFamily, t: f64, eps: f64) -> Result<HermitianMatrix, EngineError> {
    Ok(intermediate_map(family, t, eps)?.channel.cp_matrix())
}

/// Per-time record of the CP-matrix spectrum and the extracted rates.
#[derive(Debug, Clone)]
pub struct NegativitySample {
    pub t: f64,
    /// Eigenvalues of the CP matrix at the finest ε of the halving schedule.
    pub eigenvalues: Spectrum,
    /// Non-negative per-eigenvalue rates `f_k(t)`, paired by sorted order.
    pub f: Vec<f64>,
    /// Punctual non-Markovianity `F(t) = Σ_k f_k(t)`.
    pub big_f: f64,
    /// Worst `|r_k(ε/4) - r_k(ε/2)|` across eigenvalues.
    pub extrapolation_residual: f64,
    /// Worst condition number seen while inverting `X(t, 0)`.
    pub x_condition_number: f64,
}

/// Extract the punctual non-Markovianity rate at time `t`.
///
/// The CP-matrix spectrum is evaluated at ε ∈ {ε₀, ε₀/2, ε₀/4}, each
/// eigenvalue's negative-part rate `max(0, -ν)/ε` is formed, and the two
/// finest rates are Richardson-extrapolated (`2r(ε/4) - r(ε/2)`) whenever
/// they agree about being zero or nonzero; otherwise the finest rate is kept
/// as is. Extrapolated rates are clamped at 0: they are rates of a negative
/// part and float noise near the Markovian boundary must not produce
/// spurious negativity.
pub fn negativity_rate(
    family: &ChannelFamily,
    t: f64,
    eps0: Option<f64>,
) -> Result<NegativitySample, EngineError> {
    let eps0 = eps0.unwrap_or_else(|| default_eps0(t));
    if !(eps0 > 0.0) || !(t >= 0.0) || t + eps0 > family.t_max() * (1.0 + 1e-12) {
        return Err(EngineError::Domain { t, eps: eps0, t_max: family.t_max() });
    }
    let steps = [eps0, eps0 / 2.0, eps0 / 4.0];
    let mut rates: Vec<Vec<f64>> = Vec::with_capacity(3);
    let mut finest: Option<Spectrum> = None;
    let mut worst_condition: f64 = 0.0;
    for (i, &eps) in steps.iter().enumerate() {
        let imap = intermediate_map(family, t, eps)?;
        worst_condition = worst_condition.max(imap.x_condition_number);
        let spectrum = imap.channel.cp_matrix().eigenvalues();
        rates.push(spectrum.values().iter().map(|&nu| (-nu).max(0.0) / eps).collect());
        if i == 2 {
            finest = Some(spectrum);
        }
    }
    let eigenvalues = finest.expect("three schedule steps ran");
    let n = eigenvalues.len();
    let mut f = Vec::with_capacity(n);
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let r2 = rates[1][k];
        let r4 = rates[2][k];
        residual = residual.max((r4 - r2).abs());
        let extrapolated = if (r2 > 0.0) == (r4 > 0.0) { 2.0 * r4 - r2 } else { r4 };
        f.push(extrapolated.max(0.0));
    }
    let big_f = f.iter().sum();
    Ok(NegativitySample {
        t,
        eigenvalues,
        f,
        big_f,
        extrapolation_residual: residual,
        x_condition_number: worst_condition,
    })
}

/// Diagnostics attached to an [`NMReport`].
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    IllConditioned { t: f64, condition: f64 },
    ExtrapolationResidual { t: f64, residual: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::IllConditioned { t, condition } => {
                write!(f, "X(t,0) ill-conditioned at t = {t:.6}: condition {condition:.3e}")
            }
            Warning::ExtrapolationResidual { t, residual } => {
                write!(f, "large extrapolation residual at t = {t:.6}: {residual:.3e}")
            }
        }
    }
}

/// Grid of [`NegativitySample`]s plus the integrated measure.
#[derive(Debug, Clone)]
pub struct NMReport {
    pub grid: Vec<f64>,
    pub samples: Vec<NegativitySample>,
    /// Total non-Markovianity `∫ F(t) dt` over the analysis interval.
    pub total: f64,
    pub warnings: Vec<Warning>,
}

impl NMReport {
    pub fn max_big_f(&self) -> f64 {
        self.samples.iter().map(|s| s.big_f).fold(0.0, f64::max)
    }

    /// Markovian iff `F ≤ rate_tol` at every grid point.
    pub fn is_markovian(&self, rate_tol: f64) -> bool {
        self.samples.iter().all(|s| s.big_f <= rate_tol)
    }

    /// Measure of the grid cells whose sample exceeds `rate_tol`.
    pub fn window_extent(&self, rate_tol: f64) -> f64 {
        if self.grid.len() < 2 {
            return 0.0;
        }
        let h = (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64;
        h * self.samples.iter().filter(|s| s.big_f > rate_tol).count() as f64
    }

    /// Start of the Markovian tail: the first grid time after the last
    /// sample exceeding `threshold`. `None` when the final sample still
    /// exceeds it (no tail observed within the grid).
    pub fn markovian_tail_start(&self, threshold: f64) -> Option<f64> {
        let last_bad = self
            .samples
            .iter()
            .rposition(|s| s.big_f >= threshold);
        match last_bad {
            None => Some(self.grid[0]),
            Some(i) if i + 1 < self.grid.len() => Some(self.grid[i + 1]),
            Some(_) => None,
        }
    }
}

/// Sample the punctual rate on a uniform grid over `[t_start, t_end]` and
/// integrate it with the composite Simpson rule. `n_points` must be odd so
/// the Simpson weights apply; samples at distinct grid times are evaluated
/// in parallel.
pub fn total_nm(
    family: &ChannelFamily,
    t_start: f64,
    t_end: f64,
    n_points: usize,
    eps0: Option<f64>,
) -> Result<NMReport, EngineError> {
    if n_points < 3 || n_points % 2 == 0 {
        return Err(EngineError::BadGridPoints { n_points });
    }
    if !(t_start >= 0.0) || !(t_end > t_start) || t_end > family.t_max() * (1.0 + 1e-12) {
        return Err(EngineError::BadInterval { t_start, t_end });
    }
    let eps_end = eps0.unwrap_or_else(|| default_eps0(t_end));
    if t_end + eps_end > family.t_max() * (1.0 + 1e-12) {
        return Err(EngineError::Domain { t: t_end, eps: eps_end, t_max: family.t_max() });
    }
    let h = (t_end - t_start) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| if i + 1 == n_points { t_end } else { t_start + i as f64 * h })
        .collect();
    let samples: Vec<NegativitySample> = grid
        .par_iter()
        .map(|&t| negativity_rate(family, t, eps0))
        .collect::<Result<_, _>>()?;

    let big_f: Vec<f64> = samples.iter().map(|s| s.big_f).collect();
    let total = composite_simpson(&big_f, h);

    let mut warnings = Vec::new();
    for s in &samples {
        if s.x_condition_number > CONDITION_WARN_THRESHOLD {
            warnings.push(Warning::IllConditioned { t: s.t, condition: s.x_condition_number });
        }
        if s.extrapolation_residual > RESIDUAL_WARN_FRACTION * s.big_f.max(1.0) {
            warnings.push(Warning::ExtrapolationResidual { t: s.t, residual: s.extrapolation_residual });
        }
    }
    Ok(NMReport { grid, samples, total, warnings })
}

/// Whether the family is Markovian over the interval: `F ≤ rate_tol` at
/// every grid point.
pub fn is_markovian(
    family: &ChannelFamily,
    t_start: f64,
    t_end: f64,
    n_points: usize,
    rate_tol: f64,
    eps0: Option<f64>,
) -> Result<bool, EngineError> {
    Ok(total_nm(family, t_start, t_end, n_points, eps0)?.is_markovian(rate_tol))
}
