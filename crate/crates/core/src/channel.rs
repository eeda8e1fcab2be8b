//! Gaussian channels on covariance matrices: application, composition, the
//! complete-positivity matrix, and the augmented vectorized representation.
//!
//! A Gaussian channel acts on the 2N×2N covariance matrix σ of an N-mode
//! state as
//!
//! ```text
//! σ  ↦  X σ Xᵀ + Y
//! ```
//!
//! with X, Y real 2N×2N and Y symmetric. The pair (X, Y) is a completely
//! positive map exactly when the Hermitian matrix
//!
//! ```text
//! Y - (i/2) Ω + (i/2) X Ω Xᵀ
//! ```
//!
//! is positive semidefinite, where Ω is the symplectic form. Flattening σ
//! row-major into a vector with a trailing auxiliary 1 turns the affine
//! channel action into plain matrix multiplication by the "augmented" matrix
//! `[[X ⊗ X, vec(Y)], [0ᵀ, 1]]`, under which channel composition becomes a
//! matrix product.

use nalgebra::DVector;
use thiserror::Error;

use crate::linalg::{
    self, kron, symplectic_form, HermitianMatrix, RealMatrix,
};

/// Relative tolerance for the symmetry invariants of channels and states.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Tolerance for the physicality (uncertainty-principle) check of states.
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Absolute tolerance on the trailing auxiliary entry of vectorized states.
pub const AUX_ENTRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("matrix must be 2N x 2N square, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} modes vs {right} modes")]
    ModeMismatch { left: usize, right: usize },
    #[error("Y matrix is not symmetric: violation {violation:.3e}")]
    AsymmetricY { violation: f64 },
    #[error("covariance matrix is not symmetric: violation {violation:.3e}")]
    AsymmetricSigma { violation: f64 },
    #[error("covariance matrix violates the uncertainty principle by {violation:.3e}")]
    Unphysical { violation: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("augmented vector has length {got}, expected 4N²+1 = {want}")]
    BadVectorLength { got: usize, want: usize },
    #[error("auxiliary entry of augmented vector is {got}, expected 1")]
    BadAuxEntry { got: f64 },
}

fn check_even_square(m: &RealMatrix) -> Result<usize, ChannelError> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(ChannelError::BadShape { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows() / 2)
}

/// Covariance matrix of an N-mode Gaussian state (second moments only;
/// vacuum convention σ = ½·1, natural units ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    n_modes: usize,
    sigma: RealMatrix,
}

impl CovarianceState {
    /// Validated constructor: σ must be symmetric and satisfy the
    /// uncertainty principle `σ + (i/2)Ω ⪰ 0` up to [`PHYSICALITY_TOL`].
    pub fn new(sigma: RealMatrix) -> Result<Self, ChannelError> {
        let n_modes = check_even_square(&sigma)?;
        if !sigma.iter().all(|v| v.is_finite()) {
            return Err(ChannelError::NonFinite);
        }
        let violation = linalg::symmetry_violation(&sigma);
        if violation > SYMMETRY_TOL * sigma.amax().max(1.0) {
            return Err(ChannelError::AsymmetricSigma { violation });
        }
        let state = Self { n_modes, sigma };
        let phys = state.physicality_violation();
        if phys > PHYSICALITY_TOL * state.sigma.amax().max(1.0) {
            return Err(ChannelError::Unphysical { violation: phys });
        }
        Ok(state)
    }

    /// Construct without the physicality check. Channel outputs use this:
    /// applying a map that is not completely positive can legitimately
    /// produce an unphysical covariance matrix, and detecting that is the
    /// whole point of the analysis.
    pub(crate) fn from_symmetric(sigma: RealMatrix) -> Self {
        let n_modes = sigma.nrows() / 2;
        Self { n_modes, sigma }
    }

    /// The vacuum state σ = ½·1.
    pub fn vacuum(n_modes: usize) -> Self {
        Self { n_modes, sigma: RealMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5 }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn sigma(&self) -> &RealMatrix {
        &self.sigma
    }

    /// How far σ + (i/2)Ω is from positive semidefiniteness: the negative
    /// part of its smallest eigenvalue (0 when physical).
    pub fn physicality_violation(&self) -> f64 {
        let omega = symplectic_form(self.n_modes);
        let h = HermitianMatrix::new(self.sigma.clone(), omega * 0.5)
            .expect("σ symmetric and Ω/2 antisymmetric by construction");
        (-h.eigenvalues().min()).max(0.0)
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.physicality_violation() <= tol * self.sigma.amax().max(1.0)
    }
}

/// A Gaussian dynamical map σ ↦ XσXᵀ + Y.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    n_modes: usize,
    x: RealMatrix,
    y: RealMatrix,
}

impl GaussianChannel {
    pub fn new(x: RealMatrix, y: RealMatrix) -> Result<Self, ChannelError> {
        let n_modes = check_even_square(&x)?;
        let ny = check_even_square(&y)?;
        if n_modes != ny {
            return Err(ChannelError::ModeMismatch { left: n_modes, right: ny });
        }
        if !x.iter().all(|v| v.is_finite()) || !y.iter().all(|v| v.is_finite()) {
            return Err(ChannelError::NonFinite);
        }
        let violation = linalg::symmetry_violation(&y);
        if violation > SYMMETRY_TOL * y.amax().max(1.0) {
            return Err(ChannelError::AsymmetricY { violation });
        }
        Ok(Self { n_modes, x, y })
    }

    /// The identity channel (X = 1, Y = 0).
    pub fn identity(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        Self { n_modes, x: RealMatrix::identity(d, d), y: RealMatrix::zeros(d, d) }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn x(&self) -> &RealMatrix {
        &self.x
    }

    pub fn y(&self) -> &RealMatrix {
        &self.y
    }

    /// Apply the channel to a state: σ ↦ XσXᵀ + Y (output symmetrized to
    /// keep float round-off out of the symmetry invariant).
    pub fn apply(&self, state: &CovarianceState) -> Result<CovarianceState, ChannelError> {
        if state.n_modes() != self.n_modes {
            return Err(ChannelError::ModeMismatch { left: self.n_modes, right: state.n_modes() });
        }
        let raw = &self.x * state.sigma() * self.x.transpose() + &self.y;
        let sigma = (&raw + raw.transpose()) * 0.5;
        Ok(CovarianceState::from_symmetric(sigma))
    }

    /// Sequential composition: `after.compose(before)` applies `before`
    /// first, i.e. returns the channel (X_a X_b, X_a Y_b X_aᵀ + Y_a).
    pub fn compose(&self, before: &GaussianChannel) -> Result<GaussianChannel, ChannelError> {
        if before.n_modes != self.n_modes {
            return Err(ChannelError::ModeMismatch { left: self.n_modes, right: before.n_modes });
        }
        let x = &self.x * &before.x;
        let raw_y = &self.x * &before.y * self.x.transpose() + &self.y;
        let y = (&raw_y + raw_y.transpose()) * 0.5;
        Ok(GaussianChannel { n_modes: self.n_modes, x, y })
    }

    /// The Hermitian matrix `Y - (i/2)Ω + (i/2)XΩXᵀ` whose positive
    /// semidefiniteness is equivalent to complete positivity.
    ///
    /// Real part Y, imaginary part `(XΩXᵀ - Ω)/2`; the latter is
    /// antisymmetrized explicitly so the Hermiticity invariant holds exactly.
    pub fn cp_matrix(&self) -> HermitianMatrix {
        let omega = symplectic_form(self.n_modes);
        let raw = &self.x * &omega * self.x.transpose() - &omega;
        let im = (&raw - raw.transpose()) * 0.25;
        let re = (&self.y + self.y.transpose()) * 0.5;
        HermitianMatrix::new(re, im).expect("symmetrized parts satisfy the invariants")
    }

    /// Complete positivity up to `tol` (see [`HermitianMatrix::is_psd`]).
    pub fn is_cp(&self, tol: f64) -> bool {
        self.cp_matrix().is_psd(tol)
    }

    /// Augmented-matrix representation of the channel.
    pub fn to_augmented(&self) -> AugmentedMap {
        let d = 2 * self.n_modes;
        let dd = d * d;
        let mut m = RealMatrix::zeros(dd + 1, dd + 1);
        m.view_mut((0, 0), (dd, dd)).copy_from(&kron(&self.x, &self.x));
        for i in 0..d {
            for j in 0..d {
                m[(d * i + j, dd)] = self.y[(i, j)];
            }
        }
        m[(dd, dd)] = 1.0;
        AugmentedMap { n_modes: self.n_modes, m }
    }
}

/// Flatten a covariance matrix row-major (entry k = 2N(i-1)+j in 1-based
/// indices) and append the auxiliary entry 1.
pub fn vectorize(state: &CovarianceState) -> DVector<f64> {
    let d = 2 * state.n_modes();
    let mut v = DVector::zeros(d * d + 1);
    for i in 0..d {
        for j in 0..d {
            v[d * i + j] = state.sigma()[(i, j)];
        }
    }
    v[d * d] = 1.0;
    v
}

/// Inverse of [`vectorize`]. Validates the trailing auxiliary entry and the
/// symmetry of the implied matrix.
pub fn devectorize(v: &DVector<f64>, n_modes: usize) -> Result<CovarianceState, ChannelError> {
    let d = 2 * n_modes;
    let want = d * d + 1;
    if v.len() != want {
        return Err(ChannelError::BadVectorLength { got: v.len(), want });
    }
    let aux = v[d * d];
    if (aux - 1.0).abs() > AUX_ENTRY_TOL {
        return Err(ChannelError::BadAuxEntry { got: aux });
    }
    let sigma = RealMatrix::from_fn(d, d, |i, j| v[d * i + j]);
    let violation = linalg::symmetry_violation(&sigma);
    if violation > SYMMETRY_TOL * sigma.amax().max(1.0) {
        return Err(ChannelError::AsymmetricSigma { violation });
    }
    Ok(CovarianceState::from_symmetric(sigma))
}

/// The (4N²+1)×(4N²+1) block matrix `[[X ⊗ X, vec(Y)], [0ᵀ, 1]]` acting on
/// vectorized states. Composition of channels is the plain product of their
/// augmented matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMap {
    n_modes: usize,
    m: RealMatrix,
}

impl AugmentedMap {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.m
    }

    /// Act on a vectorized state.
    pub fn apply_vectorized(&self, v: &DVector<f64>) -> Result<DVector<f64>, ChannelError> {
        if v.len() != self.m.ncols() {
            return Err(ChannelError::BadVectorLength { got: v.len(), want: self.m.ncols() });
        }
        Ok(&self.m * v)
    }

    /// Composition by matrix product: `after.compose(before)` applies
    /// `before` first.
    pub fn compose(&self, before: &AugmentedMap) -> Result<AugmentedMap, ChannelError> {
        if before.n_modes != self.n_modes {
            return Err(ChannelError::ModeMismatch { left: self.n_modes, right: before.n_modes });
        }
        Ok(AugmentedMap { n_modes: self.n_modes, m: &self.m * &before.m })
    }
}
