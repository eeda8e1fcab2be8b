//! Dense linear-algebra kernel: real matrices, Hermitian matrices in split
//! real/imaginary form, eigenvalues, Kronecker products, and a singular-value
//! pseudo-inverse.
//!
//! Everything here targets the small matrices of few-mode phase space
//! (at most ~16×16); no attempt is made at sparse or large-scale work.
//! All values are immutable after construction and all operations are pure,
//! so concurrent use needs no synchronization.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use thiserror::Error;

/// Dense real matrix with `f64` entries, dimensionless (natural units).
pub type RealMatrix = DMatrix<f64>;

/// Relative tolerance for the symmetry/antisymmetry invariants of
/// [`HermitianMatrix`] parts.
pub const HERMITIAN_PART_TOL: f64 = 1e-12;

/// Default relative cutoff for [`pseudo_inverse`].
pub const DEFAULT_PINV_CUTOFF: f64 = 1e-12;

/// Default tolerance for [`HermitianMatrix::is_psd`].
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Condition numbers above this are reported as ill-conditioning warnings.
pub const CONDITION_WARN_THRESHOLD: f64 = 1e12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("real part is not symmetric: violation {violation:.3e} exceeds {tol:.3e}")]
    NotSymmetric { violation: f64, tol: f64 },
    #[error("imaginary part is not antisymmetric: violation {violation:.3e} exceeds {tol:.3e}")]
    NotAntisymmetric { violation: f64, tol: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Largest absolute deviation from symmetry, `max_ij |m_ij - m_ji|`.
pub fn symmetry_violation(m: &RealMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Largest absolute deviation from antisymmetry, `max_ij |m_ij + m_ji|`
/// (includes the diagonal, which must vanish).
pub fn antisymmetry_violation(m: &RealMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    worst
}

fn all_finite(m: &RealMatrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// The symplectic form Ω for `n_modes` modes: the block-diagonal matrix with
/// one `[[0, 1], [-1, 0]]` block per mode (mode ordering `q1, p1, q2, p2, …`).
///
/// Ω is antisymmetric, orthogonal, and satisfies `Ω² = -1`. The sign and block
/// convention is fixed here once for the whole crate: spectra derived from it
/// are invariant under the symplectic-orthogonal permutations that relate the
/// common conventions.
pub fn symplectic_form(n_modes: usize) -> RealMatrix {
    assert!(n_modes >= 1, "n_modes must be at least 1");
    let d = 2 * n_modes;
    let mut m = RealMatrix::zeros(d, d);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    a.kronecker(b)
}

/// Real eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest eigenvalue.
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest eigenvalue.
    pub fn max(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }
}

/// Hermitian matrix `re + i·im` stored as split real and imaginary parts,
/// keeping complex arithmetic out of the kernel.
///
/// `re` must be symmetric and `im` antisymmetric (relative tolerance
/// [`HERMITIAN_PART_TOL`]); together these are exactly Hermiticity.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    re: RealMatrix,
    im: RealMatrix,
}

impl HermitianMatrix {
    pub fn new(re: RealMatrix, im: RealMatrix) -> Result<Self, LinalgError> {
        if re.nrows() != re.ncols() {
            return Err(LinalgError::NotSquare { rows: re.nrows(), cols: re.ncols() });
        }
        if re.nrows() != im.nrows() || im.nrows() != im.ncols() {
            return Err(LinalgError::DimensionMismatch { left: re.nrows(), right: im.nrows() });
        }
        if !all_finite(&re) || !all_finite(&im) {
            return Err(LinalgError::NonFinite);
        }
        let scale = re.amax().max(im.amax()).max(1.0);
        let sym = symmetry_violation(&re);
        if sym > HERMITIAN_PART_TOL * scale {
            return Err(LinalgError::NotSymmetric { violation: sym, tol: HERMITIAN_PART_TOL * scale });
        }
        let asym = antisymmetry_violation(&im);
        if asym > HERMITIAN_PART_TOL * scale {
            return Err(LinalgError::NotAntisymmetric { violation: asym, tol: HERMITIAN_PART_TOL * scale });
        }
        Ok(Self { re, im })
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &RealMatrix {
        &self.re
    }

    pub fn im(&self) -> &RealMatrix {
        &self.im
    }

    /// Frobenius norm of the complex matrix.
    pub fn norm(&self) -> f64 {
        (self.re.norm_squared() + self.im.norm_squared()).sqrt()
    }

    /// Eigenvalues, ascending. Hermiticity guarantees they are real.
    ///
    /// Computed through the doubled real symmetric embedding
    /// `[[re, -im], [im, re]]`, whose spectrum is that of `re + i·im` with
    /// every eigenvalue doubled; adjacent pairs of the sorted doubled
    /// spectrum are averaged back down.
    pub fn eigenvalues(&self) -> Spectrum {
        let d = self.dim();
        let mut e = RealMatrix::zeros(2 * d, 2 * d);
        e.view_mut((0, 0), (d, d)).copy_from(&self.re);
        e.view_mut((d, d), (d, d)).copy_from(&self.re);
        e.view_mut((0, d), (d, d)).copy_from(&(-&self.im));
        e.view_mut((d, 0), (d, d)).copy_from(&self.im);
        // Symmetrize away the (tolerated) invariant slack before factoring.
        let e = (&e + e.transpose()) * 0.5;
        let eig = SymmetricEigen::new(e);
        let mut doubled: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        doubled.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let values = doubled.chunks_exact(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect();
        Spectrum::from_unsorted(values)
    }

    /// Positive semidefiniteness up to `tol`: smallest eigenvalue at least
    /// `-tol·max(1, ‖self‖)` (Frobenius norm).
    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues().min() >= -tol * self.norm().max(1.0)
    }
}

/// Moore–Penrose pseudo-inverse together with singular-value diagnostics.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: RealMatrix,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// Condition number measured against the unit scale of dimensionless
    /// matrices: `max(1, σ_max) / σ_min`, infinite for exactly rank-deficient
    /// input. A matrix that is uniformly tiny (such as a dynamical map close
    /// to complete depolarization) is reported as ill-conditioned even though
    /// its classical `σ_max/σ_min` ratio is 1: inverting it amplifies
    /// unit-scale perturbations by `1/σ_min`.
    pub condition: f64,
}

impl PseudoInverse {
    /// Whether downstream consumers should flag this inversion.
    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > CONDITION_WARN_THRESHOLD
    }
}

/// SVD pseudo-inverse of a square matrix, zeroing singular values below
/// `cutoff_rel · σ_max`.
///
/// Equals the exact inverse whenever the reported condition number is below
/// `1/cutoff_rel`; degenerate inputs yield the Moore–Penrose pseudo-inverse
/// with an infinite condition number rather than an error.
pub fn pseudo_inverse(x: &RealMatrix, cutoff_rel: f64) -> PseudoInverse {
    assert_eq!(x.nrows(), x.ncols(), "pseudo_inverse expects a square matrix");
    assert!(cutoff_rel > 0.0 && cutoff_rel < 1.0, "cutoff_rel must lie in (0, 1)");
    let svd = SVD::new(x.clone(), true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let sigma_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = cutoff_rel * sigma_max;
    let matrix = svd
        .pseudo_inverse(cutoff)
        .expect("cutoff is non-negative");
    let condition = if sigma_min > 0.0 {
        sigma_max.max(1.0) / sigma_min
    } else {
        f64::INFINITY
    };
    PseudoInverse { matrix, sigma_max, sigma_min, condition }
}
