//! Divisibility-based Markovianity analysis for Gaussian quantum channels.
//!
//! A Gaussian dynamical map is described at the level of second moments by a
//! time-indexed pair of real matrices `(X(t,0), Y(t,0))` acting on covariance
//! matrices as `σ ↦ XσXᵀ + Y`. This crate decides whether such a map is
//! divisible — every intermediate map over `[t, t+ε]` completely positive —
//! and quantifies how badly divisibility fails: the punctual rate `F(t)` at
//! which the intermediate map's complete-positivity matrix develops negative
//! spectrum, and its time integral, the total non-Markovianity `N`.
//!
//! The crate is organised as:
//!
//! - [`linalg`]: the small dense kernel (symplectic form, Kronecker products,
//!   split-form Hermitian eigenvalues, SVD pseudo-inverse);
//! - [`channel`]: Gaussian channels, the CP condition, and the augmented
//!   vectorized representation whose matrix product implements composition;
//! - [`divisibility`]: intermediate-map extraction, the rates `f_k(t)` and
//!   `F(t)`, and the integrated measure;
//! - [`models`]: the bundled physical families (pure damping, secular
//!   quantum Brownian motion, and an Ohmic-bath coefficient engine) plus a
//!   Runge-Kutta oracle used to cross-check them;
//! - [`quad`]: adaptive quadrature and interpolation plumbing.
//!
//! The companion `book/` directory walks through the concepts chapter by
//! chapter; its code snippets compile and run as doctests of this crate.

pub mod channel;
pub mod divisibility;
pub mod linalg;
pub mod models;
pub mod quad;

pub use channel::{devectorize, vectorize, AugmentedMap, ChannelError, CovarianceState, GaussianChannel};
pub use divisibility::{
    default_eps0, intermediate_map, is_markovian, negativity_rate, nm_matrix, total_nm,
    ChannelFamily, EngineError, IntermediateMap, NMReport, NegativitySample, Warning,
    DEFAULT_RATE_TOL,
};
pub use linalg::{
    kron, pseudo_inverse, symplectic_form, HermitianMatrix, LinalgError, PseudoInverse,
    RealMatrix, Spectrum,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/vectorization.md")]
    mod vectorization {}
    #[doc = include_str!("../../../book/src/divisibility.md")]
    mod divisibility {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/ohmic.md")]
    mod ohmic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
