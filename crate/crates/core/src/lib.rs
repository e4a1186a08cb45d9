//! Spectral solvers for the Neumann spectral fractional Laplacian on an
//! interval `(0, L)`.
//!
//! The crate computes weighted principal eigenvalues `Λ(s, m, (0, L))` of
//! `(-Δ_N)^s u = Λ m u` by truncated cosine expansions, traces branches of
//! positive steady states of the fractional logistic equation
//! `(-Δ_N)^{1/2} u = λ u (m - u)`, and ships finite-difference oracles that
//! check both paths independently.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the usual `f64` instantiation.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod error;
pub mod fd_oracle;
pub mod fracop;
pub mod linalg;
pub mod logistic;
pub mod quadrature;
pub mod scalar;
pub mod weight;
pub mod weighted_eigen;

pub use basis::{SpectralBasis, SpectralField};
pub use error::{Error, Result};
pub use fd_oracle::{
    fd_cylinder_eigen, fd_cylinder_logistic, fd_eigen_laplace, fd_eigen_laplace_single, CylinderGrid, FdEigen, FdGrid,
    FdOracleValue,
};
pub use fracop::{apply_ls, apply_ts, energy_profile, extend_eval, ExtensionField, FracPower};
pub use logistic::{
    branch_continue, check_solution, jacobian, newton_solve, residual, Branch, BranchOptions, LogisticState,
};
pub use scalar::Scalar;
pub use weight::Weight;
pub use weighted_eigen::{
    assemble_m, assemble_m_analytic, positivity_scan, rayleigh_residual, smallest_positive_eigen, EigenPair,
    WeightMatrix,
};

pub type Basis = SpectralBasis<f64>;
pub type Field = SpectralField<f64>;
pub type Power = FracPower<f64>;
pub type WeightF64 = Weight<f64>;
pub type Eigen = EigenPair<f64>;
pub type Basis32 = SpectralBasis<f32>;
pub type Field32 = SpectralField<f32>;
pub type Cylinder = CylinderGrid<f64>;
