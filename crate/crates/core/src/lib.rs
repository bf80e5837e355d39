//! Analysis, reduction, and re-parametrization of sampled parametric models.
//!
//! A parametric model sampled on a grid — an N×M snapshot matrix plus
//! quadrature weights — induces a linear map from the state space to
//! functions on the parameter set. Everything in this crate flows from
//! that map and its adjoint:
//!
//! - [`model`] holds the snapshot set, the correlation `C = R*R`, the
//!   kernel Gram matrix, and the reproducing-property check;
//! - [`spectral`] computes the eigen/SVD triplet `(λ_m, v_m, s_m)` by the
//!   method of snapshots and truncates it to best n-term reduced models;
//! - [`factorization`] produces alternative factorizations `C = BᵀB`
//!   (Cholesky, symmetric square root), proves them unitarily equivalent,
//!   and derives the re-parametrized representation each one induces;
//! - [`kernel`] runs the same analysis on the kernel side: Nyström
//!   eigensolves of Fredholm problems, Mercer partial sums, and
//!   feature-map factorizations;
//! - [`stationary`] diagonalizes shift-invariant kernels on periodic grids
//!   by FFT and synthesizes stationary random realizations;
//! - [`tensor`] assembles high-dimensional response tensors and compresses
//!   them into tensor trains by sequential SVD;
//! - [`fields`] refines the machinery for vector-valued and SPD-valued
//!   models, keeping reduced SPD fields on the cone via matrix log/exp;
//! - [`io`] and [`report`] persist every artifact losslessly and emit
//!   spectrum decay reports.

pub mod error;
pub mod factorization;
pub mod fields;
pub mod io;
pub mod kernel;
pub(crate) mod linalg;
pub mod model;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stationary;
pub mod tensor;

pub use error::{Error, Result};
