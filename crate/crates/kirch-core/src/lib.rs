//! Structure learning for conservation-law networks.
//!
//! A steady-state network obeying a linear conservation law couples injections
//! `x` and node potentials `y` through a sparse, positive definite *balance
//! matrix*: `x = B* y`. Given i.i.d. samples of `y` (injections drawn with a
//! known covariance), this crate estimates the support of `B*` by solving an
//! l1-regularized log-determinant maximum-likelihood program
//!
//! ```text
//!   minimize_{B > 0}   tr(D B S B D) - log det(B^2) + lambda * ||B||_{1,off}
//! ```
//!
//! where `S` is the sample covariance of `y` and `D` is the inverse square
//! root of the injection covariance. The crate is organized as:
//!
//! * [`sym`] — dense symmetric matrices, Jacobi eigendecomposition, Cholesky,
//!   norms, and the Kronecker-block products used by the theory checks;
//! * [`graph`] — balance-matrix construction for chains, grids, and explicit
//!   edge lists (optionally as reduced Laplacians);
//! * [`sample`] — seeded, reproducible draws of potentials and their sample
//!   covariance;
//! * [`solver`] — the proximal-gradient solver for the program above, with a
//!   positive-definiteness safeguard and an off-diagonal soft-threshold step;
//! * [`baseline`] — graphical-lasso baselines (square-root and two-hop
//!   support rules);
//! * [`diag`] — executable versions of the recovery theory: incoherence,
//!   Hessian regularity, the sample-complexity constants, and the
//!   primal-dual-witness check;
//! * [`score`] — support/sign/error metrics for recovery experiments.
//!
//! The library is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded use. All routines are deterministic: identical
//! inputs and seeds produce bit-identical outputs.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod baseline;
pub mod diag;
mod error;
pub mod graph;
pub mod sample;
pub mod score;
pub mod solver;
pub mod sym;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
