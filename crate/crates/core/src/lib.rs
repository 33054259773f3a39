//! Estimation of sparse, fairness-constrained graph-shift operators from
//! graph-stationary nodal observations.
//!
//! The crate provides:
//!
//! - graph-shift operators (adjacency / Laplacian) and group assignments
//!   ([`graph`], [`groups`]);
//! - dyadic demographic-parity bias metrics in spatial, spectral and
//!   vectorized form ([`metrics`]);
//! - the half-vectorization operators that turn commutativity and
//!   eigenbasis constraints into linear maps ([`vectorize`]);
//! - stationary signal synthesis and covariance estimation ([`signal`]);
//! - FairSpecTemp estimators and baselines via accelerated proximal
//!   gradient ([`solver`]);
//! - numerical checkers for the convexity-equivalence conditions and the
//!   fairness-accuracy error bounds ([`guarantees`]);
//! - scenario generators, an experiment harness and a bias-thresholded
//!   investment backtest ([`synth`], [`experiment`], [`finance`]).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below cover the common case.

pub mod error;
pub mod experiment;
pub mod finance;
pub mod graph;
pub mod groups;
pub mod guarantees;
pub mod io;
pub mod metrics;
pub mod scalar;
pub mod signal;
pub mod solver;
pub mod synth;
pub mod vectorize;

pub use error::{Error, Result};
pub use graph::{Gso, GsoKind, ValidationReport};
pub use groups::GroupAssignment;
pub use scalar::Scalar;

/// Dense column vector alias.
pub type Col<T> = nalgebra::DVector<T>;
/// Dense matrix alias.
pub type Mat<T> = nalgebra::DMatrix<T>;

/// Double-precision instantiations, the default everywhere downstream.
pub type Gso64 = Gso<f64>;
pub type Mat64 = Mat<f64>;
pub type Col64 = Col<f64>;
