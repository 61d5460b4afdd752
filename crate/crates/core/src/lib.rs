//! Two-level algebraic multigrid laboratory built around relaxation dynamics.
//!
//! Everything in this crate is derived from a stationary relaxation
//! `x <- x + M(b - Ax)` and its error propagator `T = I - MA`: coarse/fine
//! splittings and transfer bases ([`splitting`]), the lag-dependent memory
//! operators that arise when fine variables are eliminated from the error
//! evolution ([`memory`]), four idealized two-level solvers ranging from plain
//! Petrov-Galerkin to an exact one-cycle direct method ([`schemes`]), and
//! constructions of transfer operators themselves: ideal, flow-improved, and
//! spectral ([`transfer`]).
//!
//! All operator algebra is dense complex double precision ([`linalg`]); sparse
//! storage exists for problem generation and file I/O ([`problems`]). The
//! [`paths`] module re-derives the memory weights by explicit path enumeration
//! on the propagator graph and serves as an independent ground truth for the
//! matrix-form operators on tiny instances.

pub mod error;
pub mod linalg;
pub mod memory;
pub mod paths;
pub mod problems;
pub mod relaxation;
pub mod schemes;
pub mod splitting;
pub mod transfer;
pub mod util;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Scalar, SparseMatrix, Vector};
