//! Quantum operations with indefinite time direction.
//!
//! The crate covers bistochastic channels and their two canonical
//! input-output inversions, the quantum time flip supermap and its
//! teleportation realization, Haar twirls and the operator inequalities
//! built from them, the two-box discrimination game, and a small SDP solver
//! that computes the optimal error of testers with definite time direction.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`.

// `!(x <= tol)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channels;
pub mod error;
pub mod game;
pub mod haar;
pub mod inversion;
pub mod linalg;
pub mod reproduce;
pub mod scalar;
pub mod teleport;
pub mod testersdp;
pub mod timeflip;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SystemDims};
pub use scalar::Real;

pub type Matrix = ComplexMatrix<f64>;
pub type C64 = num_complex::Complex<f64>;
