//! Isotropic covariance matrix functions on compact two-point homogeneous spaces.
//!
//! The crate decides whether an `m × m` symmetric matrix function `C(ϑ)` on
//! `[0, π]` is a valid isotropic covariance on the spheres, the real, complex and
//! quaternionic projective spaces and the Cayley plane, or on all of them at
//! once. It also builds kernels through projective and Euclidean transfer
//! rules and simulates Gaussian vector fields from a Jacobi series.
//!
//! Everything here is `no_std` with `alloc`. File formats, the command line and
//! thread-parallel drivers live in the companion `isocov` crate.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

mod error;

pub mod coefficients;
pub mod euclid;
pub mod kernels;
pub mod linalg;
pub mod simulate;
pub mod spaces;
pub mod special;
pub mod validity;

pub use error::{Error, Result};
pub use linalg::Matrix;

/// Default PSD tolerance relative to the matrix scale.
pub const DEFAULT_TOL: f64 = 1e-9;
