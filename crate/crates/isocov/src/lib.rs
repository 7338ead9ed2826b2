//! File formats, parallel simulation and the command-line front end for
//! isotropic covariance matrix functions.
//!
//! The numerical work lives in [`isocov_core`]; this crate loads kernel
//! descriptions from JSON and CSV, writes JSON reports and plot-ready CSV, and
//! runs simulation replicates on a thread pool.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod cli;
pub mod io;
pub mod parallel;

pub use io::IoError;
