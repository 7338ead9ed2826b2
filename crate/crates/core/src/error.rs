use alloc::string::String;

/// Errors reported by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric parameter lies outside its admissible range.
    #[error("parameter `{name}` out of range: {value}")]
    OutOfRange {
        /// Parameter name.
        name: &'static str,
        /// Offending value.
        value: f64,
    },
    /// Structurally invalid input.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Sizes of two inputs disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Expected size.
        expected: usize,
        /// Size actually supplied.
        found: usize,
    },
    /// The operation is not available for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A contiguous identity does not apply to the requested parameters.
    #[error("identity not applicable: {0}")]
    NotApplicable(String),
    /// A matrix that must be symmetric is not.
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    /// A matrix that must be PSD has a decisively negative eigenvalue.
    #[error("matrix is indefinite (min eigenvalue {min_eigenvalue:e}, scale {scale:e})")]
    Indefinite {
        /// Smallest eigenvalue.
        min_eigenvalue: f64,
        /// Largest absolute eigenvalue.
        scale: f64,
    },
    /// Kernel evaluation produced a non-finite entry.
    #[error("kernel evaluation is not finite at theta = {0}")]
    NonFinite(f64),
    /// The quadrature order cannot resolve the requested degree.
    #[error("quadrature order {quad_order} is below n_max {n_max}")]
    Aliasing {
        /// Requested quadrature order.
        quad_order: usize,
        /// Requested maximal degree.
        n_max: usize,
    },
}

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_jacobi_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha });
    }
    if !(beta.is_finite() && beta > -1.0) {
        return Err(Error::OutOfRange { name: "beta", value: beta });
    }
    Ok(())
}
