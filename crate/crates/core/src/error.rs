use thiserror::Error;

/// Errors raised by the assurance computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched vector or matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A covariance matrix failed the symmetry or semidefiniteness check.
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    /// A matrix that has to be inverted is singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// `uᵀ M u` is not strictly positive, so the standardized contrast is undefined.
    #[error("degenerate contrast: u'Mu = {0:e}")]
    DegenerateContrast(f64),

    /// The contrast is not in the row space of the design matrix.
    #[error("contrast is not estimable: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotEstimable { residual: f64, tolerance: f64 },

    /// Posterior inverse-gamma parameters are not both positive.
    #[error("improper posterior: shape {shape}, scale {scale}")]
    ImproperPosterior { shape: f64, scale: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
