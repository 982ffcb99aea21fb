use thiserror::Error;

/// Coarse error classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Domain,
    Convergence,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("phase error: g = {g} is not above the critical coupling g_c = {g_c:.6} (symmetry-broken phase is not supported)")]
    Phase { g: f64, g_c: f64 },

    #[error("precision loss at order {order}: error bound {bound:.3e} exceeds 10^(-D/2) of |E_p| = {magnitude:.3e}; raise the precision")]
    Precision {
        order: usize,
        bound: f64,
        magnitude: f64,
    },

    #[error("no term of least magnitude among {orders} orders; compute more orders")]
    NoTlm { orders: usize },

    #[error("singularity estimator did not converge (last r_c estimates: {partial:?}); supply r_c explicitly")]
    NonConvergence { partial: Vec<(usize, f64, f64)> },

    #[error("need at least {needed} nonzero Borel coefficients, got {got}")]
    InsufficientTerms { needed: usize, got: usize },

    #[error("quadrature did not reach tolerance {tol:.1e} (error estimate {estimate:.3e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("not converged: {0}")]
    Convergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Domain(_) | Error::Phase { .. } => ErrorCategory::Domain,
            Error::Parse(_) => ErrorCategory::Usage,
            Error::Precision { .. }
            | Error::NoTlm { .. }
            | Error::NonConvergence { .. }
            | Error::InsufficientTerms { .. }
            | Error::Quadrature { .. }
            | Error::Convergence(_) => ErrorCategory::Convergence,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
