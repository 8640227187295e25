//! Error taxonomy shared by all modules.
//!
//! Variants split into three families that callers treat differently:
//! invalid input (rejected before any computation), out-of-domain evaluation
//! points, and numerical failures (singular solves, indefinite matrices,
//! exhausted quadrature budgets). The CLI maps the first two to exit code 2
//! and the last to exit code 3.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Construction-time validation failure (bad cavity, bad truncation, ...).
    InvalidInput(String),
    /// Evaluation point outside the domain of the requested quantity.
    OutOfDomain {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    /// A matrix handed to a Hermitian-only routine was not Hermitian.
    NotHermitian { residual: f64, tolerance: f64 },
    /// Linear solve rejected: singular to working precision or condition
    /// estimate above the documented 1e12 threshold.
    IllConditioned { condition: f64 },
    /// A matrix required to be positive definite had non-positive eigenvalues.
    /// Carries the full spectrum so the failure is diagnosable.
    NotPositiveDefinite { eigenvalues: Vec<f64> },
    /// Adaptive quadrature exhausted its subdivision budget. Carries the
    /// partial estimate and the error bound it reached.
    QuadratureBudget {
        partial: Complex64,
        error_estimate: f64,
        tolerance: f64,
    },
    /// Any of the above, raised while evaluating a spectral grid, annotated
    /// with the node coordinates it occurred at.
    AtGridNode {
        x: f64,
        xp: f64,
        omega: f64,
        source: alloc::boxed::Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::OutOfDomain {
                what,
                value,
                min,
                max,
            } => write!(f, "{what} = {value} outside [{min}, {max}]"),
            Error::NotHermitian {
                residual,
                tolerance,
            } => write!(
                f,
                "matrix not Hermitian: residual {residual:.3e} exceeds {tolerance:.3e}"
            ),
            Error::IllConditioned { condition } => write!(
                f,
                "linear system singular or ill-conditioned: condition estimate {condition:.3e}"
            ),
            Error::NotPositiveDefinite { eigenvalues } => {
                write!(f, "matrix not positive definite; spectrum: [")?;
                for (i, ev) in eigenvalues.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{ev:.6e}")?;
                }
                write!(f, "]")
            }
            Error::QuadratureBudget {
                partial,
                error_estimate,
                tolerance,
            } => write!(
                f,
                "quadrature budget exhausted: partial {} + {}i, error estimate {:.3e} > tol {:.3e}",
                partial.re, partial.im, error_estimate, tolerance
            ),
            Error::AtGridNode {
                x,
                xp,
                omega,
                source,
            } => write!(f, "at grid node (x={x}, x'={xp}, omega={omega}): {source}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

impl Error {
    /// True for validation-type errors (CLI exit 2), false for numerical
    /// failures (CLI exit 3).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidInput(_) | Error::OutOfDomain { .. } | Error::NotHermitian { .. } => {
                true
            }
            Error::AtGridNode { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    /// Wrap an error with the grid coordinates it was raised at.
    pub fn at_grid_node(self, x: f64, xp: f64, omega: f64) -> Self {
        Error::AtGridNode {
            x,
            xp,
            omega,
            source: alloc::boxed::Box::new(self),
        }
    }
}
