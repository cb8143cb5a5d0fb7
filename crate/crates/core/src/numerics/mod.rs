//! Special functions and one-dimensional numerical routines.
//!
//! Everything here is a pure function of its arguments and generic over
//! [`Scalar`](crate::Scalar), so it can be called from any number of threads.

mod gamma;
mod minimize;
mod quadrature;
mod roots;

pub use gamma::{
    gamma_density, inverse_regularized_incomplete_gamma, ln_gamma, ln_incomplete_gamma_pq,
    regularized_incomplete_gamma, regularized_incomplete_gamma_upper,
};
pub use minimize::{grid_scan, minimize_scalar, Minimum};
pub use quadrature::{integrate_semi_infinite, integrate_semi_infinite_regular, QuadratureResult};
pub use roots::solve_monotone;

use crate::Scalar;
use thiserror::Error;

/// Failures of the numerical routines.
///
/// Domain errors signal a caller bug (arguments outside the mathematical
/// domain). Convergence errors carry the best estimate that was reached.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("{routine}: argument {name} = {value} outside its domain ({expected})")]
    Domain {
        routine: &'static str,
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{routine}: no convergence after {iterations} iterations (estimate {estimate}, error {error_estimate})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        estimate: f64,
        error_estimate: f64,
    },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

pub(crate) fn domain(
    routine: &'static str,
    name: &'static str,
    value: f64,
    expected: &'static str,
) -> NumericsError {
    NumericsError::Domain {
        routine,
        name,
        value,
        expected,
    }
}

/// Stopping rule for iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    rel: T,
    abs: T,
    max_iter: usize,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(rel: T, abs: T, max_iter: usize) -> Result<Self> {
        if !(rel > T::zero()) || !rel.is_finite() {
            return Err(NumericsError::InvalidTolerance("rel must be > 0"));
        }
        if !(abs >= T::zero()) || !abs.is_finite() {
            return Err(NumericsError::InvalidTolerance("abs must be >= 0"));
        }
        if max_iter == 0 {
            return Err(NumericsError::InvalidTolerance("max_iter must be >= 1"));
        }
        Ok(Self { rel, abs, max_iter })
    }

    pub fn rel(&self) -> T {
        self.rel
    }

    pub fn abs(&self) -> T {
        self.abs
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Quadrature default: relative 1e-10, clamped to what the type can deliver.
    pub fn quadrature() -> Self {
        Self {
            rel: T::c(1e-10).max(T::precision_floor()),
            abs: T::zero(),
            max_iter: 2000,
        }
    }

    /// Allowed absolute error for a quantity of size `value`.
    pub fn allowed(&self, value: T) -> T {
        self.abs.max(self.rel * value.abs())
    }
}
