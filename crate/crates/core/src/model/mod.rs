//! The symmetric Dirichlet density and the order statistics of its
//! coordinates.
//!
//! A [`DirichletModel`] with `n` categories and concentration `β` describes
//! random probability vectors `(θ_1, ..., θ_n)`. Sorting each vector in
//! nonincreasing order gives `θ_(1) ≥ ... ≥ θ_(n)`; the expected sorted
//! vector is the model's rank-frequency prediction.

mod asymptotic;
mod order_stats;
mod sampling;

pub use asymptotic::{asymptotic_mean, relative_fluctuation_asymptotic, saddle_point};
pub use order_stats::{
    approx_spectrum, chi_r_density, expected_spectrum, ln_chi_r_density, moment, moment_with_tol,
    order_stat_moments, relative_fluctuation_exact, MomentCache, OrderStatMoments,
};
pub use sampling::{gamma_variate, sample_spectra, DirichletSampler, RankMoments};

use serde::Serialize;
use thiserror::Error;

use crate::numerics::NumericsError;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("rank {rank} outside 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("expected spectrum sums to {sum}, not 1")]
    Normalization { sum: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Symmetric Dirichlet density over `n` categories with common parameter `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletModel<T> {
    n: usize,
    beta: T,
}

impl<T: Scalar> DirichletModel<T> {
    pub fn new(n: usize, beta: T) -> Result<Self> {
        if n < 2 {
            return Err(ModelError::InvalidModel(format!("n = {n}, need n >= 2")));
        }
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(ModelError::InvalidModel(format!("beta = {beta}, need beta > 0")));
        }
        Ok(Self { n, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub(crate) fn check_rank(&self, rank: usize) -> Result<()> {
        if rank == 0 || rank > self.n {
            Err(ModelError::RankOutOfRange { rank, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// Frequencies sorted in nonincreasing order and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RankedSpectrum<T> {
    freqs: Vec<T>,
}

/// Allowed deviation of `Σ f_r` from 1 for a spectrum of length `n`.
pub fn sum_tolerance<T: Scalar>(n: usize) -> T {
    T::c(1e-9).max(T::epsilon() * T::c(16.0) * T::from_count(n.max(1)))
}

impl<T: Scalar> RankedSpectrum<T> {
    /// Validates an already sorted frequency vector.
    pub fn new(freqs: Vec<T>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(ModelError::InvalidSpectrum("empty".into()));
        }
        for (r, &f) in freqs.iter().enumerate() {
            if !(f >= T::zero() && f <= T::one()) {
                return Err(ModelError::InvalidSpectrum(format!(
                    "frequency at rank {} is {f}",
                    r + 1
                )));
            }
        }
        if let Some(r) = freqs.windows(2).position(|w| w[1] > w[0]) {
            return Err(ModelError::InvalidSpectrum(format!(
                "increases from rank {} to {}",
                r + 1,
                r + 2
            )));
        }
        let sum: T = freqs.iter().copied().sum();
        if (sum - T::one()).abs() > sum_tolerance::<T>(freqs.len()) {
            return Err(ModelError::InvalidSpectrum(format!("sums to {sum}")));
        }
        Ok(Self { freqs })
    }

    /// Sorts arbitrary-order frequencies and validates them.
    pub fn from_unsorted(mut freqs: Vec<T>) -> Result<Self> {
        if freqs.iter().any(|f| f.is_nan()) {
            return Err(ModelError::InvalidSpectrum("NaN frequency".into()));
        }
        freqs.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
        Self::new(freqs)
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Frequency at 1-based rank `r`.
    pub fn at_rank(&self, r: usize) -> Option<T> {
        r.checked_sub(1).and_then(|i| self.freqs.get(i).copied())
    }

    pub fn into_vec(self) -> Vec<T> {
        self.freqs
    }
}
