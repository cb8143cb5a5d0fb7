//! Least-squares fit of `β` to an observed rank-frequency spectrum.

use std::cell::RefCell;

use serde::Serialize;

use super::{Result, StylometryError};
use crate::corpus::ProfileMode;
use crate::model::{DirichletModel, MomentCache, RankedSpectrum};
use crate::numerics::{grid_scan, minimize_scalar, Tolerance};
use crate::Scalar;

fn check_lengths<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(StylometryError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// `Σ (f_k - f̂_k)²` over ranks.
pub fn ss_err<T: Scalar>(observed: &[T], predicted: &[T]) -> Result<T> {
    check_lengths(observed, predicted)?;
    Ok(observed
        .iter()
        .zip(predicted)
        .map(|(&o, &p)| (o - p) * (o - p))
        .sum())
}

/// Squared Pearson correlation between observed and predicted spectra.
pub fn r_squared<T: Scalar>(observed: &[T], predicted: &[T]) -> Result<T> {
    check_lengths(observed, predicted)?;
    if observed.len() < 2 {
        return Err(StylometryError::Degenerate("need at least two ranks".into()));
    }
    let k = T::from_count(observed.len());
    let mo = observed.iter().copied().sum::<T>() / k;
    let mp = predicted.iter().copied().sum::<T>() / k;
    let (mut cov, mut vo, mut vp) = (T::zero(), T::zero(), T::zero());
    for (&o, &p) in observed.iter().zip(predicted) {
        let (d_o, d_p) = (o - mo, p - mp);
        cov = cov + d_o * d_p;
        vo = vo + d_o * d_o;
        vp = vp + d_p * d_p;
    }
    if vo == T::zero() || vp == T::zero() {
        return Err(StylometryError::Degenerate("constant spectrum has no correlation".into()));
    }
    Ok((cov * cov / (vo * vp)).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    pub beta_min: T,
    pub beta_max: T,
    /// Stopping rule for the golden-section search in `β`.
    pub tol: Tolerance<T>,
    /// Spacing of the cross-check grid.
    pub grid_step: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            beta_min: T::c(0.1),
            beta_max: T::c(2.0),
            tol: Tolerance::new(T::c(1e-6), T::c(1e-6).max(T::precision_floor()), 200)
                .expect("valid default tolerance"),
            grid_step: T::c(0.01),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    pub beta_hat: T,
    pub ss_err: T,
    pub r_squared: T,
    pub predicted: RankedSpectrum<T>,
    pub observed: RankedSpectrum<T>,
    #[serde(serialize_with = "serialize_mode")]
    pub mode: Option<ProfileMode>,
    /// Set when the grid scan and the golden-section search disagree by more
    /// than one grid step, or the search hit the iteration limit.
    pub grid_warning: bool,
}

fn serialize_mode<S: serde::Serializer>(
    mode: &Option<ProfileMode>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match mode {
        Some(m) => s.serialize_str(&m.to_string()),
        None => s.serialize_none(),
    }
}

impl<T: Scalar> FitResult<T> {
    pub fn with_mode(mut self, mode: ProfileMode) -> Self {
        self.mode = Some(mode);
        self
    }
}

/// Finds `β` minimizing `ss_err(observed, ⟨θ_(·)⟩_β)`.
///
/// A golden-section search over `[beta_min, beta_max]` is cross-checked by
/// a grid scan; if they disagree the lower objective wins and
/// `grid_warning` is set.
pub fn fit_beta<T: Scalar>(
    observed: &RankedSpectrum<T>,
    options: &FitOptions<T>,
    cache: &MomentCache<T>,
) -> Result<FitResult<T>> {
    let (lo, hi) = (options.beta_min, options.beta_max);
    if !(lo > T::zero() && hi > lo && options.grid_step > T::zero()) {
        return Err(StylometryError::Degenerate(format!(
            "beta range [{lo}, {hi}] with step {}",
            options.grid_step
        )));
    }
    let n = observed.len();
    let obs = observed.freqs();
    let failure = RefCell::new(None);
    let objective = |beta: T| -> T {
        let value = DirichletModel::new(n, beta)
            .map_err(StylometryError::from)
            .and_then(|m| Ok(cache.expected_spectrum(&m)?))
            .and_then(|pred| ss_err(obs, pred.freqs()));
        value.unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            T::infinity()
        })
    };

    let golden = minimize_scalar(objective, lo, hi, &options.tol)?;
    let (grid_beta, grid_value) = grid_scan(objective, lo, hi, options.grid_step)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }

    let disagree = (golden.argmin - grid_beta).abs() > options.grid_step;
    let mut beta_hat = golden.argmin;
    if grid_value < golden.min_value && disagree {
        // the grid found a better basin; polish within one step of it
        let step = options.grid_step;
        let (a, b) = ((grid_beta - step).max(lo), (grid_beta + step).min(hi));
        beta_hat = minimize_scalar(objective, a, b, &options.tol)?.argmin;
    }
    let grid_warning = disagree || !golden.converged;
    if grid_warning {
        log::warn!(
            "fit: golden-section beta {} and grid beta {} disagree",
            golden.argmin,
            grid_beta
        );
    }

    let model = DirichletModel::new(n, beta_hat)?;
    let predicted = cache.expected_spectrum(&model)?;
    Ok(FitResult {
        beta_hat,
        ss_err: ss_err(obs, predicted.freqs())?,
        r_squared: r_squared(obs, predicted.freqs())?,
        observed: observed.clone(),
        predicted,
        mode: None,
        grid_warning,
    })
}
