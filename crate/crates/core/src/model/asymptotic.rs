//! Saddle-point asymptotics for `1 ≪ r ≪ n`.
//!
//! For large `n - r` and `r`, `χ_r(y; m)` is close to a Gaussian centred at
//! the quantile `y₀` with `φ(y₀) = (n - r)/n`. These formulas are only used
//! for diagnostics; fitting always goes through the exact moments.

use super::{DirichletModel, ModelError, Result};
use crate::numerics::{inverse_regularized_incomplete_gamma, ln_gamma};
use crate::Scalar;

/// `y₀` solving `φ(y₀) = (n - r)/n`.
pub fn saddle_point<T: Scalar>(model: &DirichletModel<T>, r: usize) -> Result<T> {
    let n = model.n();
    if r == 0 || r >= n {
        return Err(ModelError::RankOutOfRange { rank: r, n: n - 1 });
    }
    let p = T::from_count(n - r) / T::from_count(n);
    Ok(inverse_regularized_incomplete_gamma(p, model.beta())?)
}

/// Leading-order mean `⟨θ_(r)⟩ ≈ y₀ / (nβ)`.
pub fn asymptotic_mean<T: Scalar>(model: &DirichletModel<T>, r: usize) -> Result<T> {
    let y0 = saddle_point(model, r)?;
    Ok(y0 / (T::from_count(model.n()) * model.beta()))
}

/// `ε_r ≈ [β(n-r)r/n² · Γ(β)² y₀^{-2β} e^{2y₀} - 1] / (nβ + 1)`.
pub fn relative_fluctuation_asymptotic<T: Scalar>(model: &DirichletModel<T>, r: usize) -> Result<T> {
    let y0 = saddle_point(model, r)?;
    let n = T::from_count(model.n());
    let beta = model.beta();
    let rr = T::from_count(r);
    let weight = beta * (n - rr) * rr / (n * n);
    let ln_factor = T::c(2.0) * ln_gamma(beta) - T::c(2.0) * beta * y0.ln() + T::c(2.0) * y0;
    Ok((weight * ln_factor.exp() - T::one()) / (n * beta + T::one()))
}
