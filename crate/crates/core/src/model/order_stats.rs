//! Exact moments of the Dirichlet order statistics.
//!
//! With `Y_1, ..., Y_n` i.i.d. Gamma(β, 1) and `S = Σ Y_k`, the vector
//! `Y / S` is Dirichlet(β, ..., β) and independent of `S`. Hence
//! `⟨θ_(r)^m⟩ = ⟨Y_(r)^m⟩ Γ(nβ) / Γ(nβ + m)`, and the `r`-th largest of the
//! `Y_k` has density `n!/((n-r)!(r-1)!) f(y) φ(y)^{n-r} (1-φ(y))^{r-1}`.
//! Everything below is evaluated in log space: at `n = 44` the powers of `φ`
//! underflow long before the integrand is negligible.

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::Serialize;

use super::{DirichletModel, ModelError, RankedSpectrum, Result};
use crate::numerics::{
    integrate_semi_infinite_regular, inverse_regularized_incomplete_gamma, ln_gamma,
    ln_incomplete_gamma_pq, Tolerance,
};
use crate::Scalar;

/// First two moments of `θ_(r)` and the relative fluctuation
/// `ε_r = (⟨θ_(r)²⟩ - ⟨θ_(r)⟩²) / ⟨θ_(r)⟩²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderStatMoments<T> {
    pub rank: usize,
    pub mean: T,
    pub second_moment: T,
    pub relative_fluctuation: T,
}

/// Constants of `χ_r(y; m)` that do not depend on `y`.
struct ChiTerms<T> {
    ln_const: T,
    beta: T,
    ln_gamma_beta: T,
    lower_power: usize,
    upper_power: usize,
    m: usize,
}

impl<T: Scalar> ChiTerms<T> {
    fn new(model: &DirichletModel<T>, r: usize, m: usize) -> Self {
        let n = model.n();
        let beta = model.beta();
        let nb = T::from_count(n) * beta;
        let ln_gamma_beta = ln_gamma(beta);
        let ln_fact = |k: usize| ln_gamma(T::from_count(k + 1));
        let ln_const = ln_gamma(nb) - ln_gamma(nb + T::from_count(m)) + ln_fact(n)
            - ln_fact(n - r)
            - ln_fact(r - 1)
            - ln_gamma_beta;
        Self {
            ln_const,
            beta,
            ln_gamma_beta,
            lower_power: n - r,
            upper_power: r - 1,
            m,
        }
    }

    /// `ln[y^m χ_r(y; m) / y^{β-1}]`: the integrand of the m-th moment with
    /// the endpoint singularity factored out.
    fn ln_regular(&self, y: T) -> T {
        if y <= T::zero() {
            return if self.m == 0 && self.lower_power == 0 {
                self.ln_const
            } else {
                T::neg_infinity()
            };
        }
        let (ln_p, ln_q) = ln_incomplete_gamma_pq(y, self.beta, self.ln_gamma_beta);
        let mut acc = self.ln_const - y;
        if self.m > 0 {
            acc = acc + T::from_count(self.m) * y.ln();
        }
        if self.lower_power > 0 {
            acc = acc + T::from_count(self.lower_power) * ln_p;
        }
        if self.upper_power > 0 {
            acc = acc + T::from_count(self.upper_power) * ln_q;
        }
        acc
    }

    /// `ln χ_r(y; m)`.
    fn ln_chi(&self, y: T) -> T {
        if y <= T::zero() {
            // χ ~ y^{β(n-r+1)-1} as y → 0
            let exponent = self.beta * T::from_count(self.lower_power + 1) - T::one();
            return if exponent > T::zero() {
                T::neg_infinity()
            } else if exponent < T::zero() {
                T::infinity()
            } else {
                // β(n-r+1) = 1: φ^{n-r} y^{β-1} → y^{β(n-r)+β-1} / Γ(β+1)^{n-r}
                let lp = T::from_count(self.lower_power);
                self.ln_const - lp * ln_gamma(self.beta + T::one())
            };
        }
        let (ln_p, ln_q) = ln_incomplete_gamma_pq(y, self.beta, self.ln_gamma_beta);
        let mut acc = self.ln_const + (self.beta - T::one()) * y.ln() - y;
        if self.lower_power > 0 {
            acc = acc + T::from_count(self.lower_power) * ln_p;
        }
        if self.upper_power > 0 {
            acc = acc + T::from_count(self.upper_power) * ln_q;
        }
        acc
    }
}

/// `ln χ_r(y; m)`.
pub fn ln_chi_r_density<T: Scalar>(model: &DirichletModel<T>, r: usize, m: usize, y: T) -> Result<T> {
    model.check_rank(r)?;
    if !(y >= T::zero()) {
        return Err(ModelError::InvalidModel(format!("y = {y}, need y >= 0")));
    }
    Ok(ChiTerms::new(model, r, m).ln_chi(y))
}

/// `χ_r(y; m) = Γ(nβ)/Γ(nβ+m) · n!/((n-r)!(r-1)!) · y^{β-1} e^{-y}/Γ(β) · φ^{n-r} (1-φ)^{r-1}`.
///
/// `χ_r(·; 0)` is the density of the `r`-th largest of `n` i.i.d. Gamma(β, 1)
/// variates, and `∫ y^m χ_r(y; m) dy = ⟨θ_(r)^m⟩`.
pub fn chi_r_density<T: Scalar>(model: &DirichletModel<T>, r: usize, m: usize, y: T) -> Result<T> {
    ln_chi_r_density(model, r, m, y).map(|v| v.exp())
}

/// `⟨θ_(r)^m⟩` with the default quadrature tolerance.
pub fn moment<T: Scalar>(model: &DirichletModel<T>, r: usize, m: usize) -> Result<T> {
    moment_with_tol(model, r, m, &Tolerance::quadrature())
}

pub fn moment_with_tol<T: Scalar>(
    model: &DirichletModel<T>,
    r: usize,
    m: usize,
    tol: &Tolerance<T>,
) -> Result<T> {
    model.check_rank(r)?;
    let terms = ChiTerms::new(model, r, m);
    let result = integrate_semi_infinite_regular(
        |y| terms.ln_regular(y).exp(),
        model.beta() - T::one(),
        tol,
    )?;
    Ok(result.value)
}

/// Means, second moments and relative fluctuation at rank `r`.
pub fn order_stat_moments<T: Scalar>(model: &DirichletModel<T>, r: usize) -> Result<OrderStatMoments<T>> {
    let mean = moment(model, r, 1)?;
    let second_moment = moment(model, r, 2)?;
    Ok(OrderStatMoments {
        rank: r,
        mean,
        second_moment,
        relative_fluctuation: fluctuation(mean, second_moment),
    })
}

fn fluctuation<T: Scalar>(mean: T, second: T) -> T {
    // roundoff can push a vanishing variance slightly negative
    ((second - mean * mean) / (mean * mean)).max(T::zero())
}

/// `ε_r` from the exact first and second moments.
pub fn relative_fluctuation_exact<T: Scalar>(model: &DirichletModel<T>, r: usize) -> Result<T> {
    Ok(order_stat_moments(model, r)?.relative_fluctuation)
}

fn normalize<T: Scalar>(means: Vec<T>) -> Result<RankedSpectrum<T>> {
    let n = means.len();
    let sum: T = means.iter().copied().sum();
    let allowed = T::c(1e-6).max(T::precision_floor() * T::from_count(n));
    if !((sum - T::one()).abs() <= allowed) {
        return Err(ModelError::Normalization { sum: sum.as_f64() });
    }
    RankedSpectrum::new(means.into_iter().map(|f| f / sum).collect())
}

/// `(⟨θ_(1)⟩, ..., ⟨θ_(n)⟩)`, checked to sum to 1 within 1e-6 and then
/// renormalized exactly. Ranks are integrated in parallel.
pub fn expected_spectrum<T: Scalar>(model: &DirichletModel<T>) -> Result<RankedSpectrum<T>> {
    let means = (1..=model.n())
        .into_par_iter()
        .map(|r| moment(model, r, 1))
        .collect::<Result<Vec<T>>>()?;
    normalize(means)
}

/// Closed-form approximation `r/n = 1 - φ(f̂_r nβ)`, i.e.
/// `f̂_r = φ^{-1}(1 - r/n) / (nβ)` for `r < n`.
///
/// The formula gives `f̂_n = 0`. The last rank instead receives the mass
/// left over by the others, capped at `f̂_{n-1}` so the result stays
/// nonincreasing. The curve is not normalized, so a plain vector is returned.
pub fn approx_spectrum<T: Scalar>(model: &DirichletModel<T>) -> Result<Vec<T>> {
    let n = model.n();
    let nb = T::from_count(n) * model.beta();
    let mut out = Vec::with_capacity(n);
    for r in 1..n {
        let p = T::one() - T::from_count(r) / T::from_count(n);
        out.push(inverse_regularized_incomplete_gamma(p, model.beta())? / nb);
    }
    let residual = (T::one() - out.iter().copied().sum::<T>()).max(T::zero());
    let last = residual.min(*out.last().expect("n >= 2"));
    out.push(last);
    Ok(out)
}

/// Memo of `⟨θ_(r)^m⟩` keyed by `(n, β, r, m)`.
///
/// Readers proceed concurrently; insertions are serialized by the lock.
#[derive(Debug, Default)]
pub struct MomentCache<T> {
    entries: RwLock<HashMap<(usize, u64, usize, usize), T>>,
    tol: Option<Tolerance<T>>,
}

impl<T: Scalar> MomentCache<T> {
    pub fn new() -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            tol: None,
        }
    }

    pub fn with_tolerance(tol: Tolerance<T>) -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            tol: Some(tol),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn moment(&self, model: &DirichletModel<T>, r: usize, m: usize) -> Result<T> {
        let key = (model.n(), model.beta().as_f64().to_bits(), r, m);
        if let Some(&v) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let tol = self.tol.unwrap_or_else(Tolerance::quadrature);
        let v = moment_with_tol(model, r, m, &tol)?;
        self.entries.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn expected_spectrum(&self, model: &DirichletModel<T>) -> Result<RankedSpectrum<T>> {
        let means = (1..=model.n())
            .into_par_iter()
            .map(|r| self.moment(model, r, 1))
            .collect::<Result<Vec<T>>>()?;
        normalize(means)
    }
}
