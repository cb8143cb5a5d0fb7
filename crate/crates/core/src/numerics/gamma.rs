//! Log-gamma and the regularized incomplete gamma function.
//!
//! The lower function `P(β, y)` is evaluated by its power series for
//! `y < β + 1` and through the continued fraction for the upper function
//! `Q = 1 - P` otherwise, so that whichever of the two is small is always
//! computed directly and never as a difference.

use super::{domain, NumericsError, Result};
use crate::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_TERMS: usize = 100_000;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x < T::c(0.5) {
        // reflection
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::c(LANCZOS[0]);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::c(coef) / (x + T::from_count(i));
    }
    let t = x + T::c(LANCZOS_G + 0.5);
    T::c(0.5) * (T::c(2.0) * T::PI()).ln() + (x + T::c(0.5)) * t.ln() - t + acc.ln()
}

fn check_args<T: Scalar>(routine: &'static str, y: T, beta: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(domain(routine, "beta", beta.as_f64(), "beta > 0"));
    }
    if !(y >= T::zero()) {
        return Err(domain(routine, "y", y.as_f64(), "y >= 0"));
    }
    Ok(())
}

/// `φ(y) = P(β, y)`, the CDF of a Gamma(β, 1) variate.
pub fn regularized_incomplete_gamma<T: Scalar>(y: T, beta: T) -> Result<T> {
    check_args("regularized_incomplete_gamma", y, beta)?;
    let (ln_p, _) = ln_incomplete_gamma_pq(y, beta, ln_gamma(beta));
    Ok(ln_p.exp())
}

/// `1 - φ(y) = Q(β, y)`, computed without cancellation in the upper tail.
pub fn regularized_incomplete_gamma_upper<T: Scalar>(y: T, beta: T) -> Result<T> {
    check_args("regularized_incomplete_gamma_upper", y, beta)?;
    let (_, ln_q) = ln_incomplete_gamma_pq(y, beta, ln_gamma(beta));
    Ok(ln_q.exp())
}

/// Gamma(β, 1) density `y^{β-1} e^{-y} / Γ(β)`, the derivative of `φ`.
pub fn gamma_density<T: Scalar>(y: T, beta: T) -> Result<T> {
    check_args("gamma_density", y, beta)?;
    Ok(density(y, beta, ln_gamma(beta)))
}

fn density<T: Scalar>(y: T, beta: T, ln_gamma_beta: T) -> T {
    if y == T::zero() {
        return if beta < T::one() {
            T::infinity()
        } else if beta == T::one() {
            T::one()
        } else {
            T::zero()
        };
    }
    ((beta - T::one()) * y.ln() - y - ln_gamma_beta).exp()
}

/// `(ln P(β, y), ln Q(β, y))` with `lnΓ(β)` supplied by the caller.
///
/// No argument checking; `y >= 0`, `beta > 0` are assumed. Both logs stay
/// finite where the other function underflows, which is what the order
/// statistic densities need.
pub fn ln_incomplete_gamma_pq<T: Scalar>(y: T, beta: T, ln_gamma_beta: T) -> (T, T) {
    if y <= T::zero() {
        return (T::neg_infinity(), T::zero());
    }
    if y.is_infinite() {
        return (T::zero(), T::neg_infinity());
    }
    let ln_prefactor = beta * y.ln() - y - ln_gamma_beta;
    if y < beta + T::one() {
        let ln_p = series_sum(y, beta).ln() + ln_prefactor;
        let p = ln_p.exp();
        let ln_q = if p < T::c(0.5) {
            (-p).ln_1p()
        } else {
            (T::one() - p).ln()
        };
        (ln_p.min(T::zero()), ln_q)
    } else {
        let ln_q = continued_fraction(y, beta).ln() + ln_prefactor;
        let q = ln_q.exp();
        let ln_p = (-q).ln_1p();
        (ln_p, ln_q.min(T::zero()))
    }
}

/// `Σ_k y^k / (β (β+1) ... (β+k))`, so that `P = sum · y^β e^{-y} / Γ(β)`.
fn series_sum<T: Scalar>(y: T, beta: T) -> T {
    let eps = T::epsilon();
    let mut ap = beta;
    let mut del = T::one() / beta;
    let mut sum = del;
    for _ in 0..MAX_TERMS {
        ap = ap + T::one();
        del = del * y / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * eps {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of the continued fraction for `Q`, without the
/// `y^β e^{-y} / Γ(β)` prefactor.
fn continued_fraction<T: Scalar>(y: T, beta: T) -> T {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let mut b = y + T::one() - beta;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..=MAX_TERMS {
        let i = T::from_count(i);
        let an = -i * (i - beta);
        b = b + T::c(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < eps {
            break;
        }
    }
    h
}

/// Solves `φ(y; β) = p` for `y`.
///
/// Newton iterations on `ln P` (lower half) or `ln Q` (upper half) inside a
/// bracket that is shrunk on every step; a step leaving the bracket is
/// replaced by bisection (geometric once the bracket excludes zero).
pub fn inverse_regularized_incomplete_gamma<T: Scalar>(p: T, beta: T) -> Result<T> {
    const ROUTINE: &str = "inverse_regularized_incomplete_gamma";
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(domain(ROUTINE, "beta", beta.as_f64(), "beta > 0"));
    }
    if !(p >= T::zero() && p < T::one()) {
        return Err(domain(ROUTINE, "p", p.as_f64(), "0 <= p < 1"));
    }
    if p == T::zero() {
        return Ok(T::zero());
    }
    let lg = ln_gamma(beta);
    let lower_half = p < T::c(0.5);
    let target = if lower_half {
        p.ln()
    } else {
        (-p).ln_1p()
    };
    // F(y) is increasing in y in both halves
    let eval = |y: T| -> (T, T) {
        let (ln_p, ln_q) = ln_incomplete_gamma_pq(y, beta, lg);
        let dens = density(y, beta, lg);
        if lower_half {
            (ln_p - target, dens / ln_p.exp())
        } else {
            (target - ln_q, dens / ln_q.exp())
        }
    };

    let mut lo = T::zero();
    let mut hi = T::one().max(beta);
    while eval(hi).0 < T::zero() {
        lo = hi;
        hi = hi * T::c(2.0);
        if !hi.is_finite() {
            return Err(NumericsError::NoConvergence {
                routine: ROUTINE,
                iterations: 0,
                estimate: lo.as_f64(),
                error_estimate: f64::INFINITY,
            });
        }
    }

    // small-p start: P ≈ y^β / Γ(β+1)
    let mut y = (lo + hi) * T::c(0.5);
    if lower_half {
        let ln_start = (p.ln() + ln_gamma(beta + T::one())) / beta;
        if ln_start < T::min_positive_value().ln() {
            // the root is below the smallest representable positive value
            return Ok(T::zero());
        }
        let start = ln_start.exp();
        if start > lo && start < hi {
            y = start;
        }
    }

    let eps = T::epsilon();
    let max_iter = 300;
    for _ in 0..max_iter {
        let (f, df) = eval(y);
        if f == T::zero() {
            return Ok(y);
        }
        if f < T::zero() {
            lo = y;
        } else {
            hi = y;
        }
        // lower half: Newton in ln y, where ln P is close to linear
        let mut next = if lower_half {
            y * (-f / (y * df)).exp()
        } else {
            y - f / df
        };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo > T::zero() {
                (lo * hi).sqrt()
            } else {
                hi * T::c(0.5)
            };
        }
        let step = (next - y).abs();
        y = next;
        if step <= T::c(4.0) * eps * y || hi - lo <= T::c(4.0) * eps * hi {
            return Ok(y);
        }
    }
    Err(NumericsError::NoConvergence {
        routine: ROUTINE,
        iterations: max_iter,
        estimate: y.as_f64(),
        error_estimate: (hi - lo).as_f64(),
    })
}
