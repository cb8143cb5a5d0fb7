//! Golden-section minimization and uniform grid scans.

use super::{domain, Result, Tolerance};
use crate::Scalar;

/// Outcome of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub argmin: T,
    pub min_value: T,
    /// False when `max_iter` ran out before the bracket shrank to `tol.abs`;
    /// `argmin` is then the midpoint of the last bracket.
    pub converged: bool,
    pub iterations: usize,
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
///
/// `f` is assumed unimodal on the interval; this is not checked. The search
/// stops once the bracket half-width is at most `tol.abs()` (or
/// `tol.rel() * |x|` when `abs` is zero).
pub fn minimize_scalar<T, F>(f: F, lo: T, hi: T, tol: &Tolerance<T>) -> Result<Minimum<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain("minimize_scalar", "lo", lo.as_f64(), "finite lo < hi"));
    }
    let inv_phi = (T::c(5.0).sqrt() - T::one()) * T::c(0.5);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let half_width = |a: T, b: T| T::c(0.5) * (b - a);
    let target = |a: T, b: T| {
        if tol.abs() > T::zero() {
            tol.abs()
        } else {
            tol.rel() * (T::c(0.5) * (a + b)).abs()
        }
    };

    let mut iterations = 0;
    while half_width(a, b) > target(a, b) {
        if iterations >= tol.max_iter() {
            let mid = T::c(0.5) * (a + b);
            return Ok(Minimum {
                argmin: mid,
                min_value: f(mid),
                converged: false,
                iterations,
            });
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
        if !(c < d) {
            // bracket collapsed below machine resolution
            break;
        }
    }
    let (argmin, min_value) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(Minimum {
        argmin,
        min_value,
        converged: true,
        iterations,
    })
}

/// Evaluates `f` on `lo, lo + step, ...` up to `hi` (inclusive, within
/// rounding) and returns the sample with the smallest value.
pub fn grid_scan<T, F>(f: F, lo: T, hi: T, step: T) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if !(lo <= hi) || !(step > T::zero()) {
        return Err(domain("grid_scan", "step", step.as_f64(), "step > 0 and lo <= hi"));
    }
    let count = ((hi - lo) / step + T::c(1e-9)).floor().to_usize().unwrap_or(0);
    let mut best = (lo, f(lo));
    for i in 1..=count {
        let x = lo + step * T::from_count(i);
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}
