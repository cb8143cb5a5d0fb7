use super::{domain, NumericsError, Result, Tolerance};
use crate::Scalar;

/// Finds `x` in `[lo, hi]` with `f(x) = target` for a nondecreasing `f`.
///
/// Illinois-modified regula falsi; falls back to bisection whenever the
/// secant point does not shrink the bracket enough.
pub fn solve_monotone<T, F>(f: F, lo: T, hi: T, target: T, tol: &Tolerance<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    const ROUTINE: &str = "solve_monotone";
    if !(lo < hi) {
        return Err(domain(ROUTINE, "lo", lo.as_f64(), "lo < hi"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a) - target;
    let mut fb = f(b) - target;
    if fa > T::zero() || fb < T::zero() {
        return Err(domain(ROUTINE, "target", target.as_f64(), "f(lo) <= target <= f(hi)"));
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..tol.max_iter() {
        let width = b - a;
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = T::c(0.5) * (a + b);
        }
        let fx = f(x) - target;
        if fx == T::zero() {
            return Ok(x);
        }
        if fx < T::zero() {
            a = x;
            fa = fx;
            if side == -1 {
                fb = fb * T::c(0.5);
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa = fa * T::c(0.5);
            }
            side = 1;
        }
        if b - a > T::c(0.5) * width {
            // poor secant progress: force a bisection
            let m = T::c(0.5) * (a + b);
            let fm = f(m) - target;
            if fm < T::zero() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            side = 0;
        }
        let mid = T::c(0.5) * (a + b);
        if T::c(0.5) * (b - a) <= tol.allowed(mid) {
            return Ok(mid);
        }
    }
    Err(NumericsError::NoConvergence {
        routine: ROUTINE,
        iterations: tol.max_iter(),
        estimate: (T::c(0.5) * (a + b)).as_f64(),
        error_estimate: (b - a).as_f64(),
    })
}
