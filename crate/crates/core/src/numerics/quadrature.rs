//! Adaptive Gauss–Kronrod quadrature on `[0, ∞)`.
//!
//! The domain is split into an initial panel `[0, a]`, integrated in the
//! variable `t = y^{s+1}` which removes an integrable `y^s` endpoint
//! singularity, and `[a, b]` integrated directly in `y`. The upper limit `b`
//! is where the log of the integrand has fallen 40 nats below the largest
//! value seen. Both regions share one error budget: the subinterval with the
//! largest error estimate is bisected until the total estimate is within
//! tolerance.

// node and weight tables are kept at their published precision
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{domain, NumericsError, Result, Tolerance};
use crate::Scalar;

/// Integral estimate with its error bound and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub evaluations: usize,
}

const TAIL_NATS: f64 = 40.0;

// Kronrod 21-point abscissae on [-1, 1] (positive half) and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss 10-point weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    region: usize,
}

impl<T: Scalar> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Scalar> Eq for Segment<T> {}
impl<T: Scalar> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn gk21<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::c(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::c(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half_len * T::c(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::c(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::c(WG[j / 2]) * pair;
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).abs();
    (value, error)
}

/// Integrates `f` over `[0, ∞)` where `f(y) ~ y^singular_exponent · (smooth)`
/// near zero and `f` decays at least exponentially.
pub fn integrate_semi_infinite<T, F>(
    f: F,
    singular_exponent: T,
    tol: &Tolerance<T>,
) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let s = singular_exponent;
    integrate_semi_infinite_regular(
        |y: T| {
            if y == T::zero() {
                T::zero()
            } else {
                f(y) * y.powf(-s)
            }
        },
        s,
        tol,
    )
}

/// Same integral, but the callback supplies the regular factor
/// `h(y) = f(y) / y^singular_exponent`, which must be finite at `y = 0`.
///
/// Use this form when `y^s` and the rest of the integrand are computed
/// together in log space, so the singular factor is never formed.
pub fn integrate_semi_infinite_regular<T, H>(
    h: H,
    singular_exponent: T,
    tol: &Tolerance<T>,
) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    H: Fn(T) -> T,
{
    const ROUTINE: &str = "integrate_semi_infinite";
    let s = singular_exponent;
    if !(s > -T::one()) || !s.is_finite() {
        return Err(domain(ROUTINE, "singular_exponent", s.as_f64(), "> -1"));
    }
    let power = s + T::one();
    let inv_power = T::one() / power;

    let full = |y: T| -> T {
        if y == T::zero() {
            T::zero()
        } else {
            h(y) * y.powf(s)
        }
    };
    // y = t^{1/(s+1)}, dy = y^{-s} dt / (s+1)
    let panel = |t: T| -> T {
        let y = t.powf(inv_power);
        h(y) * inv_power
    };

    let (cutoff, probes) = find_cutoff(&full);
    let mut evaluations = probes;
    let split = cutoff.min(T::one());

    let regions: [&dyn Fn(T) -> T; 2] = [&panel, &full];
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = T::zero();
    let mut frozen_value = T::zero();

    let panel_end = split.powf(power);
    for (region, a, b) in [(0usize, T::zero(), panel_end), (1usize, split, cutoff)] {
        if b > a {
            let (value, error) = gk21(&regions[region], a, b);
            evaluations += 21;
            total = total + value;
            total_err = total_err + error;
            heap.push(Segment {
                a,
                b,
                value,
                error,
                region,
            });
        }
    }

    let mut iterations = 0;
    while total_err > tol.allowed(total) {
        if iterations >= tol.max_iter() {
            return Err(NumericsError::NoConvergence {
                routine: ROUTINE,
                iterations,
                estimate: total.as_f64(),
                error_estimate: total_err.as_f64(),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = T::c(0.5) * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine resolution; keep its estimate
            total_err = total_err - worst.error;
            frozen_value = frozen_value + worst.value;
            continue;
        }
        let g = regions[worst.region];
        let (v1, e1) = gk21(&g, worst.a, mid);
        let (v2, e2) = gk21(&g, mid, worst.b);
        evaluations += 42;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            region: worst.region,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            region: worst.region,
        });
        iterations += 1;
        if heap.len() % 64 == 0 {
            // refresh the running sums against drift
            total = frozen_value + heap.iter().map(|s| s.value).sum::<T>();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: T = frozen_value + heap.iter().map(|s| s.value).sum::<T>();
    let error_estimate: T = heap.iter().map(|s| s.error).sum();
    if !value.is_finite() {
        return Err(NumericsError::NoConvergence {
            routine: ROUTINE,
            iterations,
            estimate: value.as_f64(),
            error_estimate: f64::INFINITY,
        });
    }
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// Probes `f` at `y = 2^k` and returns the first point past the largest
/// sampled value where `ln f` is at least 40 nats below that maximum.
fn find_cutoff<T: Scalar, F: Fn(T) -> T>(f: &F) -> (T, usize) {
    let two = T::c(2.0);
    let mut y = T::c(2f64.powi(-20));
    let mut peak = T::neg_infinity();
    let mut probes = 0;
    loop {
        let v = f(y).abs();
        probes += 1;
        let lv = v.ln();
        if lv > peak {
            peak = lv;
        }
        let past_peak = y >= T::one() && (lv < peak || v == T::zero());
        if past_peak && (lv < peak - T::c(TAIL_NATS) || v == T::zero()) {
            return (y, probes);
        }
        let next = y * two;
        if !next.is_finite() || next > T::max_value() / T::c(4.0) {
            return (y, probes);
        }
        y = next;
    }
}
