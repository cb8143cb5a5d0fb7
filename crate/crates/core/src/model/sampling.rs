//! Monte Carlo sampling from the symmetric Dirichlet density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DirichletModel, RankedSpectrum};
use crate::Scalar;

/// Gamma(shape, 1) variate.
///
/// Marsaglia–Tsang squeeze for `shape >= 1`; for `shape < 1` a
/// Gamma(shape + 1) variate is scaled by `U^{1/shape}`.
pub fn gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.gen();
        return gamma_variate(rng, shape + 1.0) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.gen();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Seeded stream of Dirichlet(β, ..., β) vectors.
///
/// ChaCha8 keeps the stream reproducible across runs and platforms for a
/// fixed seed. Each sampler is single-threaded; parallel use should create
/// one sampler per thread with distinct seeds.
#[derive(Debug, Clone)]
pub struct DirichletSampler<T> {
    model: DirichletModel<T>,
    rng: ChaCha8Rng,
    buf: Vec<f64>,
}

impl<T: Scalar> DirichletSampler<T> {
    pub fn new(model: DirichletModel<T>, seed: u64) -> Self {
        Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            buf: vec![0.0; model.n()],
        }
    }

    /// One probability vector in coordinate order.
    pub fn sample_vector(&mut self) -> Vec<T> {
        let shape = self.model.beta().as_f64();
        loop {
            let mut sum = 0.0;
            for slot in self.buf.iter_mut() {
                *slot = gamma_variate(&mut self.rng, shape);
                sum += *slot;
            }
            // all-zero draws are possible only through underflow at tiny β
            if sum > 0.0 {
                return self.buf.iter().map(|&g| T::c(g / sum)).collect();
            }
        }
    }

    /// One vector sorted into a spectrum.
    pub fn sample_spectrum(&mut self) -> RankedSpectrum<T> {
        let mut v = self.sample_vector();
        v.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        RankedSpectrum::new(v).expect("normalized gamma draws form a spectrum")
    }
}

impl<T: Scalar> Iterator for DirichletSampler<T> {
    type Item = RankedSpectrum<T>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.sample_spectrum())
    }
}

/// `count` sorted samples; identical for identical `(model, count, seed)`.
pub fn sample_spectra<T: Scalar>(
    model: DirichletModel<T>,
    count: usize,
    seed: u64,
) -> impl Iterator<Item = RankedSpectrum<T>> {
    DirichletSampler::new(model, seed).take(count)
}

/// Running per-rank sample moments of `θ_(r)` and `θ_(r)²` with standard
/// errors, for comparing Monte Carlo against quadrature.
#[derive(Debug, Clone)]
pub struct RankMoments {
    count: u64,
    // Welford accumulators for x and x² at each rank
    mean1: Vec<f64>,
    m2_1: Vec<f64>,
    mean2: Vec<f64>,
    m2_2: Vec<f64>,
}

impl RankMoments {
    pub fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean1: vec![0.0; n],
            m2_1: vec![0.0; n],
            mean2: vec![0.0; n],
            m2_2: vec![0.0; n],
        }
    }

    pub fn push<T: Scalar>(&mut self, values: &[T]) {
        assert_eq!(values.len(), self.mean1.len(), "sample length");
        self.count += 1;
        let k = self.count as f64;
        for (i, v) in values.iter().enumerate() {
            let x = v.as_f64();
            let x2 = x * x;
            let d1 = x - self.mean1[i];
            self.mean1[i] += d1 / k;
            self.m2_1[i] += d1 * (x - self.mean1[i]);
            let d2 = x2 - self.mean2[i];
            self.mean2[i] += d2 / k;
            self.m2_2[i] += d2 * (x2 - self.mean2[i]);
        }
    }

    /// Folds in moments accumulated over a disjoint set of samples.
    pub fn merge(&mut self, other: &RankMoments) {
        assert_eq!(other.mean1.len(), self.mean1.len(), "sample length");
        if other.count == 0 {
            return;
        }
        let (a, b) = (self.count as f64, other.count as f64);
        let total = a + b;
        let fold = |mean: &mut [f64], m2: &mut [f64], o_mean: &[f64], o_m2: &[f64]| {
            for i in 0..mean.len() {
                let d = o_mean[i] - mean[i];
                mean[i] += d * b / total;
                m2[i] += o_m2[i] + d * d * a * b / total;
            }
        };
        fold(&mut self.mean1, &mut self.m2_1, &other.mean1, &other.m2_1);
        fold(&mut self.mean2, &mut self.m2_2, &other.mean2, &other.m2_2);
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean1
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.mean2
    }

    /// Standard error of the sample mean at each rank.
    pub fn mean_stderr(&self) -> Vec<f64> {
        self.stderr(&self.m2_1)
    }

    /// Standard error of the sample second moment at each rank.
    pub fn second_moment_stderr(&self) -> Vec<f64> {
        self.stderr(&self.m2_2)
    }

    fn stderr(&self, m2: &[f64]) -> Vec<f64> {
        let k = self.count as f64;
        m2.iter()
            .map(|&s| if self.count > 1 { (s / (k - 1.0) / k).sqrt() } else { f64::INFINITY })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merged_moments_equal_sequential() {
        let rows: Vec<[f64; 2]> = (0..50).map(|k| [(k as f64 * 0.37).sin(), k as f64 * 0.1]).collect();
        let mut whole = RankMoments::new(2);
        rows.iter().for_each(|r| whole.push(r));
        let mut left = RankMoments::new(2);
        let mut right = RankMoments::new(2);
        rows[..17].iter().for_each(|r| left.push(r));
        rows[17..].iter().for_each(|r| right.push(r));
        left.merge(&right);
        assert_eq!(left.count(), 50);
        for i in 0..2 {
            assert!((left.mean()[i] - whole.mean()[i]).abs() < 1e-12);
            assert!((left.second_moment()[i] - whole.second_moment()[i]).abs() < 1e-12);
            assert!((left.mean_stderr()[i] - whole.mean_stderr()[i]).abs() < 1e-12);
            assert!((left.second_moment_stderr()[i] - whole.second_moment_stderr()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let m = DirichletModel::new(44, 0.8f64).unwrap();
        let a: Vec<_> = sample_spectra(m, 50, 7).collect();
        let b: Vec<_> = sample_spectra(m, 50, 7).collect();
        assert_eq!(a, b);
        let c: Vec<_> = sample_spectra(m, 50, 8).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn gamma_variate_mean_and_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &shape in &[0.3, 0.8, 1.0, 2.5] {
            let k = 200_000;
            let xs: Vec<f64> = (0..k).map(|_| gamma_variate(&mut rng, shape)).collect();
            let mean = xs.iter().sum::<f64>() / k as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            // mean = var = shape
            let se = (shape / k as f64).sqrt();
            assert!((mean - shape).abs() < 5.0 * se, "shape {shape}: mean {mean}");
            assert!((var - shape).abs() / shape < 0.05, "shape {shape}: var {var}");
        }
    }

    #[test]
    fn samples_are_spectra() {
        let m = DirichletModel::new(10, 0.1f64).unwrap();
        for s in sample_spectra(m, 1000, 3) {
            assert_eq!(s.len(), 10);
        }
    }

    #[test]
    fn rank_moments_of_constant() {
        let mut acc = RankMoments::new(2);
        for _ in 0..10 {
            acc.push(&[0.75f64, 0.25]);
        }
        assert_eq!(acc.mean(), &[0.75, 0.25]);
        assert!(acc.mean_stderr().iter().all(|&s| s.abs() < 1e-15));
    }
}
