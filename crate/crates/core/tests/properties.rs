use std::sync::Arc;

use proptest::prelude::*;

use phonorank::corpus::{rank_spectrum, FrequencyVector, PhonemeInventory};
use phonorank::model::{expected_spectrum, DirichletModel, MomentCache, RankedSpectrum};
use phonorank::numerics::{inverse_regularized_incomplete_gamma, regularized_incomplete_gamma};
use phonorank::stylometry::{fit_beta, r_squared, rho0, rho1, ss_err, FitOptions};

fn inventory(n: usize) -> Arc<PhonemeInventory> {
    Arc::new(PhonemeInventory::new((0..n).map(|i| format!("p{i:02}")).collect()).unwrap())
}

fn probability_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("zero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn fv(inv: &Arc<PhonemeInventory>, f: Vec<f64>) -> FrequencyVector<f64> {
    FrequencyVector::new(Arc::clone(inv), f).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn incomplete_gamma_is_monotone(beta in 0.05f64..5.0, y in 0.0f64..60.0, dy in 1e-6f64..5.0) {
        let a = regularized_incomplete_gamma(y, beta).unwrap();
        let b = regularized_incomplete_gamma(y + dy, beta).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn inverse_round_trip(beta in 0.05f64..5.0, p in 1e-6f64..(1.0 - 1e-6)) {
        let y = inverse_regularized_incomplete_gamma(p, beta).unwrap();
        let back = regularized_incomplete_gamma(y, beta).unwrap();
        prop_assert!((back - p).abs() <= 1e-9, "p {p} beta {beta}: y {y} -> {back}");
    }

    #[test]
    fn distances_are_pseudometrics(
        (p, q, r) in (probability_vector(44), probability_vector(44), probability_vector(44))
    ) {
        let inv = inventory(44);
        let (p, q, r) = (fv(&inv, p), fv(&inv, q), fv(&inv, r));
        let d = |a: &FrequencyVector<f64>, b: &FrequencyVector<f64>| rho0(a, b).unwrap();
        let s = |a: &FrequencyVector<f64>, b: &FrequencyVector<f64>| {
            rho1(&rank_spectrum(a), &rank_spectrum(b)).unwrap()
        };
        prop_assert_eq!(d(&p, &q), d(&q, &p));
        prop_assert_eq!(s(&p, &q), s(&q, &p));
        prop_assert_eq!(d(&p, &p), 0.0);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&d(&p, &q)));
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-15);
        prop_assert!(s(&p, &r) <= s(&p, &q) + s(&q, &r) + 1e-15);
        prop_assert!(s(&p, &q) <= d(&p, &q) + 1e-15);
    }

    #[test]
    fn rho0_is_largest_event_difference(
        (p, q) in (2usize..=12).prop_flat_map(|n| (probability_vector(n), probability_vector(n)))
    ) {
        let n = p.len();
        let inv = inventory(n);
        let best = (0u32..1 << n)
            .map(|mask| {
                (0..n)
                    .filter(|&a| mask & (1 << a) != 0)
                    .map(|a| p[a] - q[a])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        let d = rho0(&fv(&inv, p), &fv(&inv, q)).unwrap();
        prop_assert!((d - best).abs() <= 1e-14, "{d} vs {best}");
    }

    #[test]
    fn spectrum_ignores_labels(p in probability_vector(12), shift in 0usize..12) {
        let inv = inventory(12);
        let mut rotated = p.clone();
        rotated.rotate_left(shift);
        let a = rank_spectrum(&fv(&inv, p));
        let b = rank_spectrum(&fv(&inv, rotated));
        prop_assert_eq!(a.freqs(), b.freqs());
    }
}

#[test]
fn rearrangement_on_many_pairs() {
    use rand::{Rng, SeedableRng};
    let inv = inventory(44);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut draw = || {
        let w: Vec<f64> = (0..44).map(|_| rng.gen::<f64>().powi(3)).collect();
        let s: f64 = w.iter().sum();
        fv(&inv, w.into_iter().map(|x| x / s).collect())
    };
    for _ in 0..10_000 {
        let (p, q) = (draw(), draw());
        let r0 = rho0(&p, &q).unwrap();
        let r1 = rho1(&rank_spectrum(&p), &rank_spectrum(&q)).unwrap();
        assert!(r1 <= r0 + 1e-15);
        assert_eq!(r0, rho0(&q, &p).unwrap());
    }
}

#[test]
fn expected_spectrum_sums_to_one() {
    for n in [2usize, 10, 44, 100] {
        for beta in [0.5, 0.61, 0.8, 1.0, 1.5] {
            let m = DirichletModel::new(n, beta).unwrap();
            let cache = MomentCache::new();
            let raw: f64 = (1..=n).map(|r| cache.moment(&m, r, 1).unwrap()).sum();
            assert!((raw - 1.0).abs() <= 1e-6, "n {n} beta {beta}: {raw}");
        }
    }
}

#[test]
fn uniform_spacings_oracle() {
    // β = 1 is the uniform density on the simplex, whose sorted coordinates
    // have means (1/n) Σ_{k=r}^n 1/k
    for n in [2usize, 3, 10, 44, 100] {
        let got = expected_spectrum(&DirichletModel::new(n, 1.0).unwrap()).unwrap();
        for r in 1..=n {
            let want: f64 = (r..=n).map(|k| 1.0 / k as f64).sum::<f64>() / n as f64;
            let g = got.at_rank(r).unwrap();
            assert!((g - want).abs() <= 1e-9, "n {n} r {r}: {g} vs {want}");
        }
    }
}

#[test]
fn larger_beta_is_more_homogeneous() {
    let cache = MomentCache::new();
    let mut prev: Option<RankedSpectrum<f64>> = None;
    for beta in [0.3, 0.5, 0.8, 1.2, 2.0] {
        let s = cache.expected_spectrum(&DirichletModel::new(44, beta).unwrap()).unwrap();
        if let Some(p) = &prev {
            assert!(s.at_rank(1) < p.at_rank(1));
            assert!(s.at_rank(44) > p.at_rank(44));
        }
        prev = Some(s);
    }
}

#[test]
fn fit_recovers_generating_beta() {
    let cache = MomentCache::new();
    for beta in [0.55f64, 0.61, 0.8, 0.98] {
        let observed = cache.expected_spectrum(&DirichletModel::new(44, beta).unwrap()).unwrap();
        let fit = fit_beta(&observed, &FitOptions::default(), &cache).unwrap();
        assert!((fit.beta_hat - beta).abs() <= 1e-3, "{beta}: {}", fit.beta_hat);
        assert!(fit.r_squared >= 0.999999);
        assert_eq!(fit.ss_err, ss_err(fit.observed.freqs(), fit.predicted.freqs()).unwrap());
        assert_eq!(fit.r_squared, r_squared(fit.observed.freqs(), fit.predicted.freqs()).unwrap());
    }
}

#[test]
fn error_and_correlation_minimize_together() {
    use rand::{Rng, SeedableRng};
    let cache = MomentCache::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let grid: Vec<f64> = (40..=120).map(|k| k as f64 * 0.01).collect();
    let curves: Vec<Vec<f64>> = grid
        .iter()
        .map(|&b| {
            cache
                .expected_spectrum(&DirichletModel::new(44, b).unwrap())
                .unwrap()
                .into_vec()
        })
        .collect();
    for beta in [0.6, 0.75, 0.9] {
        let clean = cache.expected_spectrum(&DirichletModel::new(44, beta).unwrap()).unwrap();
        for _ in 0..5 {
            let noisy: Vec<f64> = clean
                .freqs()
                .iter()
                .map(|&f| f * (1.0 + 0.02 * (rng.gen::<f64>() - 0.5)))
                .collect();
            let observed = RankedSpectrum::from_unsorted({
                let s: f64 = noisy.iter().sum();
                noisy.iter().map(|x| x / s).collect()
            })
            .unwrap();
            let argmin = |score: &dyn Fn(&[f64]) -> f64| {
                (0..grid.len())
                    .min_by(|&a, &b| score(&curves[a]).total_cmp(&score(&curves[b])))
                    .unwrap()
            };
            let by_err = argmin(&|c| ss_err(observed.freqs(), c).unwrap());
            let by_corr = argmin(&|c| 1.0 - r_squared(observed.freqs(), c).unwrap());
            assert!(by_err.abs_diff(by_corr) <= 1, "beta {beta}: {} vs {}", grid[by_err], grid[by_corr]);
        }
    }
}
