//! Variational distances between texts.
//!
//! `ρ₀` compares phoneme-aligned frequency vectors, `ρ₁` compares the sorted
//! spectra and so ignores which phoneme owns which rank. Both are half the
//! L1 distance, so they lie in `[0, 1]`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, StylometryError};
use crate::corpus::{rank_spectrum, FrequencyVector};
use crate::model::RankedSpectrum;
use crate::Scalar;

fn half_l1<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<T>() * T::c(0.5)
}

/// `½ Σ_α |f[α|i] - f[α|j]|` over a shared inventory.
pub fn rho0<T: Scalar>(fv_i: &FrequencyVector<T>, fv_j: &FrequencyVector<T>) -> Result<T> {
    if fv_i.inventory() != fv_j.inventory() {
        return Err(StylometryError::InventoryMismatch);
    }
    Ok(half_l1(fv_i.freqs(), fv_j.freqs()))
}

/// `½ Σ_k |f_k[i] - f_k[j]|` over rank-aligned spectra.
pub fn rho1<T: Scalar>(spec_i: &RankedSpectrum<T>, spec_j: &RankedSpectrum<T>) -> Result<T> {
    if spec_i.len() != spec_j.len() {
        return Err(StylometryError::LengthMismatch { left: spec_i.len(), right: spec_j.len() });
    }
    Ok(half_l1(spec_i.freqs(), spec_j.freqs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePair {
    pub text_i: String,
    pub text_j: String,
    pub rho0: f64,
    pub rho1: f64,
}

impl DistancePair {
    pub fn between<T: Scalar>(
        text_i: &str,
        fv_i: &FrequencyVector<T>,
        text_j: &str,
        fv_j: &FrequencyVector<T>,
    ) -> Result<Self> {
        Ok(Self {
            text_i: text_i.to_owned(),
            text_j: text_j.to_owned(),
            rho0: rho0(fv_i, fv_j)?.as_f64(),
            rho1: rho1(&rank_spectrum(fv_i), &rank_spectrum(fv_j))?.as_f64(),
        })
    }

    /// `ρ_λ` for `λ ∈ {0, 1}`.
    pub fn rho(&self, lambda: u8) -> f64 {
        if lambda == 0 {
            self.rho0
        } else {
            self.rho1
        }
    }
}

/// Symmetric matrix of `ρ₀` and `ρ₁` over a set of texts.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    rho0: Vec<f64>,
    rho1: Vec<f64>,
}

impl DistanceMatrix {
    fn empty(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(StylometryError::DuplicateText(id.clone()));
            }
        }
        let k = ids.len();
        Ok(Self { ids, index, rho0: vec![0.0; k * k], rho1: vec![0.0; k * k] })
    }

    fn set(&mut self, i: usize, j: usize, rho0: f64, rho1: f64) {
        let k = self.ids.len();
        self.rho0[i * k + j] = rho0;
        self.rho0[j * k + i] = rho0;
        self.rho1[i * k + j] = rho1;
        self.rho1[j * k + i] = rho1;
    }

    /// Fills every unordered pair with `pair(i, j)`, in parallel.
    pub fn from_fn<F>(ids: Vec<String>, pair: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<(f64, f64)> + Sync,
    {
        let mut m = Self::empty(ids)?;
        let k = m.ids.len();
        let jobs: Vec<(usize, usize)> =
            (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let values = jobs
            .par_iter()
            .map(|&(i, j)| pair(i, j))
            .collect::<Result<Vec<_>>>()?;
        for (&(i, j), (r0, r1)) in jobs.iter().zip(values) {
            m.set(i, j, r0, r1);
        }
        Ok(m)
    }

    /// Distances between frequency vectors sharing one inventory.
    pub fn from_vectors<T: Scalar>(texts: &[(String, FrequencyVector<T>)]) -> Result<Self> {
        let spectra: Vec<_> = texts.iter().map(|(_, fv)| rank_spectrum(fv)).collect();
        let ids = texts.iter().map(|(id, _)| id.clone()).collect();
        Self::from_fn(ids, |i, j| {
            Ok((
                rho0(&texts[i].1, &texts[j].1)?.as_f64(),
                rho1(&spectra[i], &spectra[j])?.as_f64(),
            ))
        })
    }

    /// Assembles a matrix from its unordered pairs; every pair must be
    /// present, and repeats must agree.
    pub fn from_pairs(pairs: &[DistancePair]) -> Result<Self> {
        let mut ids: Vec<String> = Vec::new();
        for p in pairs {
            for id in [&p.text_i, &p.text_j] {
                if !ids.contains(id) {
                    ids.push(id.clone());
                }
            }
        }
        let mut m = Self::empty(ids)?;
        let k = m.ids.len();
        let mut seen = vec![false; k * k];
        for p in pairs {
            let (i, j) = (m.index[&p.text_i], m.index[&p.text_j]);
            if i == j {
                if p.rho0 != 0.0 || p.rho1 != 0.0 {
                    return Err(StylometryError::Degenerate(format!(
                        "nonzero self-distance for {}",
                        p.text_i
                    )));
                }
                continue;
            }
            if seen[i * k + j] {
                let (r0, r1) = (m.rho0[i * k + j], m.rho1[i * k + j]);
                if r0 != p.rho0 || r1 != p.rho1 {
                    return Err(StylometryError::Degenerate(format!(
                        "conflicting distances for {} and {}",
                        p.text_i, p.text_j
                    )));
                }
                continue;
            }
            seen[i * k + j] = true;
            seen[j * k + i] = true;
            m.set(i, j, p.rho0, p.rho1);
        }
        for i in 0..k {
            for j in i + 1..k {
                if !seen[i * k + j] {
                    return Err(StylometryError::MissingPair(m.ids[i].clone(), m.ids[j].clone()));
                }
            }
        }
        Ok(m)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// `ρ_λ` between two texts by id.
    pub fn rho(&self, lambda: u8, a: &str, b: &str) -> Result<f64> {
        let i = *self.index.get(a).ok_or_else(|| StylometryError::UnknownText(a.into()))?;
        let j = *self.index.get(b).ok_or_else(|| StylometryError::UnknownText(b.into()))?;
        let k = self.ids.len();
        Ok(if lambda == 0 { self.rho0[i * k + j] } else { self.rho1[i * k + j] })
    }

    /// Unordered pairs `i < j` in id order.
    pub fn pairs(&self) -> Vec<DistancePair> {
        let k = self.ids.len();
        let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                out.push(DistancePair {
                    text_i: self.ids[i].clone(),
                    text_j: self.ids[j].clone(),
                    rho0: self.rho0[i * k + j],
                    rho1: self.rho1[i * k + j],
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PhonemeInventory;
    use std::sync::Arc;

    fn fv(inv: &Arc<PhonemeInventory>, f: &[f64]) -> FrequencyVector<f64> {
        FrequencyVector::new(Arc::clone(inv), f.to_vec()).unwrap()
    }

    fn abc() -> Arc<PhonemeInventory> {
        Arc::new(PhonemeInventory::new(vec!["a".into(), "b".into(), "c".into()]).unwrap())
    }

    #[test]
    fn small_examples() {
        let inv = abc();
        let p = fv(&inv, &[0.5, 0.3, 0.2]);
        assert_eq!(rho0(&p, &p).unwrap(), 0.0);
        let q = fv(&inv, &[0.4, 0.4, 0.2]);
        assert!((rho0(&p, &q).unwrap() - 0.1).abs() < 1e-15);
        let r = fv(&inv, &[0.2, 0.4, 0.4]);
        let pair = DistancePair::between("p", &p, "r", &r).unwrap();
        assert!((pair.rho0 - 0.3).abs() < 1e-15);
        assert!((pair.rho1 - 0.1).abs() < 1e-15);

        let s = RankedSpectrum::new(vec![0.5f64, 0.3, 0.2]).unwrap();
        let t = RankedSpectrum::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert!((rho1(&s, &t).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mismatched_inventories_are_refused() {
        let other = Arc::new(PhonemeInventory::new(vec!["x".into(), "y".into(), "z".into()]).unwrap());
        assert!(rho0(&fv(&abc(), &[0.5, 0.3, 0.2]), &fv(&other, &[0.5, 0.3, 0.2])).is_err());
        let s = RankedSpectrum::new(vec![0.5, 0.5]).unwrap();
        let t = RankedSpectrum::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert!(rho1(&s, &t).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let inv = abc();
        let texts = vec![
            ("x".to_string(), fv(&inv, &[0.5, 0.3, 0.2])),
            ("y".to_string(), fv(&inv, &[0.2, 0.4, 0.4])),
            ("z".to_string(), fv(&inv, &[0.5, 0.3, 0.2])),
        ];
        let m = DistanceMatrix::from_vectors(&texts).unwrap();
        assert_eq!(m.rho(0, "x", "z").unwrap(), 0.0);
        assert_eq!(m.rho(0, "x", "y").unwrap(), m.rho(0, "y", "x").unwrap());
        let pairs = m.pairs();
        assert_eq!(pairs.len(), 3);
        assert_eq!(DistanceMatrix::from_pairs(&pairs).unwrap(), m);
        assert!(matches!(
            DistanceMatrix::from_pairs(&pairs[..2]),
            Err(StylometryError::MissingPair(..))
        ));
        assert!(m.rho(0, "x", "w").is_err());
    }

    #[test]
    fn duplicate_ids() {
        let inv = abc();
        let v = fv(&inv, &[0.5, 0.3, 0.2]);
        let texts = vec![("x".to_string(), v.clone()), ("x".to_string(), v)];
        assert!(DistanceMatrix::from_vectors(&texts).is_err());
    }
}
