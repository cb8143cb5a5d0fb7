//! Phoneme count profiles and the frequency vectors derived from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Lexicon, PhonemeInventory, Result};
use crate::model::RankedSpectrum;
use crate::Scalar;

/// Below this fraction of in-lexicon tokens a profile is flagged.
pub const COVERAGE_WARNING: f64 = 0.95;

/// Which words of a text contribute phonemes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfileMode {
    /// Every token occurrence.
    AllTokens,
    /// Each distinct word type once.
    DistinctTypes,
    /// Distinct types not shared with the text `versus`.
    ExclusiveTypes { versus: String },
}

impl fmt::Display for ProfileMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AllTokens => f.write_str("all"),
            Self::DistinctTypes => f.write_str("types"),
            Self::ExclusiveTypes { versus } => write!(f, "exclusive-types:{versus}"),
        }
    }
}

impl FromStr for ProfileMode {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::AllTokens),
            "types" => Ok(Self::DistinctTypes),
            _ => match s.strip_prefix("exclusive-types:") {
                Some(v) if !v.is_empty() => Ok(Self::ExclusiveTypes { versus: v.to_owned() }),
                _ => Err(CorpusError::Mode(format!("unknown mode {s:?}"))),
            },
        }
    }
}

/// Phoneme counts of one text under one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeProfile {
    text_id: String,
    mode: ProfileMode,
    inventory: Arc<PhonemeInventory>,
    counts: Vec<u64>,
    total: u64,
    word_types: BTreeSet<String>,
    token_count: u64,
    in_lexicon_tokens: u64,
    oov: BTreeSet<String>,
}

impl PhonemeProfile {
    pub fn text_id(&self) -> &str {
        &self.text_id
    }

    pub fn mode(&self) -> &ProfileMode {
        &self.mode
    }

    pub fn inventory(&self) -> &Arc<PhonemeInventory> {
        &self.inventory
    }

    /// Counts aligned with the inventory order.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_of(&self, symbol: &str) -> Option<u64> {
        self.inventory.index_of(symbol).map(|i| self.counts[i])
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Distinct in-lexicon words contributing to the profile.
    pub fn word_types(&self) -> &BTreeSet<String> {
        &self.word_types
    }

    /// All word tokens of the text, including out-of-lexicon ones.
    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn in_lexicon_tokens(&self) -> u64 {
        self.in_lexicon_tokens
    }

    pub fn oov(&self) -> &BTreeSet<String> {
        &self.oov
    }

    /// Fraction of tokens found in the lexicon.
    pub fn coverage(&self) -> f64 {
        if self.token_count == 0 {
            0.0
        } else {
            self.in_lexicon_tokens as f64 / self.token_count as f64
        }
    }

    /// Serializable form. Word lists are included only when `with_words` is
    /// set, since they are large and only needed to rebuild exclusive-type
    /// profiles.
    pub fn to_record(&self, with_words: bool) -> ProfileRecord {
        ProfileRecord {
            text_id: self.text_id.clone(),
            mode: self.mode.to_string(),
            inventory: self.inventory.symbols().to_vec(),
            counts: self
                .inventory
                .symbols()
                .iter()
                .cloned()
                .zip(self.counts.iter().copied())
                .collect(),
            total: self.total,
            token_count: self.token_count,
            type_count: self.word_types.len() as u64,
            oov_count: self.oov.len() as u64,
            coverage: self.coverage(),
            in_lexicon_tokens: with_words.then_some(self.in_lexicon_tokens),
            word_types: with_words.then(|| self.word_types.iter().cloned().collect()),
            oov: with_words.then(|| self.oov.iter().cloned().collect()),
        }
    }

    /// Rebuilds a profile written with `to_record(true)`.
    pub fn from_record(record: ProfileRecord, inventory: &Arc<PhonemeInventory>) -> Result<Self> {
        if record.inventory != inventory.symbols() {
            return Err(CorpusError::InventoryMismatch);
        }
        let mode: ProfileMode = record.mode.parse()?;
        let mut counts = vec![0u64; inventory.len()];
        for (sym, &c) in &record.counts {
            let i = inventory.index_of(sym).ok_or(CorpusError::InventoryMismatch)?;
            counts[i] = c;
        }
        let total: u64 = counts.iter().sum();
        if total != record.total || total == 0 {
            return Err(CorpusError::Mode(format!(
                "profile {}: total {} does not match counts",
                record.text_id, record.total
            )));
        }
        let (Some(word_types), Some(oov), Some(in_lexicon_tokens)) =
            (record.word_types, record.oov, record.in_lexicon_tokens)
        else {
            return Err(CorpusError::Mode(format!(
                "profile {}: record lacks word lists",
                record.text_id
            )));
        };
        Ok(Self {
            text_id: record.text_id,
            mode,
            inventory: Arc::clone(inventory),
            counts,
            total,
            word_types: word_types.into_iter().collect(),
            token_count: record.token_count,
            in_lexicon_tokens,
            oov: oov.into_iter().collect(),
        })
    }
}

/// On-disk profile layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub text_id: String,
    pub mode: String,
    pub inventory: Vec<String>,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
    pub token_count: u64,
    pub type_count: u64,
    pub oov_count: u64,
    pub coverage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_lexicon_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_types: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oov: Option<Vec<String>>,
}

fn count_types<'a>(
    words: impl IntoIterator<Item = &'a String>,
    lexicon: &Lexicon,
) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; lexicon.inventory().len()];
    let mut total = 0;
    for w in words {
        if let Some(p) = lexicon.pronunciation(w) {
            for &i in p {
                counts[i as usize] += 1;
            }
            total += p.len() as u64;
        }
    }
    (counts, total)
}

/// Counts phonemes of `tokens` in `AllTokens` or `DistinctTypes` mode.
pub fn build_profile<S: AsRef<str>>(
    text_id: &str,
    tokens: &[S],
    lexicon: &Lexicon,
    mode: ProfileMode,
) -> Result<PhonemeProfile> {
    if matches!(mode, ProfileMode::ExclusiveTypes { .. }) {
        return Err(CorpusError::Mode(
            "exclusive-type profiles are derived from a pair with exclusive_profile".into(),
        ));
    }
    let mut counts = vec![0u64; lexicon.inventory().len()];
    let mut total = 0u64;
    let mut in_lexicon_tokens = 0u64;
    let mut word_types = BTreeSet::new();
    let mut oov = BTreeSet::new();
    for token in tokens {
        let token = token.as_ref();
        match lexicon.pronunciation(token) {
            Some(p) => {
                in_lexicon_tokens += 1;
                let fresh = !word_types.contains(token) && word_types.insert(token.to_owned());
                if mode == ProfileMode::AllTokens || fresh {
                    for &i in p {
                        counts[i as usize] += 1;
                    }
                    total += p.len() as u64;
                }
            }
            None => {
                if !oov.contains(token) {
                    oov.insert(token.to_owned());
                }
            }
        }
    }
    if total == 0 {
        return Err(CorpusError::ZeroCoverage { text_id: text_id.to_owned(), oov_count: oov.len() });
    }
    let profile = PhonemeProfile {
        text_id: text_id.to_owned(),
        mode,
        inventory: Arc::clone(lexicon.inventory()),
        counts,
        total,
        word_types,
        token_count: tokens.len() as u64,
        in_lexicon_tokens,
        oov,
    };
    if profile.coverage() < COVERAGE_WARNING {
        log::warn!(
            "text {text_id}: lexicon covers {:.1}% of tokens ({} distinct unknown words)",
            100.0 * profile.coverage(),
            profile.oov.len()
        );
    }
    Ok(profile)
}

/// Profiles of the word types of each text that the other text lacks.
///
/// Both inputs must be `DistinctTypes` profiles over `lexicon`.
pub fn exclusive_profile(
    profile_i: &PhonemeProfile,
    profile_j: &PhonemeProfile,
    lexicon: &Lexicon,
) -> Result<(PhonemeProfile, PhonemeProfile)> {
    for p in [profile_i, profile_j] {
        if p.mode != ProfileMode::DistinctTypes {
            return Err(CorpusError::Mode(format!(
                "text {} has mode {}, need types",
                p.text_id, p.mode
            )));
        }
        if *p.inventory != **lexicon.inventory() {
            return Err(CorpusError::InventoryMismatch);
        }
    }
    let one_side = |a: &PhonemeProfile, b: &PhonemeProfile| -> Result<PhonemeProfile> {
        let word_types: BTreeSet<String> =
            a.word_types.difference(&b.word_types).cloned().collect();
        let (counts, total) = count_types(&word_types, lexicon);
        if total == 0 {
            return Err(CorpusError::EmptyDifference {
                text_id: a.text_id.clone(),
                versus: b.text_id.clone(),
            });
        }
        Ok(PhonemeProfile {
            mode: ProfileMode::ExclusiveTypes { versus: b.text_id.clone() },
            counts,
            total,
            word_types,
            ..a.clone()
        })
    };
    Ok((one_side(profile_i, profile_j)?, one_side(profile_j, profile_i)?))
}

/// Jaccard fraction `n(ij) / (n(i) + n(j) - n(ij))` of the word-type sets.
pub fn common_fraction(profile_i: &PhonemeProfile, profile_j: &PhonemeProfile) -> Result<f64> {
    let (a, b) = (&profile_i.word_types, &profile_j.word_types);
    if a.is_empty() && b.is_empty() {
        return Err(CorpusError::NoTypes);
    }
    let common = a.intersection(b).count();
    Ok(common as f64 / (a.len() + b.len() - common) as f64)
}

/// Relative phoneme frequencies aligned with an inventory; unseen phonemes
/// stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector<T> {
    inventory: Arc<PhonemeInventory>,
    freqs: Vec<T>,
}

impl<T: Scalar> FrequencyVector<T> {
    /// Validates that `freqs` is a probability vector over `inventory`.
    pub fn new(inventory: Arc<PhonemeInventory>, freqs: Vec<T>) -> Result<Self> {
        if freqs.len() != inventory.len() {
            return Err(CorpusError::InventoryMismatch);
        }
        let sum: T = freqs.iter().copied().sum();
        let tol = crate::model::sum_tolerance::<T>(freqs.len());
        if freqs.iter().any(|f| !(*f >= T::zero())) || (sum - T::one()).abs() > tol {
            return Err(CorpusError::Mode(format!("not a probability vector (sum {sum})")));
        }
        Ok(Self { inventory, freqs })
    }

    pub fn inventory(&self) -> &Arc<PhonemeInventory> {
        &self.inventory
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn get(&self, symbol: &str) -> Option<T> {
        self.inventory.index_of(symbol).map(|i| self.freqs[i])
    }

    /// `(symbol, frequency)` pairs sorted by decreasing frequency, ties by
    /// symbol.
    pub fn ranked_phonemes(&self) -> Vec<(&str, T)> {
        let mut pairs: Vec<(&str, T)> = self
            .inventory
            .symbols()
            .iter()
            .map(String::as_str)
            .zip(self.freqs.iter().copied())
            .collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(b.0)));
        pairs
    }
}

pub fn to_frequency_vector<T: Scalar>(profile: &PhonemeProfile) -> FrequencyVector<T> {
    let total = profile.total as f64;
    FrequencyVector {
        inventory: Arc::clone(&profile.inventory),
        freqs: profile.counts.iter().map(|&c| T::c(c as f64 / total)).collect(),
    }
}

pub fn rank_spectrum<T: Scalar>(fv: &FrequencyVector<T>) -> RankedSpectrum<T> {
    let freqs = fv.ranked_phonemes().into_iter().map(|(_, f)| f).collect();
    RankedSpectrum::new(freqs).expect("frequency vectors are normalized")
}
