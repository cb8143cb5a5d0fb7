//! Text ingestion and phoneme frequency profiles.
//!
//! Words are transcribed by lookup in a plain-text pronunciation lexicon;
//! the phoneme inventory is whatever symbols the lexicon uses. Words missing
//! from the lexicon are skipped and reported, never guessed.

mod lexicon;
mod profile;
mod tokenize;

pub use lexicon::{load_lexicon, Lexicon, LexiconFormat, LexiconOptions, PhonemeInventory};
pub use profile::{
    build_profile, common_fraction, exclusive_profile, rank_spectrum, to_frequency_vector,
    FrequencyVector, PhonemeProfile, ProfileMode, ProfileRecord, COVERAGE_WARNING,
};
pub use tokenize::{tokenize, tokenize_bytes};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("lexicon has no entries")]
    EmptyLexicon,
    #[error("invalid phoneme inventory: {0}")]
    InvalidInventory(String),
    #[error("text {text_id}: no in-lexicon words ({oov_count} distinct out-of-lexicon words)")]
    ZeroCoverage { text_id: String, oov_count: usize },
    #[error("text {text_id}: no phonemes left after removing words shared with {versus}")]
    EmptyDifference { text_id: String, versus: String },
    #[error("both word-type sets are empty")]
    NoTypes,
    #[error("profile mode: {0}")]
    Mode(String),
    #[error("phoneme inventories differ")]
    InventoryMismatch,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CorpusError>;
