//! Pronunciation lexicon loading.
//!
//! Two line formats are accepted:
//!
//! - `Tsv`: `word<TAB>PH1 PH2 ...`
//! - `CmuDict`: `WORD  PH1 PH2 ...` with alternates written `WORD(1)`
//!
//! In both, lines starting with `;;;` are comments, except an optional
//! `;;; INVENTORY: PH1 PH2 ...` header declaring phonemes that may not occur
//! in any entry.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc;

use super::{CorpusError, Result};

/// Ordered set of distinct phoneme symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeInventory {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl PhonemeInventory {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(CorpusError::InvalidInventory(format!(
                "{} symbols, need at least 2",
                symbols.len()
            )));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(CorpusError::InvalidInventory(format!("duplicate symbol {s}")));
            }
        }
        Ok(Self { symbols, index })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LexiconFormat {
    #[default]
    Tsv,
    CmuDict,
}

impl FromStr for LexiconFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tsv" => Ok(Self::Tsv),
            "cmudict" | "cmu" => Ok(Self::CmuDict),
            other => Err(format!("unknown lexicon format {other:?} (expected tsv or cmudict)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LexiconOptions {
    pub format: LexiconFormat,
    /// Drop trailing stress digits from symbols (`AH0` becomes `AH`).
    pub strip_stress: bool,
}

/// Immutable word → pronunciation map over a shared inventory.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, Vec<u16>>,
    inventory: Arc<PhonemeInventory>,
    duplicates: usize,
}

impl Lexicon {
    pub fn inventory(&self) -> &Arc<PhonemeInventory> {
        &self.inventory
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of repeated headwords ignored during loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    /// Phoneme indices for a word; the lookup folds case and apostrophes.
    pub fn pronunciation(&self, word: &str) -> Option<&[u16]> {
        match self.entries.get(word) {
            Some(p) => Some(p),
            None => self.entries.get(&fold_word(word)).map(Vec::as_slice),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.pronunciation(word).is_some()
    }

    /// Phoneme symbols for a word.
    pub fn symbols_of(&self, word: &str) -> Option<Vec<&str>> {
        self.pronunciation(word).map(|p| {
            p.iter()
                .map(|&i| self.inventory.symbols()[i as usize].as_str())
                .collect()
        })
    }
}

fn fold_word(word: &str) -> String {
    word.to_lowercase().replace('\u{2019}', "'")
}

fn normalize_symbol(raw: &str, strip_stress: bool) -> &str {
    if strip_stress {
        let stripped = raw.trim_end_matches(|c: char| c.is_ascii_digit());
        if !stripped.is_empty() {
            return stripped;
        }
    }
    raw
}

/// Reads a lexicon; the first pronunciation of a repeated word wins.
pub fn load_lexicon<R: BufRead>(source: R, options: LexiconOptions) -> Result<Lexicon> {
    let mut declared: Vec<String> = Vec::new();
    let mut raw_entries: Vec<(String, Vec<String>)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut duplicates = 0;

    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if let Some(comment) = line.strip_prefix(";;;") {
            if let Some(list) = comment.trim_start().strip_prefix("INVENTORY:") {
                for sym in list.split_whitespace() {
                    let sym = normalize_symbol(sym, options.strip_stress).to_owned();
                    if !declared.contains(&sym) {
                        declared.push(sym);
                    }
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (word, pron) = match options.format {
            LexiconFormat::Tsv => line.split_once('\t').ok_or_else(|| CorpusError::Parse {
                line: lineno,
                message: "expected word<TAB>phonemes".into(),
            })?,
            LexiconFormat::CmuDict => line
                .trim_start()
                .split_once(char::is_whitespace)
                .ok_or_else(|| CorpusError::Parse {
                    line: lineno,
                    message: "expected word followed by phonemes".into(),
                })?,
        };
        let mut word = word.trim();
        let mut alternate = false;
        if options.format == LexiconFormat::CmuDict {
            if let Some(base) = word.strip_suffix(')').and_then(|w| w.rsplit_once('(')) {
                if base.1.chars().all(|c| c.is_ascii_digit()) {
                    word = base.0;
                    alternate = true;
                }
            }
        }
        if word.is_empty() {
            return Err(CorpusError::Parse { line: lineno, message: "empty word".into() });
        }
        let symbols: Vec<String> = pron
            .split_whitespace()
            .map(|s| normalize_symbol(s, options.strip_stress).to_owned())
            .collect();
        if symbols.is_empty() {
            return Err(CorpusError::Parse {
                line: lineno,
                message: format!("no phonemes for {word:?}"),
            });
        }
        let word = fold_word(word);
        if let Some(&first) = seen.get(&word) {
            if !alternate {
                duplicates += 1;
                log::warn!(
                    "lexicon line {lineno}: duplicate entry {word:?} ignored (first at line {first})"
                );
            }
            continue;
        }
        seen.insert(word.clone(), lineno);
        raw_entries.push((word, symbols));
    }

    if raw_entries.is_empty() {
        return Err(CorpusError::EmptyLexicon);
    }

    let used: BTreeSet<&str> = raw_entries
        .iter()
        .flat_map(|(_, s)| s.iter().map(String::as_str))
        .collect();
    let mut symbols = declared.clone();
    symbols.extend(
        used.into_iter()
            .filter(|s| !declared.iter().any(|d| d == s))
            .map(str::to_owned),
    );
    if symbols.len() > u16::MAX as usize {
        return Err(CorpusError::InvalidInventory(format!("{} symbols", symbols.len())));
    }
    let inventory = PhonemeInventory::new(symbols)?;
    let entries = raw_entries
        .into_iter()
        .map(|(w, syms)| {
            let idx = syms
                .iter()
                .map(|s| inventory.index_of(s).expect("symbol collected above") as u16)
                .collect();
            (w, idx)
        })
        .collect();

    Ok(Lexicon { entries, inventory: Arc::new(inventory), duplicates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tsv(text: &str) -> Result<Lexicon> {
        load_lexicon(text.as_bytes(), LexiconOptions::default())
    }

    #[test]
    fn single_entry() {
        let lex = tsv("cat\tK AE T\n").unwrap();
        assert_eq!(lex.symbols_of("cat").unwrap(), ["K", "AE", "T"]);
        assert_eq!(lex.inventory().symbols(), ["AE", "K", "T"]);
        assert_eq!(lex.duplicates(), 0);
    }

    #[test]
    fn duplicates_keep_first() {
        let lex = tsv("cat\tK AE T\nCat\tK AA T\n").unwrap();
        assert_eq!(lex.symbols_of("CAT").unwrap(), ["K", "AE", "T"]);
        assert_eq!(lex.duplicates(), 1);
        // the ignored pronunciation still contributes nothing to the inventory
        assert_eq!(lex.inventory().len(), 3);
    }

    #[test]
    fn empty_and_malformed() {
        assert!(matches!(tsv(""), Err(CorpusError::EmptyLexicon)));
        assert!(matches!(tsv(";;; only a comment\n"), Err(CorpusError::EmptyLexicon)));
        assert!(matches!(
            tsv("cat\tK AE T\ndog D AO G\n"),
            Err(CorpusError::Parse { line: 2, .. })
        ));
        assert!(matches!(tsv("cat\t\n"), Err(CorpusError::Parse { line: 1, .. })));
    }

    #[test]
    fn header_declares_unused_symbols() {
        let lex = tsv(";;; INVENTORY: ZH K AE T\ncat\tK AE T\n").unwrap();
        assert_eq!(lex.inventory().symbols(), ["ZH", "K", "AE", "T"]);
    }

    #[test]
    fn cmudict_format_and_stress() {
        let text = ";;; comment\nTOMATO  T AH0 M EY1 T OW2\nTOMATO(1)  T AH0 M AA1 T OW2\nDON'T  D OW1 N T\n";
        let opts = LexiconOptions { format: LexiconFormat::CmuDict, strip_stress: true };
        let lex = load_lexicon(text.as_bytes(), opts).unwrap();
        assert_eq!(lex.symbols_of("tomato").unwrap(), ["T", "AH", "M", "EY", "T", "OW"]);
        assert_eq!(lex.symbols_of("don’t").unwrap(), ["D", "OW", "N", "T"]);
        assert_eq!(lex.duplicates(), 0);
        assert!(!lex.inventory().symbols().iter().any(|s| s == "AA"));

        let opts = LexiconOptions { format: LexiconFormat::CmuDict, strip_stress: false };
        let lex = load_lexicon(text.as_bytes(), opts).unwrap();
        assert_eq!(lex.symbols_of("tomato").unwrap()[1], "AH0");
    }

    #[test]
    fn inventory_invariants() {
        assert!(PhonemeInventory::new(vec!["A".into()]).is_err());
        assert!(PhonemeInventory::new(vec!["A".into(), "A".into()]).is_err());
        let inv = PhonemeInventory::new(vec!["A".into(), "B".into()]).unwrap();
        assert_eq!(inv.index_of("B"), Some(1));
    }
}
