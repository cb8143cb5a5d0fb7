//! Word tokenizer.
//!
//! A token is a maximal run of letters with internal apostrophes; anything
//! else, including digits and hyphens, separates tokens. Tokens are
//! lowercased and the typographic apostrophe `’` is folded to `'`.

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into lowercase word tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c) && !current.is_empty() {
            current.push('\'');
        } else if !current.is_empty() {
            flush(&mut current, &mut tokens);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    let word = current.trim_end_matches('\'');
    if !word.is_empty() {
        tokens.push(word.to_owned());
    }
    current.clear();
}

/// Tokenizes raw bytes, replacing invalid UTF-8 sequences with separators.
///
/// Returns the tokens and the number of invalid sequences seen.
pub fn tokenize_bytes(bytes: &[u8]) -> (Vec<String>, usize) {
    let invalid = bytes.utf8_chunks().filter(|c| !c.invalid().is_empty()).count();
    if invalid > 0 {
        log::warn!("replaced {invalid} invalid UTF-8 sequences");
    }
    (tokenize(&String::from_utf8_lossy(bytes)), invalid)
}
