//! Run settings merged from command-line flags, a config file and defaults.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phonorank::corpus::{LexiconFormat, ProfileMode};
use serde::Deserialize;

use crate::tables::Format;

/// Invalid invocation or configuration; the binary exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

impl UsageError {
    pub fn new(message: impl Into<String>) -> Self {
        Self(message.into())
    }
}

type Result<T> = std::result::Result<T, UsageError>;

/// Extraction mode as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    All,
    Types,
    ExclusiveTypes,
}

impl Mode {
    pub const EVERY: [Mode; 3] = [Mode::All, Mode::Types, Mode::ExclusiveTypes];

    pub fn name(self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Types => "types",
            Self::ExclusiveTypes => "exclusive-types",
        }
    }

    /// The per-text profile mode; `None` for the pairwise exclusive mode.
    pub fn profile_mode(self) -> Option<ProfileMode> {
        match self {
            Self::All => Some(ProfileMode::AllTokens),
            Self::Types => Some(ProfileMode::DistinctTypes),
            Self::ExclusiveTypes => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self> {
        Self::EVERY
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UsageError(format!("unknown mode {s:?} (expected all, types or exclusive-types)")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

/// Settings that may come from flags or a config file; unset fields fall
/// through to the next source.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSettings {
    pub lexicon: Option<PathBuf>,
    pub lexicon_format: Option<String>,
    pub strip_stress: Option<bool>,
    #[serde(default, deserialize_with = "modes")]
    pub mode: Option<Vec<String>>,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub authors: Option<PathBuf>,
    pub texts: Option<Vec<PathBuf>>,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: Option<bool>,
    pub threads: Option<usize>,
}

fn modes<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<String>>, D::Error> {
    Ok(Option::<OneOrMany>::deserialize(d)?.map(|m| match m {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    }))
}

impl PartialSettings {
    /// Reads a TOML config file; relative paths in it are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let mut s: Self = toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut s.lexicon, &mut s.out, &mut s.authors, &mut s.cache_dir].into_iter().flatten() {
            rebase(p);
        }
        s.texts.iter_mut().flatten().for_each(rebase);
        Ok(s)
    }

    /// Fields of `self` win over those of `fallback`.
    pub fn or(self, fallback: Self) -> Self {
        Self {
            lexicon: self.lexicon.or(fallback.lexicon),
            lexicon_format: self.lexicon_format.or(fallback.lexicon_format),
            strip_stress: self.strip_stress.or(fallback.strip_stress),
            mode: self.mode.or(fallback.mode),
            beta_min: self.beta_min.or(fallback.beta_min),
            beta_max: self.beta_max.or(fallback.beta_max),
            tol: self.tol.or(fallback.tol),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            seed: self.seed.or(fallback.seed),
            authors: self.authors.or(fallback.authors),
            texts: self.texts.or(fallback.texts),
            cache_dir: self.cache_dir.or(fallback.cache_dir),
            no_cache: self.no_cache.or(fallback.no_cache),
            threads: self.threads.or(fallback.threads),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub lexicon: Option<PathBuf>,
    pub lexicon_format: LexiconFormat,
    pub strip_stress: bool,
    /// Requested modes; `None` lets each command use its own default.
    pub modes: Option<Vec<Mode>>,
    pub beta_min: f64,
    pub beta_max: f64,
    pub tol: f64,
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub authors: Option<PathBuf>,
    pub texts: Vec<PathBuf>,
    /// Profile cache directory; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Settings {
    pub fn resolve(p: PartialSettings) -> Result<Self> {
        let lexicon_format = match p.lexicon_format.as_deref() {
            None => LexiconFormat::Tsv,
            Some(s) => s.parse::<LexiconFormat>().map_err(|e| UsageError(e.to_string()))?,
        };
        let modes = p
            .mode
            .map(|list| {
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                for m in list.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
                    let m: Mode = m.parse()?;
                    if seen.insert(m) {
                        out.push(m);
                    }
                }
                if out.is_empty() {
                    return Err(UsageError::new("empty mode list"));
                }
                Ok(out)
            })
            .transpose()?;
        let beta_min = p.beta_min.unwrap_or(0.1);
        let beta_max = p.beta_max.unwrap_or(2.0);
        if !(beta_min > 0.0 && beta_max > beta_min && beta_max.is_finite()) {
            return Err(UsageError(format!("invalid beta range [{beta_min}, {beta_max}]")));
        }
        let tol = p.tol.unwrap_or(1e-6);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(UsageError(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        let format = match p.format.as_deref() {
            None => Format::Csv,
            Some(s) => s.parse().map_err(UsageError)?,
        };
        if p.threads == Some(0) {
            return Err(UsageError::new("threads must be at least 1"));
        }
        let out = p.out.unwrap_or_else(|| PathBuf::from("."));
        let cache_dir = if p.no_cache.unwrap_or(false) {
            None
        } else {
            Some(p.cache_dir.unwrap_or_else(|| out.join("cache")))
        };
        Ok(Self {
            lexicon: p.lexicon,
            lexicon_format,
            strip_stress: p.strip_stress.unwrap_or(false),
            modes,
            beta_min,
            beta_max,
            tol,
            out,
            format,
            seed: p.seed.unwrap_or(0),
            authors: p.authors,
            texts: p.texts.unwrap_or_default(),
            cache_dir,
            threads: p.threads,
        })
    }

    /// The requested modes, or `default` when none were given.
    pub fn modes_or(&self, default: &[Mode]) -> Vec<Mode> {
        self.modes.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// One input text and, when known, its author.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextSpec {
    pub text_id: String,
    /// `None` marks a held-out text to be attributed.
    pub author: Option<String>,
    pub path: PathBuf,
}

#[derive(Debug, Deserialize)]
struct AuthorRow {
    text_id: String,
    #[serde(default)]
    author: String,
    path: PathBuf,
}

/// Reads a `text_id,author,path` manifest. An empty author or `?` marks a
/// held-out text; relative paths are resolved against the manifest's
/// directory.
pub fn read_authors(path: &Path) -> Result<Vec<TextSpec>> {
    let err = |e: &dyn fmt::Display| UsageError(format!("authors file {}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| err(&e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for row in reader.deserialize::<AuthorRow>() {
        let row = row.map_err(|e| err(&e))?;
        if row.text_id.is_empty() {
            return Err(err(&"empty text_id"));
        }
        let author = match row.author.as_str() {
            "" | "?" => None,
            a => Some(a.to_owned()),
        };
        out.push(TextSpec { text_id: row.text_id, author, path: base.join(row.path) });
    }
    Ok(out)
}

/// Texts named by the authors manifest followed by loose paths, whose ids
/// are their file stems and which are held out.
pub fn collect_texts(settings: &Settings) -> Result<Vec<TextSpec>> {
    let mut texts = match &settings.authors {
        Some(p) => read_authors(p)?,
        None => Vec::new(),
    };
    for path in &settings.texts {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| UsageError(format!("cannot derive a text id from {}", path.display())))?;
        texts.push(TextSpec { text_id: stem.to_owned(), author: None, path: path.clone() });
    }
    if texts.is_empty() {
        return Err(UsageError::new("no input texts (give --authors or text paths)"));
    }
    let mut seen = BTreeSet::new();
    for t in &texts {
        if !seen.insert(t.text_id.as_str()) {
            return Err(UsageError(format!("duplicate text id {:?}", t.text_id)));
        }
    }
    Ok(texts)
}
