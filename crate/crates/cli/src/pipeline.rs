//! Text to profile to fit, distance and cluster stages, and the commands
//! that run them and write their tables.
//!
//! Per-text failures (unreadable file, no lexicon coverage, failed fit) are
//! collected rather than aborting the run; the affected text is dropped
//! from later stages.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use phonorank::corpus::{
    build_profile, common_fraction, exclusive_profile, load_lexicon, rank_spectrum, to_frequency_vector,
    Lexicon, LexiconFormat, LexiconOptions, PhonemeProfile, ProfileMode, ProfileRecord,
};
use phonorank::model::{
    approx_spectrum, relative_fluctuation_exact, DirichletSampler, MomentCache, RankMoments,
};
use phonorank::numerics::Tolerance;
use phonorank::stylometry::{
    attribute_against_authors, cluster_margins, cluster_margins_with, fit_beta, mode_comparison_report,
    rho0, rho1, Authorship, DistanceMatrix, FitOptions, FitResult, ModeComparisonReport, ModeResults,
    ModeSet, StylometryError,
};
use phonorank::DirichletModel;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{collect_texts, Mode, Settings, TextSpec, UsageError};
use crate::tables::{
    write_table, AttributionRow, ClusterMargins, CommonMarginRow, CommonRow, DistanceRow,
    FitRow, ModelRow, ProfileRow, SpectrumRow,
};

/// Ties in the cross-mode relations are margins within this of zero.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// A text or item that dropped out of a stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub subject: String,
    pub stage: &'static str,
    pub message: String,
}

/// Files written and failures met by one command.
#[derive(Debug, Default)]
pub struct RunReport {
    pub written: Vec<PathBuf>,
    pub failures: Vec<Failure>,
}

impl RunReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A loaded lexicon and a digest of its file and load options.
pub struct LexiconSource {
    pub lexicon: Lexicon,
    pub digest: String,
}

pub fn load_lexicon_file(path: &Path, format: LexiconFormat, strip_stress: bool) -> anyhow::Result<LexiconSource> {
    let bytes = fs::read(path).with_context(|| format!("reading lexicon {}", path.display()))?;
    let lexicon = load_lexicon(BufReader::new(bytes.as_slice()), LexiconOptions { format, strip_stress })
        .with_context(|| format!("loading lexicon {}", path.display()))?;
    let mut h = Sha256::new();
    h.update(&bytes);
    h.update(format!("{format:?}/{strip_stress}").as_bytes());
    Ok(LexiconSource { lexicon, digest: hex::encode(h.finalize()) })
}

/// Profiles stored as JSON files named by a digest of text, lexicon and mode.
pub struct ProfileCache {
    dir: PathBuf,
}

impl ProfileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn key(text: &[u8], lexicon_digest: &str, mode: &ProfileMode) -> String {
        let mut h = Sha256::new();
        h.update(b"phonorank-profile-v1\0");
        h.update(lexicon_digest.as_bytes());
        h.update(b"\0");
        h.update(mode.to_string().as_bytes());
        h.update(b"\0");
        h.update(text);
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<ProfileRecord> {
        let bytes = fs::read(self.path(key)).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    pub fn put(&self, key: &str, record: &ProfileRecord) -> anyhow::Result<()> {
        fs::create_dir_all(&self.dir)?;
        // write then rename so a concurrent reader never sees a partial file
        let tmp = self.dir.join(format!("{key}.tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(record)?)?;
        fs::rename(&tmp, self.path(key))?;
        Ok(())
    }
}

/// Per-text profiles under the requested per-text modes.
#[derive(Debug, Clone)]
pub struct TextProfiles {
    pub spec: TextSpec,
    pub all: Option<PhonemeProfile>,
    pub types: Option<PhonemeProfile>,
}

impl TextProfiles {
    pub fn get(&self, mode: Mode) -> Option<&PhonemeProfile> {
        match mode {
            Mode::All => self.all.as_ref(),
            Mode::Types | Mode::ExclusiveTypes => self.types.as_ref(),
        }
    }
}

fn profile_one(
    spec: &TextSpec,
    source: &LexiconSource,
    modes: &[ProfileMode],
    cache: Option<&ProfileCache>,
) -> anyhow::Result<Vec<PhonemeProfile>> {
    let bytes = fs::read(&spec.path).with_context(|| format!("reading {}", spec.path.display()))?;
    let inventory = source.lexicon.inventory();
    let mut tokens = None;
    let mut out = Vec::with_capacity(modes.len());
    for mode in modes {
        let key = ProfileCache::key(&bytes, &source.digest, mode);
        if let Some(mut record) = cache.and_then(|c| c.get(&key)) {
            record.text_id = spec.text_id.clone();
            match PhonemeProfile::from_record(record, inventory) {
                Ok(p) => {
                    out.push(p);
                    continue;
                }
                Err(e) => log::warn!("ignoring stale cache entry {key}: {e}"),
            }
        }
        let tokens = tokens.get_or_insert_with(|| {
            let (tokens, invalid) = phonorank::corpus::tokenize_bytes(&bytes);
            if invalid > 0 {
                log::warn!("text {}: {invalid} invalid UTF-8 sequences replaced", spec.text_id);
            }
            tokens
        });
        let profile = build_profile(&spec.text_id, tokens, &source.lexicon, mode.clone())?;
        if let Some(c) = cache {
            if let Err(e) = c.put(&key, &profile.to_record(true)) {
                log::warn!("cannot write profile cache: {e:#}");
            }
        }
        out.push(profile);
    }
    Ok(out)
}

/// Profiles every text in parallel; texts that fail are reported and left
/// out of the result.
pub fn profile_texts(
    specs: &[TextSpec],
    source: &LexiconSource,
    need_all: bool,
    need_types: bool,
    cache: Option<&ProfileCache>,
) -> (Vec<TextProfiles>, Vec<Failure>) {
    let mut modes = Vec::new();
    if need_all {
        modes.push(ProfileMode::AllTokens);
    }
    if need_types {
        modes.push(ProfileMode::DistinctTypes);
    }
    let results: Vec<_> = specs.par_iter().map(|s| profile_one(s, source, &modes, cache)).collect();
    let mut texts = Vec::new();
    let mut failures = Vec::new();
    for (spec, result) in specs.iter().zip(results) {
        match result {
            Ok(profiles) => {
                let mut t = TextProfiles { spec: spec.clone(), all: None, types: None };
                for p in profiles {
                    match p.mode() {
                        ProfileMode::AllTokens => t.all = Some(p),
                        _ => t.types = Some(p),
                    }
                }
                texts.push(t);
            }
            Err(e) => failures.push(Failure {
                subject: spec.text_id.clone(),
                stage: "profile",
                message: format!("{e:#}"),
            }),
        }
    }
    (texts, failures)
}

/// Fits `β` to each text's spectrum under `mode`, in parallel.
pub fn fit_texts(
    texts: &[TextProfiles],
    mode: Mode,
    options: &FitOptions<f64>,
    cache: &MomentCache<f64>,
) -> (Vec<(String, FitResult<f64>)>, Vec<Failure>) {
    let results: Vec<_> = texts
        .par_iter()
        .map(|t| {
            let profile = t.get(mode).expect("profile of the requested mode");
            let observed = rank_spectrum(&to_frequency_vector::<f64>(profile));
            fit_beta(&observed, options, cache).map(|f| f.with_mode(profile.mode().clone()))
        })
        .collect();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in texts.iter().zip(results) {
        match r {
            Ok(f) => {
                if f.grid_warning {
                    log::warn!("text {} ({mode}): grid scan and search disagree", t.spec.text_id);
                }
                fits.push((t.spec.text_id.clone(), f));
            }
            Err(e) => failures.push(Failure {
                subject: t.spec.text_id.clone(),
                stage: "fit",
                message: e.to_string(),
            }),
        }
    }
    (fits, failures)
}

/// `ρ₀` and `ρ₁` between every pair of texts under `mode`.
pub fn distance_matrix(texts: &[TextProfiles], mode: Mode, lexicon: &Lexicon) -> Result<DistanceMatrix, StylometryError> {
    let ids: Vec<String> = texts.iter().map(|t| t.spec.text_id.clone()).collect();
    let profiles: Vec<&PhonemeProfile> =
        texts.iter().map(|t| t.get(mode).expect("profile of the requested mode")).collect();
    if mode != Mode::ExclusiveTypes {
        let fvs: Vec<_> = ids
            .iter()
            .cloned()
            .zip(profiles.iter().map(|p| to_frequency_vector::<f64>(p)))
            .collect();
        return DistanceMatrix::from_vectors(&fvs);
    }
    DistanceMatrix::from_fn(ids, |i, j| {
        let (pi, pj) = exclusive_profile(profiles[i], profiles[j], lexicon)
            .map_err(|e| StylometryError::Degenerate(e.to_string()))?;
        let (fi, fj) = (to_frequency_vector::<f64>(&pi), to_frequency_vector::<f64>(&pj));
        Ok((rho0(&fi, &fj)?, rho1(&rank_spectrum(&fi), &rank_spectrum(&fj))?))
    })
}

/// Jaccard fraction of shared word types for every pair of texts.
pub fn common_fractions(texts: &[TextProfiles]) -> anyhow::Result<Vec<CommonRow>> {
    let mut rows = Vec::new();
    for (x, a) in texts.iter().enumerate() {
        for b in &texts[x + 1..] {
            let (pa, pb) = (a.get(Mode::Types).expect("types"), b.get(Mode::Types).expect("types"));
            rows.push(CommonRow {
                text_i: a.spec.text_id.clone(),
                text_j: b.spec.text_id.clone(),
                p: common_fraction(pa, pb)?,
            });
        }
    }
    Ok(rows)
}

/// Labelled texts as a text-to-author map.
pub fn authorship(texts: &[TextProfiles]) -> Authorship {
    texts
        .iter()
        .filter_map(|t| Some((t.spec.text_id.clone(), t.spec.author.clone()?)))
        .collect()
}

fn file_stem_of(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn init_threads(settings: &Settings) {
    if let Some(n) = settings.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialized");
        }
    }
}

fn create_out(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

struct Inputs {
    source: LexiconSource,
    texts: Vec<TextSpec>,
    cache: Option<ProfileCache>,
}

fn inputs(settings: &Settings) -> anyhow::Result<Inputs> {
    let texts = collect_texts(settings)?;
    let lexicon = settings
        .lexicon
        .as_ref()
        .ok_or_else(|| UsageError::new("a lexicon is required (--lexicon)"))?;
    let source = load_lexicon_file(lexicon, settings.lexicon_format, settings.strip_stress)
        .map_err(|e| UsageError(format!("{e:#}")))?;
    log::info!(
        "lexicon: {} words over {} phonemes",
        source.lexicon.len(),
        source.lexicon.inventory().len()
    );
    Ok(Inputs { source, texts, cache: settings.cache_dir.as_ref().map(ProfileCache::new) })
}

fn fit_options(settings: &Settings) -> anyhow::Result<FitOptions<f64>> {
    Ok(FitOptions {
        beta_min: settings.beta_min,
        beta_max: settings.beta_max,
        tol: Tolerance::new(settings.tol, settings.tol, 200).map_err(|e| UsageError(e.to_string()))?,
        ..FitOptions::default()
    })
}

/// Which model curves to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Exact,
    Approx,
    Fluctuations,
}

impl std::str::FromStr for Curve {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s {
            "exact" => Ok(Self::Exact),
            "approx" => Ok(Self::Approx),
            "fluctuations" => Ok(Self::Fluctuations),
            _ => Err(UsageError(format!("unknown curve {s:?} (expected exact, approx or fluctuations)"))),
        }
    }
}

/// Model curves for `n` phonemes at concentration `beta`.
#[derive(Debug, Clone)]
pub struct ModelRequest {
    pub n: usize,
    pub beta: f64,
    pub curves: Vec<Curve>,
    /// Monte Carlo samples for a cross-check column; 0 skips sampling.
    pub samples: usize,
}

/// Tabulates the requested curves rank by rank; ranks whose quadrature
/// fails are reported and left empty.
pub fn model_rows(req: &ModelRequest, seed: u64) -> anyhow::Result<(Vec<ModelRow>, Vec<Failure>)> {
    let model = DirichletModel::new(req.n, req.beta).map_err(|e| UsageError(e.to_string()))?;
    let n = req.n;
    let mut rows: Vec<ModelRow> = (1..=n)
        .map(|rank| ModelRow { rank, exact: None, approx: None, epsilon: None, mc_mean: None, mc_stderr: None })
        .collect();
    let mut failures = Vec::new();
    let mut fail = |rank: Option<usize>, what: &'static str, e: &dyn std::fmt::Display| {
        failures.push(Failure {
            subject: rank.map_or_else(|| "all ranks".into(), |r| format!("rank {r}")),
            stage: what,
            message: e.to_string(),
        })
    };
    let cache = MomentCache::new();
    if req.curves.contains(&Curve::Exact) {
        let raw: Vec<_> = (1..=n).into_par_iter().map(|r| cache.moment(&model, r, 1)).collect();
        if raw.iter().all(Result::is_ok) {
            match cache.expected_spectrum(&model) {
                Ok(s) => rows.iter_mut().zip(s.freqs()).for_each(|(row, &f)| row.exact = Some(f)),
                Err(e) => fail(None, "exact", &e),
            }
        } else {
            for (r, v) in raw.into_iter().enumerate() {
                if let Err(e) = v {
                    fail(Some(r + 1), "exact", &e);
                }
            }
        }
    }
    if req.curves.contains(&Curve::Approx) {
        match approx_spectrum(&model) {
            Ok(v) => rows.iter_mut().zip(v).for_each(|(row, f)| row.approx = Some(f)),
            Err(e) => fail(None, "approx", &e),
        }
    }
    if req.curves.contains(&Curve::Fluctuations) {
        let eps: Vec<_> = (1..=n).into_par_iter().map(|r| relative_fluctuation_exact(&model, r)).collect();
        for (row, e) in rows.iter_mut().zip(eps) {
            match e {
                Ok(v) => row.epsilon = Some(v),
                Err(e) => fail(Some(row.rank), "fluctuations", &e),
            }
        }
    }
    if req.samples > 0 {
        let mut acc = RankMoments::new(n);
        for s in DirichletSampler::new(model, seed).take(req.samples) {
            acc.push(s.freqs());
        }
        for ((row, &m), se) in rows.iter_mut().zip(acc.mean()).zip(acc.mean_stderr()) {
            row.mc_mean = Some(m);
            row.mc_stderr = Some(se);
        }
    }
    Ok((rows, failures))
}

pub fn cmd_model(req: &ModelRequest, settings: &Settings) -> anyhow::Result<RunReport> {
    init_threads(settings);
    let (rows, failures) = model_rows(req, settings.seed)?;
    create_out(&settings.out)?;
    let path = write_table(&settings.out, "model", &rows, settings.format)?;
    Ok(RunReport { written: vec![path], failures })
}

fn profile_rows(texts: &[TextProfiles], modes: &[Mode]) -> Vec<ProfileRow> {
    let mut rows = Vec::new();
    for t in texts {
        for &mode in modes {
            if let Some(p) = t.get(mode).filter(|_| mode != Mode::ExclusiveTypes) {
                rows.push(ProfileRow {
                    text_id: t.spec.text_id.clone(),
                    author: t.spec.author.clone().unwrap_or_default(),
                    mode: mode.to_string(),
                    token_count: p.token_count(),
                    type_count: p.word_types().len() as u64,
                    phoneme_total: p.total(),
                    coverage: p.coverage(),
                    oov_count: p.oov().len() as u64,
                });
            }
        }
    }
    rows
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn cmd_profile(settings: &Settings) -> anyhow::Result<RunReport> {
    init_threads(settings);
    let modes = settings.modes_or(&[Mode::All, Mode::Types]);
    let inp = inputs(settings)?;
    let need_types = modes.iter().any(|m| *m != Mode::All);
    let (texts, mut failures) =
        profile_texts(&inp.texts, &inp.source, modes.contains(&Mode::All), need_types, inp.cache.as_ref());
    let dir = settings.out.join("profiles");
    create_out(&dir)?;
    let mut written = Vec::new();
    for t in &texts {
        for &mode in &modes {
            if mode == Mode::ExclusiveTypes {
                continue;
            }
            let p = t.get(mode).expect("profiled mode");
            let path = dir.join(format!("{}.{mode}.json", file_stem_of(&t.spec.text_id)));
            write_json(&path, &p.to_record(false))?;
            written.push(path);
        }
    }
    if modes.contains(&Mode::ExclusiveTypes) {
        for (x, a) in texts.iter().enumerate() {
            for b in &texts[x + 1..] {
                let (pa, pb) = (a.types.as_ref().expect("types"), b.types.as_ref().expect("types"));
                match exclusive_profile(pa, pb, &inp.source.lexicon) {
                    Ok((ea, eb)) => {
                        for (p, other) in [(&ea, &b.spec.text_id), (&eb, &a.spec.text_id)] {
                            let path = dir.join(format!(
                                "{}.exclusive-types.{}.json",
                                file_stem_of(p.text_id()),
                                file_stem_of(other)
                            ));
                            write_json(&path, &p.to_record(false))?;
                            written.push(path);
                        }
                    }
                    Err(e) => failures.push(Failure {
                        subject: format!("{}-{}", a.spec.text_id, b.spec.text_id),
                        stage: "profile",
                        message: e.to_string(),
                    }),
                }
            }
        }
    }
    written.push(write_table(&settings.out, "profiles", &profile_rows(&texts, &modes), settings.format)?);
    Ok(RunReport { written, failures })
}

fn fit_rows(fits: &[(String, FitResult<f64>)], texts: &[TextProfiles], mode: Mode) -> Vec<FitRow> {
    let author: BTreeMap<&str, &str> = texts
        .iter()
        .map(|t| (t.spec.text_id.as_str(), t.spec.author.as_deref().unwrap_or("")))
        .collect();
    fits.iter()
        .map(|(id, f)| FitRow {
            text_id: id.clone(),
            author: author.get(id.as_str()).copied().unwrap_or("").to_owned(),
            mode: mode.to_string(),
            beta: f.beta_hat,
            ss_err_e7: f.ss_err * 1e7,
            r_squared: f.r_squared,
            grid_warning: f.grid_warning,
        })
        .collect()
}

/// Fits under each per-text mode, writing per-text spectra; returns the
/// fitted `β` of each mode for the margins.
fn run_fits(
    settings: &Settings,
    texts: &[TextProfiles],
    modes: &[Mode],
    report: &mut RunReport,
) -> anyhow::Result<BTreeMap<Mode, BTreeMap<String, f64>>> {
    let options = fit_options(settings)?;
    let cache = MomentCache::new();
    let spectra_dir = settings.out.join("spectra");
    create_out(&spectra_dir)?;
    let mut rows = Vec::new();
    let mut betas = BTreeMap::new();
    for &mode in modes.iter().filter(|m| **m != Mode::ExclusiveTypes) {
        let (fits, failures) = fit_texts(texts, mode, &options, &cache);
        report.failures.extend(failures);
        for (id, f) in &fits {
            let spectrum: Vec<SpectrumRow> = f
                .observed
                .freqs()
                .iter()
                .zip(f.predicted.freqs())
                .enumerate()
                .map(|(k, (&observed, &predicted))| SpectrumRow { rank: k + 1, observed, predicted })
                .collect();
            let name = format!("{}.{mode}", file_stem_of(id));
            report.written.push(write_table(&spectra_dir, &name, &spectrum, settings.format)?);
        }
        rows.extend(fit_rows(&fits, texts, mode));
        betas.insert(mode, fits.iter().map(|(id, f)| (id.clone(), f.beta_hat)).collect());
    }
    report.written.push(write_table(&settings.out, "fits", &rows, settings.format)?);
    Ok(betas)
}

pub fn cmd_fit(settings: &Settings) -> anyhow::Result<RunReport> {
    init_threads(settings);
    let modes = settings.modes_or(&[Mode::All, Mode::Types]);
    if modes.contains(&Mode::ExclusiveTypes) {
        return Err(UsageError::new("exclusive-types profiles are pairwise and cannot be fitted per text").into());
    }
    let inp = inputs(settings)?;
    let (texts, failures) = profile_texts(
        &inp.texts,
        &inp.source,
        modes.contains(&Mode::All),
        modes.contains(&Mode::Types),
        inp.cache.as_ref(),
    );
    create_out(&settings.out)?;
    let mut report = RunReport { written: Vec::new(), failures };
    run_fits(settings, &texts, &modes, &mut report)?;
    Ok(report)
}

fn run_distances(
    settings: &Settings,
    texts: &[TextProfiles],
    modes: &[Mode],
    lexicon: &Lexicon,
    report: &mut RunReport,
) -> anyhow::Result<BTreeMap<Mode, DistanceMatrix>> {
    let mut rows = Vec::new();
    let mut matrices = BTreeMap::new();
    for &mode in modes {
        match distance_matrix(texts, mode, lexicon) {
            Ok(m) => {
                rows.extend(m.pairs().into_iter().map(|p| DistanceRow {
                    text_i: p.text_i,
                    text_j: p.text_j,
                    rho0: p.rho0,
                    rho1: p.rho1,
                    mode: mode.to_string(),
                }));
                matrices.insert(mode, m);
            }
            Err(e) => report.failures.push(Failure {
                subject: mode.to_string(),
                stage: "distance",
                message: e.to_string(),
            }),
        }
    }
    report.written.push(write_table(&settings.out, "distances", &rows, settings.format)?);
    Ok(matrices)
}

fn profiled_for(settings: &Settings, modes: &[Mode]) -> anyhow::Result<(Inputs, Vec<TextProfiles>, RunReport)> {
    let inp = inputs(settings)?;
    let need_types = modes.iter().any(|m| *m != Mode::All);
    let (texts, failures) =
        profile_texts(&inp.texts, &inp.source, modes.contains(&Mode::All), need_types, inp.cache.as_ref());
    if texts.len() < 2 {
        anyhow::bail!("need at least two profiled texts, have {}", texts.len());
    }
    create_out(&settings.out)?;
    Ok((inp, texts, RunReport { written: Vec::new(), failures }))
}

pub fn cmd_distance(settings: &Settings) -> anyhow::Result<RunReport> {
    init_threads(settings);
    let modes = settings.modes_or(&Mode::EVERY);
    let (inp, texts, mut report) = profiled_for(settings, &modes)?;
    run_distances(settings, &texts, &modes, &inp.source.lexicon, &mut report)?;
    Ok(report)
}

/// Everything `cluster` computes, for callers that want it in memory.
#[derive(Debug)]
pub struct ClusterOutput {
    pub fits: BTreeMap<Mode, BTreeMap<String, f64>>,
    pub matrices: BTreeMap<Mode, DistanceMatrix>,
    pub margins: Vec<ClusterMargins>,
    pub common: Vec<CommonRow>,
    pub common_margins: Vec<CommonMarginRow>,
    pub attributions: Vec<AttributionRow>,
    pub scorecard: Option<ModeComparisonReport>,
}

/// Fits, distances, margins, attribution of held-out texts and the
/// cross-mode scorecard. With `leave_one_out`, labelled texts are also
/// attributed against every author, their own included without them.
pub fn run_cluster(settings: &Settings, leave_one_out: bool) -> anyhow::Result<(ClusterOutput, RunReport)> {
    init_threads(settings);
    let modes = settings.modes_or(&Mode::EVERY);
    let (inp, texts, mut report) = profiled_for(settings, &modes)?;
    let auth = authorship(&texts);
    let authors: std::collections::BTreeSet<&String> = auth.values().collect();
    if authors.len() < 2 {
        return Err(UsageError(format!("clustering needs at least two labelled authors, have {}", authors.len())).into());
    }
    let fits = run_fits(settings, &texts, &modes, &mut report)?;
    let matrices = run_distances(settings, &texts, &modes, &inp.source.lexicon, &mut report)?;

    let mut margins = Vec::new();
    for (&mode, m) in &matrices {
        // β margins need every labelled text fitted
        let betas = fits.get(&mode).filter(|b| auth.keys().all(|id| b.contains_key(id)));
        match cluster_margins(mode.name(), m, betas, &auth) {
            Ok(ms) => margins.extend(ms),
            Err(StylometryError::InsufficientTexts { .. }) if betas.is_some() => {
                log::warn!("{mode}: an author has a single text; β margins skipped");
                margins.extend(cluster_margins(mode.name(), m, None, &auth)?);
            }
            Err(e) => report.failures.push(Failure {
                subject: mode.to_string(),
                stage: "margins",
                message: e.to_string(),
            }),
        }
    }

    let mut common = Vec::new();
    let mut common_margins = Vec::new();
    if texts.iter().all(|t| t.types.is_some()) {
        common = common_fractions(&texts)?;
        let p: BTreeMap<(&str, &str), f64> = common
            .iter()
            .flat_map(|r| [((r.text_i.as_str(), r.text_j.as_str()), r.p), ((r.text_j.as_str(), r.text_i.as_str()), r.p)])
            .collect();
        let ids = texts.iter().map(|t| t.spec.text_id.as_str());
        match cluster_margins_with(ids, &auth, 2, |a, b| Ok(1.0 - p[&(a, b)])) {
            Ok(ms) => {
                common_margins = ms
                    .into_iter()
                    .map(|m| CommonMarginRow { author: m.author, min_inter: m.min_inter, max_intra: m.max_intra, value: m.value })
                    .collect()
            }
            Err(e) => log::warn!("shared-vocabulary margins skipped: {e}"),
        }
    }

    let mut attributions = Vec::new();
    for t in &texts {
        if t.spec.author.is_some() && !leave_one_out {
            continue;
        }
        for (&mode, m) in &matrices {
            for (author, a) in attribute_against_authors(&t.spec.text_id, m, &auth)? {
                attributions.extend(a.verdicts.into_iter().map(|v| AttributionRow {
                    candidate: t.spec.text_id.clone(),
                    author: author.clone(),
                    mode: mode.to_string(),
                    lambda: v.lambda,
                    max_to_candidate: v.max_to_candidate,
                    max_intra: v.max_intra,
                    verdict: v.verdict,
                }));
            }
        }
    }

    let scorecard = match (matrices.get(&Mode::All), matrices.get(&Mode::Types)) {
        (Some(all), Some(types)) => {
            let result = |mode: Mode, m| ModeResults { matrix: m, betas: fits.get(&mode) };
            let set = ModeSet {
                all: Some(result(Mode::All, all)),
                types: Some(result(Mode::Types, types)),
                exclusive: matrices.get(&Mode::ExclusiveTypes).map(|m| ModeResults { matrix: m, betas: None }),
            };
            match mode_comparison_report(&set, &auth, TIE_TOLERANCE) {
                Ok(r) => Some(r),
                Err(e) => {
                    report.failures.push(Failure { subject: "scorecard".into(), stage: "report", message: e.to_string() });
                    None
                }
            }
        }
        _ => None,
    };

    let fmt = settings.format;
    report.written.push(write_table(&settings.out, "margins", &margins, fmt)?);
    if !common.is_empty() {
        report.written.push(write_table(&settings.out, "common", &common, fmt)?);
        report.written.push(write_table(&settings.out, "common_margins", &common_margins, fmt)?);
    }
    report.written.push(write_table(&settings.out, "attributions", &attributions, fmt)?);
    if let Some(sc) = &scorecard {
        report.written.push(write_table(&settings.out, "scorecard", &sc.relations, fmt)?);
    }
    let out = ClusterOutput { fits, matrices, margins, common, common_margins, attributions, scorecard };
    Ok((out, report))
}

pub fn cmd_cluster(settings: &Settings, leave_one_out: bool) -> anyhow::Result<RunReport> {
    run_cluster(settings, leave_one_out).map(|(_, report)| report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_phoneme_model_at_beta_one() {
        let req = ModelRequest { n: 2, beta: 1.0, curves: vec![Curve::Exact], samples: 0 };
        let (rows, failures) = model_rows(&req, 0).unwrap();
        assert!(failures.is_empty());
        assert!((rows[0].exact.unwrap() - 0.75).abs() < 1e-9);
        assert!((rows[1].exact.unwrap() - 0.25).abs() < 1e-9);
        assert_eq!(rows[0].approx, None);
    }

    #[test]
    fn cache_keys_separate_inputs() {
        let k = |t: &[u8], d: &str, m: ProfileMode| ProfileCache::key(t, d, &m);
        let base = k(b"text", "lex", ProfileMode::AllTokens);
        assert_eq!(base, k(b"text", "lex", ProfileMode::AllTokens));
        assert_ne!(base, k(b"text!", "lex", ProfileMode::AllTokens));
        assert_ne!(base, k(b"text", "lex2", ProfileMode::AllTokens));
        assert_ne!(base, k(b"text", "lex", ProfileMode::DistinctTypes));
    }

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem_of("a/b c.txt"), "a_b_c.txt");
    }
}
