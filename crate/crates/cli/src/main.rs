//! `phonorank`: phoneme rank-frequency fitting and author clustering.
//!
//! Exit status is 0 on success, 1 when some texts or stages failed but
//! outputs were written, and 2 on usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phonorank_cli::config::PartialSettings;
use phonorank_cli::pipeline::{self, Curve, ModelRequest};
use phonorank_cli::{RunReport, Settings, UsageError};

#[derive(Parser)]
#[command(name = "phonorank", version, about = "Phoneme rank-frequency fitting and author clustering")]
struct Cli {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate model curves for n phonemes at concentration beta.
    Model(ModelArgs),
    /// Count phonemes per text and write profiles.
    Profile(Common),
    /// Fit beta to each text's rank-frequency spectrum.
    Fit(Common),
    /// Distances between every pair of texts.
    Distance(Common),
    /// Fits, distances, author margins, attribution and the mode scorecard.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// Also attribute each labelled text against every author.
        #[arg(long)]
        leave_one_out: bool,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Number of phonemes.
    #[arg(long, short)]
    n: usize,
    /// Dirichlet concentration.
    #[arg(long, short)]
    beta: f64,
    /// Curves to compute: exact, approx, fluctuations.
    #[arg(long, value_delimiter = ',', default_value = "exact,approx,fluctuations")]
    curves: Vec<String>,
    /// Monte Carlo samples for a cross-check column.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Seed for sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Common {
    /// Text files; ids are file stems and the texts are held out.
    texts: Vec<PathBuf>,
    /// CSV manifest with columns text_id,author,path.
    #[arg(long)]
    authors: Option<PathBuf>,
    /// Pronunciation lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Lexicon format: tsv or cmudict.
    #[arg(long)]
    lexicon_format: Option<String>,
    /// Drop stress digits from phoneme symbols.
    #[arg(long)]
    strip_stress: bool,
    /// Extraction modes: all, types, exclusive-types (comma separated).
    #[arg(long, value_delimiter = ',')]
    mode: Vec<String>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    /// Relative and absolute tolerance of the beta search.
    #[arg(long)]
    tol: Option<f64>,
    /// Profile cache directory (default: OUT/cache).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Do not read or write the profile cache.
    #[arg(long)]
    no_cache: bool,
    #[command(flatten)]
    output: Output,
}

impl Output {
    fn partial(&self) -> PartialSettings {
        PartialSettings {
            out: self.out.clone(),
            format: self.format.clone(),
            seed: self.seed,
            threads: self.threads,
            ..Default::default()
        }
    }
}

impl Common {
    fn partial(&self) -> PartialSettings {
        PartialSettings {
            lexicon: self.lexicon.clone(),
            lexicon_format: self.lexicon_format.clone(),
            strip_stress: self.strip_stress.then_some(true),
            mode: (!self.mode.is_empty()).then(|| self.mode.clone()),
            beta_min: self.beta_min,
            beta_max: self.beta_max,
            tol: self.tol,
            authors: self.authors.clone(),
            texts: (!self.texts.is_empty()).then(|| self.texts.clone()),
            cache_dir: self.cache_dir.clone(),
            no_cache: self.no_cache.then_some(true),
            ..self.output.partial()
        }
    }
}

fn settings(flags: PartialSettings, config: Option<&PathBuf>) -> Result<Settings, UsageError> {
    let file = config.map(|p| PartialSettings::from_file(p)).transpose()?.unwrap_or_default();
    Settings::resolve(flags.or(file))
}

fn run(cli: Cli) -> anyhow::Result<RunReport> {
    let config = cli.config.as_ref();
    match cli.command {
        Command::Model(args) => {
            let curves = args.curves.iter().map(|c| c.parse()).collect::<Result<Vec<Curve>, _>>()?;
            let req = ModelRequest { n: args.n, beta: args.beta, curves, samples: args.samples };
            pipeline::cmd_model(&req, &settings(args.output.partial(), config)?)
        }
        Command::Profile(c) => pipeline::cmd_profile(&settings(c.partial(), config)?),
        Command::Fit(c) => pipeline::cmd_fit(&settings(c.partial(), config)?),
        Command::Distance(c) => pipeline::cmd_distance(&settings(c.partial(), config)?),
        Command::Cluster { common, leave_one_out } => {
            pipeline::cmd_cluster(&settings(common.partial(), config)?, leave_one_out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(report) => {
            for path in &report.written {
                log::info!("wrote {}", path.display());
            }
            for f in &report.failures {
                eprintln!("error: {} ({}): {}", f.subject, f.stage, f.message);
            }
            if report.is_complete() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
