//! Fitting `β` to observed spectra, distances between texts, author-cluster
//! margins and the attribution rule.

mod distance;
mod fit;
mod margins;
mod report;

pub use distance::{rho0, rho1, DistanceMatrix, DistancePair};
pub use fit::{fit_beta, r_squared, ss_err, FitOptions, FitResult};
pub use margins::{
    attribute, attribute_against_authors, cluster_margins, cluster_margins_beta,
    cluster_margins_distance, cluster_margins_with, Attribution, Authorship, ClusterMargins,
    LambdaVerdict, Margin, Verdict,
};
pub use report::{
    mode_comparison_report, ModeComparisonReport, ModeResults, ModeSet, Outcome, Relation,
    RelationKind, Tally,
};

use thiserror::Error;

use crate::model::ModelError;
use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum StylometryError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("frequency vectors use different phoneme inventories")]
    InventoryMismatch,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("author {author} has {count} texts, need {need}")]
    InsufficientTexts { author: String, count: usize, need: usize },
    #[error("{0} authors, need at least 2")]
    InsufficientAuthors(usize),
    #[error("no distance between {0} and {1}")]
    MissingPair(String, String),
    #[error("unknown text {0}")]
    UnknownText(String),
    #[error("text {0} listed twice")]
    DuplicateText(String),
    #[error("incomplete mode set: {0}")]
    ModeSetIncomplete(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, StylometryError>;
