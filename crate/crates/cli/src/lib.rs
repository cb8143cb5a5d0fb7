//! File-level pipeline behind the `phonorank` binary: reading texts and a
//! pronunciation lexicon, caching phoneme profiles, fitting, computing
//! distances and margins, and writing the results as CSV or JSON tables.

pub mod config;
pub mod pipeline;
pub mod tables;

pub use config::{Mode, PartialSettings, Settings, TextSpec, UsageError};
pub use pipeline::{ClusterOutput, Curve, Failure, ModelRequest, RunReport};
pub use tables::Format;
