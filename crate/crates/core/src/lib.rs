//! Rank-frequency analysis of phoneme spectra.
//!
//! The expected sorted frequencies of a symmetric Dirichlet density serve as
//! a one-parameter model of how often the phonemes of a text occur, ordered
//! from most to least frequent. The fitted concentration `β` and the
//! distances between texts' phoneme frequencies are then used as author
//! signatures.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the pipeline uses.

// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod model;
pub mod numerics;
mod scalar;
pub mod stylometry;

pub use scalar::Scalar;

pub type DirichletModel = model::DirichletModel<f64>;
pub type RankedSpectrum = model::RankedSpectrum<f64>;
pub type MomentCache = model::MomentCache<f64>;
pub type FrequencyVector = corpus::FrequencyVector<f64>;
pub type FitResult = stylometry::FitResult<f64>;
pub type FitOptions = stylometry::FitOptions<f64>;
