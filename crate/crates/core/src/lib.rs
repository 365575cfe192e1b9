//! Biased random permutations: model, sampling, testing, calibration.
//!
//! The crate centers on rankings drawn by sampling without replacement with
//! selection probability proportional to per-object preference weights — the
//! Plackett-Luce ranking law. On top of the probability model it provides:
//!
//! * [`model`] — the likelihood of a ranking under given preferences and its
//!   elementary consequences (scale invariance, extreme permutations);
//! * [`sampler`] — reproducible random rankings via exponential-race keys,
//!   one counter-indexed RNG stream per draw;
//! * [`lrtest`] — the likelihood-ratio test of observed rankings against
//!   hypothesized preferences, with exact (enumeration) and Monte Carlo
//!   p-values, surprisal reporting, and tie accounting;
//! * [`calibration`] — OLS and robust Huber fits mapping Elo ratings to
//!   log win probability, and conversion of ratings into preference vectors;
//! * [`dataio`] — season/Elo CSV parsing, bundled Premier League and La Liga
//!   datasets, and JSON/CSV report serialization;
//! * [`analysis`] — the per-season test pipeline behind the `analyze`
//!   command.
//!
//! The `permbias` binary exposes each piece as a subcommand.

pub mod analysis;
pub mod calibration;
pub mod dataio;
pub mod lrtest;
pub mod model;
pub mod sampler;

pub use calibration::{EloObservation, FitMethod, LinearFit};
pub use dataio::{AnalysisReport, SeasonRecord};
pub use lrtest::{Decision, Method, TestConfig, TestResult};
pub use model::{ModelError, Permutation, PreferenceVector};
pub use sampler::{KeyedDraw, RngStream};
