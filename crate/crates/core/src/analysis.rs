//! Report pipeline: run the Monte Carlo test on every season of a dataset.
//!
//! Seasons are processed concurrently. Season `k` of a run always draws its
//! replications from seed [`derive_season_seed`]`(master_seed, k)`, so the
//! resulting report is a pure function of `(dataset, replications,
//! master_seed, alpha)`, whatever the worker count.

use crate::dataio::{AnalysisReport, ReportMeta, SeasonRecord, SeasonResult};
use crate::lrtest::{decide, mc_pvalue, Decision, TestConfig, TestError};
use rayon::prelude::*;

/// SplitMix64 finalizer; full-avalanche mix of a 64-bit state.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-season master seed. Fixed formula: changing it changes every report,
/// so it is part of the reproducibility contract.
pub fn derive_season_seed(master_seed: u64, season_index: u64) -> u64 {
    splitmix64(
        master_seed
            ^ season_index
                .wrapping_add(1)
                .wrapping_mul(0x9e37_79b9_7f4a_7c15),
    )
}

/// Runs one Monte Carlo test per season and assembles the result rows.
pub fn analyze_seasons(
    records: &[SeasonRecord],
    replications: u64,
    master_seed: u64,
    alpha: f64,
) -> Result<Vec<SeasonResult>, TestError> {
    records
        .par_iter()
        .enumerate()
        .map(|(index, record)| {
            let cfg = TestConfig {
                replications,
                master_seed: derive_season_seed(master_seed, index as u64),
                alpha,
                ..TestConfig::default()
            };
            let q = record.preference_vector();
            let observed = record.observed_permutation();
            let result = mc_pvalue(&q, &observed, &cfg)?;
            Ok(SeasonResult {
                league: record.league().to_owned(),
                season: record.season().to_owned(),
                n: record.n(),
                observed_loglik: result.observed_ell,
                p_value: result.p_value,
                std_error: result.std_error.unwrap_or(0.0),
                tie_count: result.tie_count,
                surprisal: result.surprisal,
                reject_at_alpha: decide(&result, alpha) == Decision::Reject,
            })
        })
        .collect()
}

/// [`analyze_seasons`] plus report metadata.
pub fn build_report(
    records: &[SeasonRecord],
    replications: u64,
    master_seed: u64,
    alpha: f64,
    dataset_sha256: String,
    generated_at: String,
) -> Result<AnalysisReport, TestError> {
    Ok(AnalysisReport {
        meta: ReportMeta {
            replications,
            seed: master_seed,
            dataset_sha256,
            generated_at,
        },
        seasons: analyze_seasons(records, replications, master_seed, alpha)?,
    })
}

/// RFC 3339 timestamp for report metadata. Honors `SOURCE_DATE_EPOCH`
/// (seconds since the Unix epoch) so that reproducible runs can produce
/// byte-identical reports.
pub fn report_timestamp() -> String {
    use chrono::{DateTime, SecondsFormat, Utc};
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|raw| raw.parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}
