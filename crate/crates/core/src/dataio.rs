//! Season and Elo file parsing, bundled league datasets, report output.
//!
//! Formats (UTF-8, dot decimals):
//!
//! * season CSV: `league,season,team,preference,final_rank`, one team per
//!   row; within a season the ranks must form exactly `1..n`;
//! * Elo CSV: `team,elo,win_probability` with probabilities strictly inside
//!   `(0, 1)`;
//! * report JSON/CSV: see [`AnalysisReport`]. Written numbers parse back
//!   bit-exactly.
//!
//! The two bundled datasets carry 25 Premier League and 25 La Liga seasons
//! (1992-93 through 2016-17): per team, the relative expected probability of
//! winning the season and the final rank. Weights are kept verbatim at their
//! published two-decimal precision; preferences are scale-free so no
//! renormalization is applied.

use crate::model::{Permutation, PreferenceVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

/// Errors from parsing and serialization.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("MalformedRow: line {line}: {detail}")]
    MalformedRow { line: usize, detail: String },
    #[error("RankGap: {league} {season}: {detail}")]
    RankGap {
        league: String,
        season: String,
        detail: String,
    },
    #[error("NonPositiveWeight: {league} {season}: team {team:?} has weight {value}")]
    NonPositiveWeight {
        league: String,
        season: String,
        team: String,
        value: f64,
    },
    #[error("DuplicateTeamInSeason: {league} {season}: team {team:?} listed twice")]
    DuplicateTeamInSeason {
        league: String,
        season: String,
        team: String,
    },
    #[error(
        "ProbabilityOutOfRange: line {line}: win_probability {value} not strictly inside (0, 1)"
    )]
    ProbabilityOutOfRange { line: usize, value: f64 },
    #[error("SeasonSize: {league} {season}: {n} teams outside the supported range 2..=64")]
    SeasonSize {
        league: String,
        season: String,
        n: usize,
    },
    #[error("IoFailure: {0}")]
    Io(#[from] std::io::Error),
    #[error("MalformedReport: {0}")]
    Json(#[from] serde_json::Error),
}

/// One team's row within a season.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonEntry {
    pub team: String,
    pub preference: f64,
    pub final_rank: usize,
}

/// One league season: labelled preferences plus the observed final ranking.
///
/// Construction validates that ranks form exactly `1..n` and that teams and
/// weights satisfy the model invariants, so the derived views cannot fail.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonRecord {
    league: String,
    season: String,
    entries: Vec<SeasonEntry>,
}

impl SeasonRecord {
    pub fn new(
        league: String,
        season: String,
        entries: Vec<SeasonEntry>,
    ) -> Result<Self, DataError> {
        let n = entries.len();
        if !(2..=64).contains(&n) {
            return Err(DataError::SeasonSize { league, season, n });
        }
        let mut rank_seen = vec![false; n];
        let mut teams = std::collections::HashSet::with_capacity(n);
        for e in &entries {
            if !e.preference.is_finite() || e.preference <= 0.0 {
                return Err(DataError::NonPositiveWeight {
                    league,
                    season,
                    team: e.team.clone(),
                    value: e.preference,
                });
            }
            if !teams.insert(e.team.as_str().to_owned()) {
                return Err(DataError::DuplicateTeamInSeason {
                    league,
                    season,
                    team: e.team.clone(),
                });
            }
            if e.final_rank < 1 || e.final_rank > n {
                return Err(DataError::RankGap {
                    league,
                    season,
                    detail: format!("rank {} out of range 1..={n}", e.final_rank),
                });
            }
            if rank_seen[e.final_rank - 1] {
                return Err(DataError::RankGap {
                    league,
                    season,
                    detail: format!("rank {} repeated", e.final_rank),
                });
            }
            rank_seen[e.final_rank - 1] = true;
        }
        Ok(Self {
            league,
            season,
            entries,
        })
    }

    pub fn league(&self) -> &str {
        &self.league
    }

    pub fn season(&self) -> &str {
        &self.season
    }

    pub fn entries(&self) -> &[SeasonEntry] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// Preferences in entry order, labelled by team name.
    pub fn preference_vector(&self) -> PreferenceVector {
        PreferenceVector::new(
            self.entries.iter().map(|e| e.team.clone()).collect(),
            self.entries.iter().map(|e| e.preference).collect(),
        )
        .expect("validated at construction")
    }

    /// The observed final ranking: entry indices in final-rank order, rank 1
    /// first, matching the draw order of the model.
    pub fn observed_permutation(&self) -> Permutation {
        let mut order = vec![0usize; self.n()];
        for (idx, e) in self.entries.iter().enumerate() {
            order[e.final_rank - 1] = idx;
        }
        Permutation::new(order).expect("ranks validated at construction")
    }
}

const SEASON_HEADER: &str = "league,season,team,preference,final_rank";
const ELO_HEADER: &str = "team,elo,win_probability";

fn split_fields(line: &str, expected: usize, line_no: usize) -> Result<Vec<&str>, DataError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(DataError::MalformedRow {
            line: line_no,
            detail: format!(
                "expected {expected} comma-separated fields, got {}",
                fields.len()
            ),
        });
    }
    Ok(fields)
}

fn parse_number(field: &str, what: &str, line_no: usize) -> Result<f64, DataError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| DataError::MalformedRow {
            line: line_no,
            detail: format!("{what} {field:?} is not a number"),
        })
}

/// Parses season records from CSV text. Seasons keep first-appearance order;
/// entries keep row order.
pub fn parse_seasons_str(text: &str) -> Result<Vec<SeasonRecord>, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SEASON_HEADER => {}
        other => {
            return Err(DataError::MalformedRow {
                line: 1,
                detail: format!(
                    "expected header {SEASON_HEADER:?}, got {:?}",
                    other.map(|(_, h)| h).unwrap_or("")
                ),
            })
        }
    }
    let mut keys: Vec<(String, String)> = Vec::new();
    let mut groups: std::collections::HashMap<(String, String), Vec<SeasonEntry>> =
        std::collections::HashMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, 5, line_no)?;
        let rank_f = parse_number(fields[4], "final_rank", line_no)?;
        if rank_f.fract() != 0.0 || rank_f < 0.0 {
            return Err(DataError::MalformedRow {
                line: line_no,
                detail: format!("final_rank {:?} is not a non-negative integer", fields[4]),
            });
        }
        let entry = SeasonEntry {
            team: fields[2].trim().to_owned(),
            preference: parse_number(fields[3], "preference", line_no)?,
            final_rank: rank_f as usize,
        };
        let key = (fields[0].trim().to_owned(), fields[1].trim().to_owned());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                keys.push(key.clone());
                Vec::new()
            })
            .push(entry);
    }
    keys.into_iter()
        .map(|key| {
            let entries = groups.remove(&key).expect("grouped above");
            SeasonRecord::new(key.0, key.1, entries)
        })
        .collect()
}

/// Parses a season CSV file.
pub fn parse_seasons(path: impl AsRef<Path>) -> Result<Vec<SeasonRecord>, DataError> {
    parse_seasons_str(&std::fs::read_to_string(path)?)
}

/// Canonical CSV serialization of season records (inverse of
/// [`parse_seasons_str`] up to number formatting).
pub fn seasons_to_csv(records: &[SeasonRecord]) -> String {
    let mut out = String::from(SEASON_HEADER);
    out.push('\n');
    for r in records {
        for e in &r.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.league, r.season, e.team, e.preference, e.final_rank
            ));
        }
    }
    out
}

/// Parses Elo observations from CSV text. An empty body yields an empty list.
pub fn parse_elo_str(text: &str) -> Result<Vec<crate::calibration::EloObservation>, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == ELO_HEADER => {}
        other => {
            return Err(DataError::MalformedRow {
                line: 1,
                detail: format!(
                    "expected header {ELO_HEADER:?}, got {:?}",
                    other.map(|(_, h)| h).unwrap_or("")
                ),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, 3, line_no)?;
        let elo = parse_number(fields[1], "elo", line_no)?;
        if !elo.is_finite() {
            return Err(DataError::MalformedRow {
                line: line_no,
                detail: format!("elo {:?} is not finite", fields[1]),
            });
        }
        let p = parse_number(fields[2], "win_probability", line_no)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(DataError::ProbabilityOutOfRange {
                line: line_no,
                value: p,
            });
        }
        out.push(crate::calibration::EloObservation {
            team: fields[0].trim().to_owned(),
            elo,
            win_probability: p,
        });
    }
    Ok(out)
}

/// Parses an Elo CSV file.
pub fn parse_elo(
    path: impl AsRef<Path>,
) -> Result<Vec<crate::calibration::EloObservation>, DataError> {
    parse_elo_str(&std::fs::read_to_string(path)?)
}

/// Run metadata carried in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub replications: u64,
    pub seed: u64,
    pub dataset_sha256: String,
    pub generated_at: String,
}

/// Per-season test outcome as serialized into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonResult {
    pub league: String,
    pub season: String,
    pub n: usize,
    pub observed_loglik: f64,
    pub p_value: f64,
    pub std_error: f64,
    pub tie_count: u64,
    pub surprisal: f64,
    pub reject_at_alpha: bool,
}

/// A full analysis run: metadata plus one row per season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub meta: ReportMeta,
    pub seasons: Vec<SeasonResult>,
}

/// Output format for [`write_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {other:?}, expected json or csv")),
        }
    }
}

const REPORT_CSV_HEADER: &str = "replications,seed,dataset_sha256,generated_at,league,season,n,observed_loglik,p_value,std_error,tie_count,surprisal,reject_at_alpha";

/// Renders a report. Numbers are written in shortest round-trip form, so
/// re-parsing reproduces every field bit-exactly.
pub fn report_to_string(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from(REPORT_CSV_HEADER);
            out.push('\n');
            let m = &report.meta;
            for s in &report.seasons {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    m.replications,
                    m.seed,
                    m.dataset_sha256,
                    m.generated_at,
                    s.league,
                    s.season,
                    s.n,
                    s.observed_loglik,
                    s.p_value,
                    s.std_error,
                    s.tie_count,
                    s.surprisal,
                    s.reject_at_alpha
                ));
            }
            out
        }
    }
}

/// Writes a report to `path` in the requested format.
pub fn write_report(
    report: &AnalysisReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<(), DataError> {
    Ok(std::fs::write(path, report_to_string(report, format))?)
}

/// Reads back a JSON report.
pub fn read_report_json(text: &str) -> Result<AnalysisReport, DataError> {
    Ok(serde_json::from_str(text)?)
}

/// Reads back a CSV report (meta taken from the first row).
pub fn read_report_csv(text: &str) -> Result<AnalysisReport, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == REPORT_CSV_HEADER => {}
        other => {
            return Err(DataError::MalformedRow {
                line: 1,
                detail: format!(
                    "expected header {REPORT_CSV_HEADER:?}, got {:?}",
                    other.map(|(_, h)| h).unwrap_or("")
                ),
            })
        }
    }
    let mut meta: Option<ReportMeta> = None;
    let mut seasons = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f = split_fields(line, 13, line_no)?;
        let parse_u64 = |field: &str, what: &str| -> Result<u64, DataError> {
            field.parse::<u64>().map_err(|_| DataError::MalformedRow {
                line: line_no,
                detail: format!("{what} {field:?} is not an integer"),
            })
        };
        let row_meta = ReportMeta {
            replications: parse_u64(f[0], "replications")?,
            seed: parse_u64(f[1], "seed")?,
            dataset_sha256: f[2].to_owned(),
            generated_at: f[3].to_owned(),
        };
        if meta.is_none() {
            meta = Some(row_meta);
        }
        let reject = match f[12].trim() {
            "true" => true,
            "false" => false,
            other => {
                return Err(DataError::MalformedRow {
                    line: line_no,
                    detail: format!("reject_at_alpha {other:?} is not a boolean"),
                })
            }
        };
        seasons.push(SeasonResult {
            league: f[4].to_owned(),
            season: f[5].to_owned(),
            n: parse_u64(f[6], "n")? as usize,
            observed_loglik: parse_number(f[7], "observed_loglik", line_no)?,
            p_value: parse_number(f[8], "p_value", line_no)?,
            std_error: parse_number(f[9], "std_error", line_no)?,
            tie_count: parse_u64(f[10], "tie_count")?,
            surprisal: parse_number(f[11], "surprisal", line_no)?,
            reject_at_alpha: reject,
        });
    }
    let meta = meta.ok_or_else(|| DataError::MalformedRow {
        line: 1,
        detail: "report has no data rows".into(),
    })?;
    Ok(AnalysisReport { meta, seasons })
}

/// Hex SHA-256 of raw bytes, used to pin dataset identity in report metadata.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// The datasets shipped with the crate.
pub mod bundled {
    use super::{parse_seasons_str, SeasonRecord};

    /// 25 Premier League seasons, 1992-93 through 2016-17.
    pub const PREMIER_LEAGUE_CSV: &str = include_str!("../data/premier_league.csv");
    /// 25 La Liga seasons, 1992-93 through 2016-17.
    pub const LA_LIGA_CSV: &str = include_str!("../data/la_liga.csv");

    /// Pinned content hashes of the bundled files.
    pub const PREMIER_LEAGUE_SHA256: &str =
        "cc618077edb954214e4dbb250432fd340034635bfab24437c71c9ccfdd5a6e76";
    pub const LA_LIGA_SHA256: &str =
        "6bc9a39325c3fe0e411c2c30fbaa295abbc8ff81e63f9db65e4d34b74590ba66";

    pub fn premier_league() -> Vec<SeasonRecord> {
        parse_seasons_str(PREMIER_LEAGUE_CSV).expect("bundled Premier League data is valid")
    }

    pub fn la_liga() -> Vec<SeasonRecord> {
        parse_seasons_str(LA_LIGA_CSV).expect("bundled La Liga data is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_premier_league_parses_with_expected_shape() {
        let seasons = bundled::premier_league();
        assert_eq!(seasons.len(), 25);
        assert_eq!(seasons[0].season(), "1992-93");
        for s in &seasons {
            let expected = if matches!(s.season(), "1992-93" | "1993-94" | "1994-95") {
                22
            } else {
                20
            };
            assert_eq!(s.n(), expected, "{}", s.season());
        }
        let first = &seasons[0];
        let top = first.entries().iter().find(|e| e.final_rank == 1).unwrap();
        assert_eq!(top.team, "Manchester United");
        assert_eq!(top.preference, 34.48);
    }

    #[test]
    fn bundled_la_liga_parses_with_expected_shape() {
        let seasons = bundled::la_liga();
        assert_eq!(seasons.len(), 25);
        for s in &seasons {
            let expected = if matches!(s.season(), "1995-96" | "1996-97") {
                22
            } else {
                20
            };
            assert_eq!(s.n(), expected, "{}", s.season());
        }
    }

    #[test]
    fn bundled_checksums_are_pinned() {
        assert_eq!(
            sha256_hex(bundled::PREMIER_LEAGUE_CSV.as_bytes()),
            bundled::PREMIER_LEAGUE_SHA256
        );
        assert_eq!(
            sha256_hex(bundled::LA_LIGA_CSV.as_bytes()),
            bundled::LA_LIGA_SHA256
        );
    }

    #[test]
    fn leicester_season_is_in_the_data() {
        let seasons = bundled::premier_league();
        let s = seasons.iter().find(|s| s.season() == "2015-16").unwrap();
        let top = s.entries().iter().find(|e| e.final_rank == 1).unwrap();
        assert_eq!(top.team, "Leicester City");
        assert_eq!(top.preference, 5.52);
    }

    #[test]
    fn observed_permutation_orders_by_rank() {
        let rec = SeasonRecord::new(
            "L".into(),
            "S".into(),
            vec![
                SeasonEntry {
                    team: "a".into(),
                    preference: 1.0,
                    final_rank: 2,
                },
                SeasonEntry {
                    team: "b".into(),
                    preference: 2.0,
                    final_rank: 3,
                },
                SeasonEntry {
                    team: "c".into(),
                    preference: 3.0,
                    final_rank: 1,
                },
            ],
        )
        .unwrap();
        assert_eq!(rec.observed_permutation().order(), &[2, 0, 1]);
        assert_eq!(rec.preference_vector().weights(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rank_zero_is_a_gap() {
        let text = "league,season,team,preference,final_rank\nL,S,a,1.0,0\nL,S,b,2.0,1\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::RankGap { .. }
        ));
    }

    #[test]
    fn repeated_and_missing_ranks_are_gaps() {
        let text = "league,season,team,preference,final_rank\nL,S,a,1.0,1\nL,S,b,2.0,1\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::RankGap { .. }
        ));
        let text =
            "league,season,team,preference,final_rank\nL,S,a,1.0,1\nL,S,b,2.0,3\nL,S,c,2.0,4\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::RankGap { .. }
        ));
    }

    #[test]
    fn duplicate_team_and_bad_weight_are_rejected() {
        let text = "league,season,team,preference,final_rank\nL,S,a,1.0,1\nL,S,a,2.0,2\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::DuplicateTeamInSeason { .. }
        ));
        let text = "league,season,team,preference,final_rank\nL,S,a,-1.0,1\nL,S,b,2.0,2\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::NonPositiveWeight { .. }
        ));
    }

    #[test]
    fn malformed_rows_are_reported_with_line_numbers() {
        let text = "league,season,team,preference,final_rank\nL,S,a,1.0\n";
        match parse_seasons_str(text).unwrap_err() {
            DataError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = "league,season,team,preference,final_rank\nL,S,a,abc,1\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::MalformedRow { line: 2, .. }
        ));
    }

    #[test]
    fn single_team_season_is_too_small() {
        let text = "league,season,team,preference,final_rank\nL,S,a,1.0,1\n";
        assert!(matches!(
            parse_seasons_str(text).unwrap_err(),
            DataError::SeasonSize { n: 1, .. }
        ));
    }

    #[test]
    fn season_round_trip_preserves_records() {
        let records = bundled::premier_league();
        let rewritten = seasons_to_csv(&records);
        let reparsed = parse_seasons_str(&rewritten).unwrap();
        assert_eq!(records, reparsed);
    }

    #[test]
    fn elo_parsing_accepts_schema_and_rejects_bad_probability() {
        let text = "team,elo,win_probability\nArsenal,1950,0.12\n";
        let obs = parse_elo_str(text).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].team, "Arsenal");
        assert_eq!(obs[0].elo, 1950.0);
        assert_eq!(obs[0].win_probability, 0.12);

        let text = "team,elo,win_probability\nArsenal,1950,1.0\n";
        assert!(matches!(
            parse_elo_str(text).unwrap_err(),
            DataError::ProbabilityOutOfRange { line: 2, .. }
        ));
        assert!(parse_elo_str("team,elo,win_probability\n")
            .unwrap()
            .is_empty());
    }

    fn sample_report() -> AnalysisReport {
        AnalysisReport {
            meta: ReportMeta {
                replications: 1_000_000,
                seed: 42,
                dataset_sha256: bundled::PREMIER_LEAGUE_SHA256.into(),
                generated_at: "2017-08-01T00:00:00Z".into(),
            },
            seasons: vec![
                SeasonResult {
                    league: "Premier League".into(),
                    season: "1992-93".into(),
                    n: 22,
                    observed_loglik: -77.123_456_789_012_34,
                    p_value: 0.003_09,
                    std_error: 5.551_115_123_125_783e-5,
                    tie_count: 3,
                    surprisal: 5.779_584_188_072_483,
                    reject_at_alpha: true,
                },
                SeasonResult {
                    league: "Premier League".into(),
                    season: "1999-00".into(),
                    n: 20,
                    observed_loglik: -0.1 - 0.2,
                    p_value: 0.998_17,
                    std_error: 1e-17,
                    tie_count: 0,
                    surprisal: 0.001_831_675_967_465_413,
                    reject_at_alpha: false,
                },
            ],
        }
    }

    #[test]
    fn json_report_round_trips_bit_exactly() {
        let report = sample_report();
        let text = report_to_string(&report, ReportFormat::Json);
        let back = read_report_json(&text).unwrap();
        assert_eq!(report, back);
        for (a, b) in report.seasons.iter().zip(&back.seasons) {
            assert_eq!(a.observed_loglik.to_bits(), b.observed_loglik.to_bits());
            assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
            assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
            assert_eq!(a.surprisal.to_bits(), b.surprisal.to_bits());
        }
    }

    #[test]
    fn csv_report_round_trips_bit_exactly() {
        let report = sample_report();
        let text = report_to_string(&report, ReportFormat::Csv);
        assert!(text.starts_with(REPORT_CSV_HEADER));
        assert_eq!(text.lines().count(), 1 + report.seasons.len());
        let back = read_report_csv(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn json_report_has_exactly_the_documented_keys() {
        let text = report_to_string(&sample_report(), ReportFormat::Json);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let obj = value.as_object().unwrap();
        let mut top: Vec<&str> = obj.keys().map(|s| s.as_str()).collect();
        top.sort_unstable();
        assert_eq!(top, ["meta", "seasons"]);
        let mut meta: Vec<&str> = obj["meta"]
            .as_object()
            .unwrap()
            .keys()
            .map(|s| s.as_str())
            .collect();
        meta.sort_unstable();
        assert_eq!(
            meta,
            ["dataset_sha256", "generated_at", "replications", "seed"]
        );
        let mut season: Vec<&str> = obj["seasons"][0]
            .as_object()
            .unwrap()
            .keys()
            .map(|s| s.as_str())
            .collect();
        season.sort_unstable();
        assert_eq!(
            season,
            [
                "league",
                "n",
                "observed_loglik",
                "p_value",
                "reject_at_alpha",
                "season",
                "std_error",
                "surprisal",
                "tie_count"
            ]
        );
    }

    #[test]
    fn write_report_surfaces_io_failure() {
        let report = sample_report();
        let err = write_report(
            &report,
            ReportFormat::Json,
            "/nonexistent-dir-for-sure/report.json",
        )
        .unwrap_err();
        assert!(matches!(err, DataError::Io(_)));
    }
}
