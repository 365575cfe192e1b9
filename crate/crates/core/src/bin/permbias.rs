//! Command-line front end: sampling, likelihood evaluation, exact and Monte
//! Carlo p-values, Elo calibration, and whole-dataset season analysis.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 I/O error.

use clap::{Args, Parser, Subcommand};
use permbias::analysis::{build_report, report_timestamp};
use permbias::calibration::{elo_to_preferences, fit_huber, fit_ols, FitError, LinearFit};
use permbias::dataio::{
    parse_elo, parse_seasons, sha256_hex, write_report, DataError, ReportFormat, SeasonRecord,
};
use permbias::lrtest::{
    decide, exact_pvalue_with_max_n, mc_pvalue, Decision, TestConfig, TestError, TestResult,
    DEFAULT_ALPHA, DEFAULT_EXACT_MAX_N, DEFAULT_REPLICATIONS,
};
use permbias::model::{ModelError, Permutation, PreferenceVector};
use permbias::sampler::sample_batch;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "permbias",
    version,
    about = "Biased permutations: sample rankings, test observed rankings against preferences, calibrate preferences from Elo ratings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the preference vector comes from: inline weights or a season file.
#[derive(Args)]
struct QSource {
    /// Inline weights, e.g. --weights 3,1,2 (labels become "1","2",...)
    #[arg(long, value_name = "CSVLIST")]
    weights: Option<String>,
    /// Season CSV (league,season,team,preference,final_rank)
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Select a league when --input holds several
    #[arg(long, value_name = "NAME")]
    league: Option<String>,
    /// Select a season when --input holds several
    #[arg(long, value_name = "LABEL")]
    season: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random rankings and print them, one per line, as labels in rank order
    Sample {
        #[command(flatten)]
        q: QSource,
        /// Number of rankings to draw
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Master seed (defaults to entropy; echoed to stderr)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the (log-)likelihood of an observed ranking
    Loglik {
        #[command(flatten)]
        q: QSource,
        /// Observed ranking as labels in rank order, e.g. --observed 2,3,1
        #[arg(long, value_name = "CSVLIST")]
        observed: Option<String>,
    },
    /// Exact p-value by full enumeration (small n only)
    Exact {
        #[command(flatten)]
        q: QSource,
        #[arg(long, value_name = "CSVLIST")]
        observed: Option<String>,
        /// Largest n the enumeration will accept (hard cap 12)
        #[arg(long, default_value_t = DEFAULT_EXACT_MAX_N)]
        exact_max_n: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Monte Carlo p-value of an observed ranking
    Pvalue {
        #[command(flatten)]
        q: QSource,
        #[arg(long, value_name = "CSVLIST")]
        observed: Option<String>,
        #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
        replications: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Worker threads (defaults to available parallelism; results do not depend on it)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit the Elo -> log win-probability line (OLS and robust Huber)
    Calibrate {
        /// Elo CSV (team,elo,win_probability)
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Write the Huber-calibrated preferences as CSV (team,preference)
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Run the Monte Carlo test on every season of a dataset and write a report
    Analyze {
        /// Season CSV (league,season,team,preference,final_rank)
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
        replications: u64,
        /// Master seed (defaults to entropy; echoed into the report metadata)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Report format
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Report path (defaults to report.json / report.csv)
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
        /// Worker threads (defaults to available parallelism; results do not depend on it)
        #[arg(long)]
        threads: Option<usize>,
    },
}

enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TestError> for CliError {
    fn from(e: TestError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sample { q, count, seed } => cmd_sample(&q, count, seed),
        Command::Loglik { q, observed } => cmd_loglik(&q, observed.as_deref()),
        Command::Exact {
            q,
            observed,
            exact_max_n,
            alpha,
        } => cmd_exact(&q, observed.as_deref(), exact_max_n, alpha),
        Command::Pvalue {
            q,
            observed,
            replications,
            seed,
            alpha,
            threads,
        } => cmd_pvalue(&q, observed.as_deref(), replications, seed, alpha, threads),
        Command::Calibrate { input, output } => cmd_calibrate(&input, output.as_deref()),
        Command::Analyze {
            input,
            replications,
            seed,
            alpha,
            format,
            output,
            threads,
        } => cmd_analyze(&input, replications, seed, alpha, format, output, threads),
    }
}

/// Resolves inline weights or a season-file selection into a preference
/// vector plus, for season files, the recorded final ranking.
fn resolve_q(src: &QSource) -> Result<(PreferenceVector, Option<Permutation>), CliError> {
    match (&src.weights, &src.input) {
        (Some(_), Some(_)) => Err(CliError::Validation(
            "give either --weights or --input, not both".into(),
        )),
        (None, None) => Err(CliError::Validation(
            "a preference source is required: --weights or --input".into(),
        )),
        (Some(list), None) => {
            let weights = parse_f64_list(list)?;
            Ok((PreferenceVector::from_weights(weights)?, None))
        }
        (None, Some(path)) => {
            let record = select_season(&parse_seasons(path)?, src)?;
            Ok((
                record.preference_vector(),
                Some(record.observed_permutation()),
            ))
        }
    }
}

fn parse_f64_list(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("{s:?} is not a number")))
        })
        .collect()
}

fn select_season(records: &[SeasonRecord], src: &QSource) -> Result<SeasonRecord, CliError> {
    let matches: Vec<&SeasonRecord> = records
        .iter()
        .filter(|r| src.league.as_deref().is_none_or(|l| r.league() == l))
        .filter(|r| src.season.as_deref().is_none_or(|s| r.season() == s))
        .collect();
    match matches.as_slice() {
        [one] => Ok((*one).clone()),
        [] => Err(CliError::Validation(
            "no season matches the given --league/--season selection".into(),
        )),
        many => Err(CliError::Validation(format!(
            "{} seasons match; narrow the selection with --league/--season (first matches: {})",
            many.len(),
            many.iter()
                .take(3)
                .map(|r| format!("{} {}", r.league(), r.season()))
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

/// Maps `--observed` labels in rank order onto indices into `q`.
fn resolve_observed(
    q: &PreferenceVector,
    flag: Option<&str>,
    from_season: Option<Permutation>,
) -> Result<Permutation, CliError> {
    if let Some(list) = flag {
        let labels: Vec<&str> = list.split(',').map(str::trim).collect();
        let order = labels
            .iter()
            .map(|lbl| {
                q.labels()
                    .iter()
                    .position(|x| x == lbl)
                    .ok_or_else(|| CliError::Validation(format!("unknown label {lbl:?}")))
            })
            .collect::<Result<Vec<usize>, _>>()?;
        Ok(Permutation::new(order)?)
    } else {
        from_season.ok_or_else(|| {
            CliError::Validation(
                "--observed is required when the preference source carries no ranking".into(),
            )
        })
    }
}

fn entropy_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    // SplitMix64 finalizer over time-of-day and pid.
    let mut z = nanos ^ (u64::from(std::process::id()) << 32);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s = entropy_seed();
            eprintln!("seed: {s} (from entropy; pass --seed to reproduce)");
            s
        }
    }
}

fn install_pool<T>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(job()),
        Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn cmd_sample(src: &QSource, count: u64, seed: Option<u64>) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::Validation("--count must be at least 1".into()));
    }
    let (q, _) = resolve_q(src)?;
    let seed = seed_or_entropy(seed);
    let batch = sample_batch(&q, count, seed).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut out = String::new();
    for (perm, _) in batch {
        let labels: Vec<&str> = perm
            .order()
            .iter()
            .map(|&i| q.labels()[i].as_str())
            .collect();
        out.push_str(&labels.join(","));
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn cmd_loglik(src: &QSource, observed: Option<&str>) -> Result<(), CliError> {
    let (q, season_perm) = resolve_q(src)?;
    let perm = resolve_observed(&q, observed, season_perm)?;
    println!("reduced_loglik: {}", q.log_likelihood(&perm)?);
    println!("full_loglik: {}", q.full_log_likelihood(&perm)?);
    println!("likelihood: {}", q.likelihood(&perm)?);
    Ok(())
}

fn print_test_result(r: &TestResult, alpha: f64) {
    println!("method: {}", r.method);
    println!("observed_loglik: {}", r.observed_ell);
    println!("p_value: {}", r.p_value);
    if let Some(se) = r.std_error {
        println!("std_error: {se}");
        println!("ci95: [{}, {}]", r.ci95.0, r.ci95.1);
        println!("replications: {}", r.replications_used);
    }
    println!("tie_count: {}", r.tie_count);
    if r.surprisal_censored {
        println!(
            "surprisal: >= {} (censored: no draw fell below)",
            r.surprisal
        );
    } else {
        println!("surprisal: {}", r.surprisal);
    }
    let verdict = match decide(r, alpha) {
        Decision::Reject => "reject",
        Decision::NoReject => "no-reject",
    };
    println!("decision at alpha {alpha}: {verdict}");
}

fn cmd_exact(
    src: &QSource,
    observed: Option<&str>,
    exact_max_n: usize,
    alpha: f64,
) -> Result<(), CliError> {
    let (q, season_perm) = resolve_q(src)?;
    let perm = resolve_observed(&q, observed, season_perm)?;
    let result = exact_pvalue_with_max_n(&q, &perm, exact_max_n)?;
    print_test_result(&result, alpha);
    Ok(())
}

fn cmd_pvalue(
    src: &QSource,
    observed: Option<&str>,
    replications: u64,
    seed: Option<u64>,
    alpha: f64,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let (q, season_perm) = resolve_q(src)?;
    let perm = resolve_observed(&q, observed, season_perm)?;
    let cfg = TestConfig {
        replications,
        master_seed: seed_or_entropy(seed),
        alpha,
        ..TestConfig::default()
    };
    let result = install_pool(threads, || mc_pvalue(&q, &perm, &cfg))??;
    print_test_result(&result, alpha);
    Ok(())
}

fn print_fit(name: &str, fit: &LinearFit) {
    println!(
        "{name}: slope={} intercept={} r_squared={:.4} iterations={} converged={}",
        fit.slope, fit.intercept, fit.r_squared, fit.iterations, fit.converged
    );
}

fn cmd_calibrate(input: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let data = parse_elo(input)?;
    let ols = fit_ols(&data)?;
    let huber = fit_huber(&data)?;
    print_fit("ols", &ols);
    print_fit("huber", &huber);
    if !huber.converged {
        eprintln!("warning: Huber IRLS did not converge; reporting the last iterate");
    }
    if let Some(path) = output {
        let elos: Vec<(String, f64)> = data.iter().map(|o| (o.team.clone(), o.elo)).collect();
        let q = elo_to_preferences(&huber, &elos)?;
        let mut csv = String::from("team,preference\n");
        for (label, weight) in q.labels().iter().zip(q.weights()) {
            csv.push_str(&format!("{label},{weight}\n"));
        }
        std::fs::write(path, csv).map_err(|e| CliError::Io(format!("IoFailure: {e}")))?;
        eprintln!("preferences written to {}", path.display());
    }
    Ok(())
}

fn cmd_analyze(
    input: &Path,
    replications: u64,
    seed: Option<u64>,
    alpha: f64,
    format: ReportFormat,
    output: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Validation(format!(
            "InvalidConfig: alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let raw = std::fs::read(input).map_err(|e| CliError::Io(format!("IoFailure: {e}")))?;
    let records = permbias::dataio::parse_seasons_str(
        std::str::from_utf8(&raw)
            .map_err(|e| CliError::Validation(format!("MalformedRow: not UTF-8: {e}")))?,
    )?;
    for r in &records {
        if matches!(r.league(), "Premier League" | "La Liga") && !matches!(r.n(), 20 | 22) {
            eprintln!(
                "warning: {} {} has {} teams, unusual for this league",
                r.league(),
                r.season(),
                r.n()
            );
        }
    }
    let seed = seed_or_entropy(seed);
    let report = install_pool(threads, || {
        build_report(
            &records,
            replications,
            seed,
            alpha,
            sha256_hex(&raw),
            report_timestamp(),
        )
    })??;

    println!(
        "{:<16} {:<8} {:>2} {:>22} {:>22} {:>22} {:>6} {:>22} reject@{alpha}",
        "league", "season", "n", "observed_loglik", "p_value", "std_error", "ties", "surprisal"
    );
    for s in &report.seasons {
        println!(
            "{:<16} {:<8} {:>2} {:>22} {:>22} {:>22} {:>6} {:>22} {}",
            s.league,
            s.season,
            s.n,
            s.observed_loglik,
            s.p_value,
            s.std_error,
            s.tie_count,
            s.surprisal,
            if s.reject_at_alpha { "yes" } else { "no" }
        );
    }

    let path = output.unwrap_or_else(|| {
        PathBuf::from(match format {
            ReportFormat::Json => "report.json",
            ReportFormat::Csv => "report.csv",
        })
    });
    write_report(&report, format, &path)?;
    eprintln!("report written to {}", path.display());
    Ok(())
}
