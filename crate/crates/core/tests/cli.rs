//! End-to-end tests of the `permbias` binary: output shapes, exit codes,
//! determinism, and agreement between the stdout summary and written reports.

use permbias::dataio::{read_report_csv, read_report_json, AnalysisReport};
use permbias::lrtest::{mc_pvalue, TestConfig};
use permbias::model::{Permutation, PreferenceVector};
use std::path::Path;
use std::process::{Command, Output};

const TOY_SEASONS: &str = "league,season,team,preference,final_rank\n\
Toy League,2001-02,Alpha,8.0,1\n\
Toy League,2001-02,Beta,4.0,2\n\
Toy League,2001-02,Gamma,2.0,3\n\
Toy League,2001-02,Delta,1.0,4\n\
Toy League,2002-03,Alpha,8.0,4\n\
Toy League,2002-03,Beta,4.0,3\n\
Toy League,2002-03,Gamma,2.0,2\n\
Toy League,2002-03,Delta,1.0,1\n";

fn permbias(args: &[&str], envs: &[(&str, &str)], cwd: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_permbias"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn sample_emits_permutations_deterministically() {
    let args = ["sample", "--weights", "1,1", "--count", "4", "--seed", "7"];
    let first = permbias(&args, &[], None);
    assert!(first.status.success());
    let text = stdout_of(&first);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(lines.len(), 4);
    for line in &lines {
        assert!(*line == "1,2" || *line == "2,1", "unexpected line {line:?}");
    }
    let second = permbias(&args, &[], None);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn sample_rejects_nonpositive_weights_with_exit_2() {
    let out = permbias(&["sample", "--weights", "1,-1"], &[], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("NonPositiveWeight"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn sample_rejects_zero_count() {
    let out = permbias(
        &["sample", "--weights", "1,2", "--count", "0", "--seed", "1"],
        &[],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn loglik_matches_library_values() {
    let out = permbias(
        &["loglik", "--weights", "3,1,2", "--observed", "2,3,1"],
        &[],
        None,
    );
    assert!(out.status.success());
    let text = stdout_of(&out);
    let q = PreferenceVector::from_weights(vec![3.0, 1.0, 2.0]).unwrap();
    let p = Permutation::new(vec![1, 2, 0]).unwrap();
    assert!(text.contains(&format!(
        "reduced_loglik: {}",
        q.log_likelihood(&p).unwrap()
    )));
    assert!(text.contains(&format!("likelihood: {}", q.likelihood(&p).unwrap())));
}

#[test]
fn exact_subcommand_reports_the_enumerated_pvalue() {
    let out = permbias(
        &["exact", "--weights", "1,2,3", "--observed", "3,2,1"],
        &[],
        None,
    );
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("method: exact"));
    let printed: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("p_value: "))
        .expect("p_value line")
        .parse()
        .unwrap();
    assert!((printed - 2.0 / 3.0).abs() < 1e-12, "{text}");
}

#[test]
fn pvalue_subcommand_matches_library_run() {
    let out = permbias(
        &[
            "pvalue",
            "--weights",
            "5,3,1",
            "--observed",
            "3,2,1",
            "--replications",
            "20000",
            "--seed",
            "5",
        ],
        &[],
        None,
    );
    assert!(out.status.success());
    let q = PreferenceVector::from_weights(vec![5.0, 3.0, 1.0]).unwrap();
    let p = Permutation::new(vec![2, 1, 0]).unwrap();
    let cfg = TestConfig {
        replications: 20_000,
        master_seed: 5,
        ..TestConfig::default()
    };
    let expect = mc_pvalue(&q, &p, &cfg).unwrap();
    let text = stdout_of(&out);
    assert!(text.contains("method: monte-carlo"));
    assert!(
        text.contains(&format!("p_value: {}", expect.p_value)),
        "stdout {text} vs {}",
        expect.p_value
    );
}

#[test]
fn pvalue_rejects_zero_replications() {
    let out = permbias(
        &[
            "pvalue",
            "--weights",
            "1,2",
            "--observed",
            "1,2",
            "--replications",
            "0",
        ],
        &[],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("InvalidConfig"));
}

#[test]
fn analyze_writes_report_matching_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    std::fs::write(&input, TOY_SEASONS).unwrap();
    let report_path = dir.path().join("report.json");
    let out = permbias(
        &[
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--replications",
            "5000",
            "--seed",
            "9",
            "--output",
            report_path.to_str().unwrap(),
        ],
        &[],
        None,
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report: AnalysisReport =
        read_report_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.meta.replications, 5000);
    assert_eq!(report.meta.seed, 9);
    assert_eq!(report.seasons.len(), 2);
    let text = stdout_of(&out);
    for season in &report.seasons {
        // The summary table prints the same shortest-round-trip values that
        // land in the report.
        assert!(text.contains(&season.season), "{text}");
        assert!(
            text.contains(&format!("{}", season.p_value)),
            "summary lacks p={} for {}",
            season.p_value,
            season.season
        );
        assert!(text.contains(&format!("{}", season.observed_loglik)));
    }
    // A favourite-order season keeps H0, a reversed one rejects.
    assert!(!report.seasons[0].reject_at_alpha);
    assert!(report.seasons[1].reject_at_alpha);
}

#[test]
fn analyze_csv_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    std::fs::write(&input, TOY_SEASONS).unwrap();
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    for (format, path) in [("json", &json_path), ("csv", &csv_path)] {
        let out = permbias(
            &[
                "analyze",
                "--input",
                input.to_str().unwrap(),
                "--replications",
                "4000",
                "--seed",
                "3",
                "--format",
                format,
                "--output",
                path.to_str().unwrap(),
            ],
            &[("SOURCE_DATE_EPOCH", "1500000000")],
            None,
        );
        assert!(out.status.success());
    }
    let from_json = read_report_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let from_csv = read_report_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(from_json, from_csv);
}

#[test]
fn analyze_default_output_lands_in_cwd() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    std::fs::write(&input, TOY_SEASONS).unwrap();
    let out = permbias(
        &[
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--replications",
            "2000",
            "--seed",
            "1",
        ],
        &[],
        Some(dir.path()),
    );
    assert!(out.status.success());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn analyze_exit_codes_for_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();

    let missing = permbias(
        &["analyze", "--input", "/no/such/file.csv", "--seed", "1"],
        &[],
        None,
    );
    assert_eq!(
        missing.status.code(),
        Some(3),
        "missing file is an I/O error"
    );
    assert!(stderr_of(&missing).contains("IoFailure"));

    let malformed_path = dir.path().join("bad.csv");
    std::fs::write(
        &malformed_path,
        "league,season,team,preference,final_rank\nL,S,a,1.0\n",
    )
    .unwrap();
    let malformed = permbias(
        &[
            "analyze",
            "--input",
            malformed_path.to_str().unwrap(),
            "--seed",
            "1",
        ],
        &[],
        None,
    );
    assert_eq!(malformed.status.code(), Some(2));
    assert!(stderr_of(&malformed).contains("MalformedRow"));

    let input = dir.path().join("toy.csv");
    std::fs::write(&input, TOY_SEASONS).unwrap();
    let zero_reps = permbias(
        &[
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--replications",
            "0",
            "--seed",
            "1",
        ],
        &[],
        None,
    );
    assert_eq!(zero_reps.status.code(), Some(2));

    let unwritable = permbias(
        &[
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--replications",
            "1000",
            "--seed",
            "1",
            "--output",
            "/no/such/dir/report.json",
        ],
        &[],
        None,
    );
    assert_eq!(unwritable.status.code(), Some(3));
}

#[test]
fn analyze_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    std::fs::write(&input, TOY_SEASONS).unwrap();
    let mut bytes = Vec::new();
    for threads in ["1", "2"] {
        let path = dir.path().join(format!("report_{threads}.json"));
        let out = permbias(
            &[
                "analyze",
                "--input",
                input.to_str().unwrap(),
                "--replications",
                "20000",
                "--seed",
                "31",
                "--threads",
                threads,
                "--output",
                path.to_str().unwrap(),
            ],
            &[("SOURCE_DATE_EPOCH", "1234567890")],
            None,
        );
        assert!(out.status.success());
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn pvalue_can_take_a_season_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.csv");
    std::fs::write(&input, TOY_SEASONS).unwrap();
    let out = permbias(
        &[
            "pvalue",
            "--input",
            input.to_str().unwrap(),
            "--season",
            "2002-03",
            "--replications",
            "5000",
            "--seed",
            "2",
        ],
        &[],
        None,
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("decision at alpha 0.05: reject"));

    let ambiguous = permbias(
        &[
            "pvalue",
            "--input",
            input.to_str().unwrap(),
            "--replications",
            "1000",
            "--seed",
            "2",
        ],
        &[],
        None,
    );
    assert_eq!(ambiguous.status.code(), Some(2));
    assert!(stderr_of(&ambiguous).contains("narrow the selection"));
}

#[test]
fn calibrate_fits_and_writes_preferences() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("elo.csv");
    let mut csv = String::from("team,elo,win_probability\n");
    for i in 0..12 {
        let elo = 1480.0 + 35.0 * f64::from(i);
        csv.push_str(&format!("T{i},{elo},{}\n", (0.008 * elo - 18.0).exp()));
    }
    std::fs::write(&input, csv).unwrap();
    let prefs = dir.path().join("prefs.csv");
    let out = permbias(
        &[
            "calibrate",
            "--input",
            input.to_str().unwrap(),
            "--output",
            prefs.to_str().unwrap(),
        ],
        &[],
        None,
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("ols: slope="));
    assert!(text.contains("huber: slope="));
    let written = std::fs::read_to_string(&prefs).unwrap();
    assert!(written.starts_with("team,preference\n"));
    assert_eq!(written.lines().count(), 13);

    let too_few = dir.path().join("tiny.csv");
    std::fs::write(
        &too_few,
        "team,elo,win_probability\nA,1500,0.2\nB,1600,0.3\n",
    )
    .unwrap();
    let failed = permbias(
        &["calibrate", "--input", too_few.to_str().unwrap()],
        &[],
        None,
    );
    assert_eq!(failed.status.code(), Some(2));
    assert!(stderr_of(&failed).contains("TooFewPoints"));
}
