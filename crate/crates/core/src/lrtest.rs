//! Likelihood-ratio test for biased permutations.
//!
//! Under `H0: q = q0` the likelihood-ratio statistic reduces to the model
//! likelihood `L(q0 | p)` itself, because the supremum over the alternative
//! is the same constant for every permutation. The p-value of an observed
//! ranking is the total probability of all permutations *strictly less*
//! likely than it:
//!
//! * [`exact_pvalue`] enumerates all `n!` permutations (guarded to small `n`),
//! * [`mc_pvalue`] estimates the same sum as the fraction of Monte Carlo
//!   draws whose reduced log-likelihood falls strictly below the observed
//!   one, fanned out over counter-indexed RNG streams so the result is
//!   bitwise reproducible regardless of thread count.
//!
//! Draws exactly tying the observed statistic count toward neither side;
//! they are reported in `tie_count` so callers can build mid-p variants if
//! they want them.

use crate::model::{reduced_log_likelihood_of_order, ModelError, Permutation, PreferenceVector};
use crate::sampler::{draw_order_into, DrawScratch, StreamFactory};
use rayon::prelude::*;
use thiserror::Error;

/// Default Monte Carlo replication count; keeps the binomial standard error
/// at or under 5e-4.
pub const DEFAULT_REPLICATIONS: u64 = 1_000_000;
/// Default enumeration guard for the exact path.
pub const DEFAULT_EXACT_MAX_N: usize = 10;
/// Hard factorial guard; 12! is the largest enumeration we will ever run.
pub const EXACT_MAX_N_LIMIT: usize = 12;
/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Log-domain half-width treated as an exact tie by the enumeration path:
/// likelihoods within 1e-12 relative distance are analytically equal values
/// that were accumulated along different summation orders.
const EXACT_TIE_BAND: f64 = 1e-12;

/// Errors from the test operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestError {
    #[error("TooLargeForExact: n={n} exceeds the enumeration guard {max}")]
    TooLargeForExact { n: usize, max: usize },
    #[error("NonPositiveP: surprisal requires p > 0, got {p}")]
    NonPositiveP { p: f64 },
    #[error("InvalidConfig: {detail}")]
    InvalidConfig { detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Knobs for the Monte Carlo and exact p-value computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    /// Monte Carlo replication count `M`.
    pub replications: u64,
    /// Master seed; replication `m` runs on stream `m`.
    pub master_seed: u64,
    /// Largest `n` the exact path will enumerate.
    pub exact_max_n: usize,
    /// Significance level used for decisions.
    pub alpha: f64,
}

impl TestConfig {
    pub fn new(master_seed: u64) -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            master_seed,
            exact_max_n: DEFAULT_EXACT_MAX_N,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn validate(&self) -> Result<(), TestError> {
        if self.replications == 0 {
            return Err(TestError::InvalidConfig {
                detail: "replications must be at least 1".into(),
            });
        }
        if self.exact_max_n > EXACT_MAX_N_LIMIT {
            return Err(TestError::InvalidConfig {
                detail: format!(
                    "exact_max_n {} exceeds the factorial guard {EXACT_MAX_N_LIMIT}",
                    self.exact_max_n
                ),
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(TestError::InvalidConfig {
                detail: format!("alpha must lie in (0, 1), got {}", self.alpha),
            });
        }
        Ok(())
    }
}

impl Default for TestConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Exact => write!(f, "exact"),
            Method::MonteCarlo => write!(f, "monte-carlo"),
        }
    }
}

/// Outcome of [`decide`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Reject,
    NoReject,
}

/// Result of a likelihood-ratio test run.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// Reduced log-likelihood of the observed permutation (nats).
    pub observed_ell: f64,
    /// Exact or estimated p-value in `[0, 1]`.
    pub p_value: f64,
    pub method: Method,
    /// Monte Carlo replications consumed (0 for the exact path).
    pub replications_used: u64,
    /// Draws (or enumerated permutations, observed included) whose statistic
    /// exactly ties the observed one.
    pub tie_count: u64,
    /// Binomial standard error; `None` for the exact path.
    pub std_error: Option<f64>,
    /// 95% confidence interval, rule-of-three at the boundaries; collapses
    /// to `(p, p)` for the exact path.
    pub ci95: (f64, f64),
    /// Self-information `-ln p` in nats. When the Monte Carlo estimate is
    /// zero this holds the censored lower bound `ln(M/3)` and
    /// `surprisal_censored` is set.
    pub surprisal: f64,
    pub surprisal_censored: bool,
}

impl TestResult {
    pub fn decision(&self, alpha: f64) -> Decision {
        decide(self, alpha)
    }
}

/// Rejects `H0` iff `p < alpha` (strict; a p-value equal to alpha retains).
pub fn decide(result: &TestResult, alpha: f64) -> Decision {
    if result.p_value < alpha {
        Decision::Reject
    } else {
        Decision::NoReject
    }
}

/// Self-information `-ln p` in nats; defined only for `p > 0`.
pub fn surprisal(p_value: f64) -> Result<f64, TestError> {
    if p_value.is_nan() || p_value <= 0.0 {
        return Err(TestError::NonPositiveP { p: p_value });
    }
    Ok(-p_value.ln())
}

/// Visits every permutation of `0..n` exactly once (Heap's algorithm).
///
/// The slice handed to `visit` is reused between calls; copy it if needed.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut items: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(&items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Exact p-value by full enumeration, with the default size guard.
pub fn exact_pvalue(q: &PreferenceVector, observed: &Permutation) -> Result<TestResult, TestError> {
    exact_pvalue_with_max_n(q, observed, DEFAULT_EXACT_MAX_N)
}

/// Exact p-value by full enumeration of all `n!` permutations.
///
/// Sums the likelihood of every permutation strictly less likely than the
/// observed one; likelihoods within a 1e-12 relative band of the observed
/// likelihood are treated as ties and excluded. Single-threaded by design:
/// the guard keeps the enumeration small and the summation order fixed.
pub fn exact_pvalue_with_max_n(
    q: &PreferenceVector,
    observed: &Permutation,
    exact_max_n: usize,
) -> Result<TestResult, TestError> {
    if exact_max_n > EXACT_MAX_N_LIMIT {
        return Err(TestError::InvalidConfig {
            detail: format!(
                "exact_max_n {exact_max_n} exceeds the factorial guard {EXACT_MAX_N_LIMIT}"
            ),
        });
    }
    let n = q.len();
    if n > exact_max_n {
        return Err(TestError::TooLargeForExact {
            n,
            max: exact_max_n,
        });
    }
    let observed_ell = q.log_likelihood(observed)?;
    let weights = q.weights();
    let shift = q.sum_log_weights();
    let mut below_mass = 0.0_f64;
    let mut tie_count = 0u64;
    for_each_permutation(n, |order| {
        let ell = reduced_log_likelihood_of_order(weights, order);
        if (ell - observed_ell).abs() <= EXACT_TIE_BAND {
            tie_count += 1;
        } else if ell < observed_ell {
            below_mass += (ell + shift).exp();
        }
    });
    let p_value = below_mass.clamp(0.0, 1.0);
    let (surprisal, censored) = if p_value > 0.0 {
        (-p_value.ln(), false)
    } else {
        (f64::INFINITY, false)
    };
    Ok(TestResult {
        observed_ell,
        p_value,
        method: Method::Exact,
        replications_used: 0,
        tie_count,
        std_error: None,
        ci95: (p_value, p_value),
        surprisal,
        surprisal_censored: censored,
    })
}

/// Raw Monte Carlo tallies: draws with reduced ell strictly below, exactly
/// equal to, and strictly above the observed value.
fn mc_tally(
    q: &PreferenceVector,
    observed_ell: f64,
    replications: u64,
    master_seed: u64,
) -> (u64, u64, u64) {
    let weights = q.weights();
    let log_q: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let factory = StreamFactory::new(master_seed);
    let n = weights.len();
    let (less, equal, greater) = (0..replications)
        .into_par_iter()
        .fold(
            || (DrawScratch::new(n), 0u64, 0u64, 0u64),
            |(mut scratch, mut less, mut equal, mut greater), m| {
                let mut rng = factory.rng_for(m);
                draw_order_into(&log_q, &mut rng, &mut scratch);
                let ell = reduced_log_likelihood_of_order(weights, &scratch.order);
                if ell < observed_ell {
                    less += 1;
                } else if ell == observed_ell {
                    equal += 1;
                } else {
                    greater += 1;
                }
                (scratch, less, equal, greater)
            },
        )
        .map(|(_, l, e, g)| (l, e, g))
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    // Keys are finite, so every draw lands in exactly one bucket.
    assert_eq!(less + equal + greater, replications);
    (less, equal, greater)
}

/// Monte Carlo p-value: the fraction of `M` simulated rankings whose reduced
/// log-likelihood is strictly below the observed one.
///
/// Deterministic for fixed `(q, observed, replications, master_seed)` and
/// independent of how many rayon workers execute it: replication `m` always
/// runs on RNG stream `m` and the per-worker tallies are summed.
pub fn mc_pvalue(
    q: &PreferenceVector,
    observed: &Permutation,
    cfg: &TestConfig,
) -> Result<TestResult, TestError> {
    cfg.validate()?;
    let observed_ell = q.log_likelihood(observed)?;
    let (less, equal, _greater) = mc_tally(q, observed_ell, cfg.replications, cfg.master_seed);
    let m = cfg.replications as f64;
    let p_value = less as f64 / m;
    let std_error = (p_value * (1.0 - p_value) / m).sqrt();
    let rule_of_three = (3.0 / m).min(1.0);
    let ci95 = if less == 0 {
        (0.0, rule_of_three)
    } else if less == cfg.replications {
        (1.0 - rule_of_three, 1.0)
    } else {
        let half = 1.959_963_984_540_054 * std_error;
        ((p_value - half).max(0.0), (p_value + half).min(1.0))
    };
    let (surprisal, surprisal_censored) = if less == 0 {
        ((m / 3.0).ln(), true)
    } else {
        (-p_value.ln(), false)
    };
    Ok(TestResult {
        observed_ell,
        p_value,
        method: Method::MonteCarlo,
        replications_used: cfg.replications,
        tie_count: equal,
        std_error: Some(std_error),
        ci95,
        surprisal,
        surprisal_censored,
    })
}
