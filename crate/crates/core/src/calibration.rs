//! Elo-to-preference calibration.
//!
//! A team's expected season-win probability is log-linear in its Elo rating,
//! so `ln(win_probability)` is regressed on Elo. Two fits are provided:
//! ordinary least squares and a robust Huber M-estimator solved by
//! iteratively reweighted least squares, which damps the influence of
//! outlying bookmaker odds. Only the slope matters downstream: preferences
//! are scale-free, so [`elo_to_preferences`] drops the intercept and centers
//! ratings before exponentiating to keep the weights in a sane numeric range.

use crate::model::{ModelError, PreferenceVector};
use thiserror::Error;

/// Huber tuning constant giving 95% efficiency at the Gaussian model.
pub const HUBER_TUNING: f64 = 1.345;
/// Consistency factor making the MAD estimate the Gaussian sigma.
const MAD_TO_SIGMA: f64 = 1.4826;

/// Errors from regression fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("TooFewPoints: need at least 3 observations, got {n}")]
    TooFewPoints { n: usize },
    #[error("DegenerateDesign: Elo ratings are all (numerically) equal")]
    DegenerateDesign,
    #[error("InvalidObservation: team {team:?} has win_probability {p} outside (0, 1) or non-finite elo")]
    InvalidObservation { team: String, p: f64 },
    #[error("NonFiniteSlope: fit slope is {slope}")]
    NonFiniteSlope { slope: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One team's rating and bookmaker-implied season-win probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EloObservation {
    pub team: String,
    pub elo: f64,
    /// Must lie strictly inside `(0, 1)`.
    pub win_probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Ols,
    Huber,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitMethod::Ols => write!(f, "ols"),
            FitMethod::Huber => write!(f, "huber"),
        }
    }
}

/// Fitted line `ln(win_probability) = slope * elo + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    /// Nats per Elo point.
    pub slope: f64,
    /// Nats.
    pub intercept: f64,
    pub method: FitMethod,
    /// Reweight-solve cycles performed (1 for OLS).
    pub iterations: u32,
    pub converged: bool,
    /// Final IRLS weights, one per observation, each in `(0, 1]`; all exactly
    /// 1 for OLS.
    pub robust_weights: Vec<f64>,
    /// Plain (unweighted) coefficient of determination of the returned line.
    pub r_squared: f64,
}

/// IRLS settings for [`fit_huber_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberConfig {
    /// Residuals beyond `tuning * scale` get down-weighted.
    pub tuning: f64,
    pub max_iterations: u32,
    /// Stop when the largest relative coefficient change falls below this.
    pub tol: f64,
}

impl Default for HuberConfig {
    fn default() -> Self {
        Self {
            tuning: HUBER_TUNING,
            max_iterations: 100,
            tol: 1e-10,
        }
    }
}

fn design(data: &[EloObservation]) -> Result<(Vec<f64>, Vec<f64>), FitError> {
    if data.len() < 3 {
        return Err(FitError::TooFewPoints { n: data.len() });
    }
    for obs in data {
        let p = obs.win_probability;
        if !(p > 0.0 && p < 1.0) || !obs.elo.is_finite() {
            return Err(FitError::InvalidObservation {
                team: obs.team.clone(),
                p,
            });
        }
    }
    let x: Vec<f64> = data.iter().map(|o| o.elo).collect();
    let y: Vec<f64> = data.iter().map(|o| o.win_probability.ln()).collect();
    Ok((x, y))
}

/// Weighted least squares through centered sums. `None` when the design has
/// no usable spread in `x`.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    let xbar = x.iter().zip(w).map(|(xi, wi)| wi * xi).sum::<f64>() / sw;
    let ybar = y.iter().zip(w).map(|(yi, wi)| wi * yi).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let dx = xi - xbar;
        sxx += wi * dx * dx;
        sxy += wi * dx * (yi - ybar);
    }
    let floor = sw * (1e-9 * (1.0 + xbar.abs())).powi(2);
    if !sxx.is_finite() || sxx <= floor {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, ybar - slope * xbar))
}

fn r_squared(x: &[f64], y: &[f64], slope: f64, intercept: f64) -> f64 {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|yi| (yi - ybar).powi(2)).sum();
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - (slope * xi + intercept)).powi(2))
        .sum();
    if sst > 0.0 {
        1.0 - ssr / sst
    } else {
        1.0
    }
}

/// Ordinary least-squares fit of `ln(win_probability)` on Elo.
pub fn fit_ols(data: &[EloObservation]) -> Result<LinearFit, FitError> {
    let (x, y) = design(data)?;
    let w = vec![1.0; x.len()];
    let (slope, intercept) = weighted_line(&x, &y, &w).ok_or(FitError::DegenerateDesign)?;
    Ok(LinearFit {
        slope,
        intercept,
        method: FitMethod::Ols,
        iterations: 1,
        converged: true,
        robust_weights: w,
        r_squared: r_squared(&x, &y, slope, intercept),
    })
}

/// Robust fit with the standard Huber defaults.
pub fn fit_huber(data: &[EloObservation]) -> Result<LinearFit, FitError> {
    fit_huber_with(data, &HuberConfig::default())
}

/// Huber M-estimator via iteratively reweighted least squares.
///
/// Each cycle re-estimates the residual scale as `1.4826 * median(|r|)` and
/// assigns weight 1 to residuals within `tuning * scale`, `tuning * scale /
/// |r|` beyond it. A failure to converge is flagged, not fatal: the last
/// iterate is returned with `converged = false`.
pub fn fit_huber_with(data: &[EloObservation], cfg: &HuberConfig) -> Result<LinearFit, FitError> {
    let (x, y) = design(data)?;
    let n = x.len();
    let mut w = vec![1.0; n];
    let (mut slope, mut intercept) = weighted_line(&x, &y, &w).ok_or(FitError::DegenerateDesign)?;
    let mut iterations = 0u32;
    let mut converged = false;
    let mut residuals = vec![0.0; n];
    while iterations < cfg.max_iterations {
        iterations += 1;
        for i in 0..n {
            residuals[i] = y[i] - (slope * x[i] + intercept);
        }
        let scale = MAD_TO_SIGMA * median_abs(&residuals);
        if scale == 0.0 {
            // Exact fit (for at least half the points): nothing to reweight.
            converged = true;
            break;
        }
        let threshold = cfg.tuning * scale;
        for i in 0..n {
            let r = residuals[i].abs();
            w[i] = if r <= threshold { 1.0 } else { threshold / r };
        }
        let (new_slope, new_intercept) =
            weighted_line(&x, &y, &w).ok_or(FitError::DegenerateDesign)?;
        let delta = rel_change(new_slope, slope).max(rel_change(new_intercept, intercept));
        slope = new_slope;
        intercept = new_intercept;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(LinearFit {
        slope,
        intercept,
        method: FitMethod::Huber,
        iterations,
        converged,
        robust_weights: w,
        r_squared: r_squared(&x, &y, slope, intercept),
    })
}

fn rel_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(1.0)
}

fn median_abs(values: &[f64]) -> f64 {
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("residuals are finite"));
    let n = abs.len();
    if n % 2 == 1 {
        abs[n / 2]
    } else {
        0.5 * (abs[n / 2 - 1] + abs[n / 2])
    }
}

/// Converts Elo ratings to a preference vector: `w_i = exp(slope * (elo_i -
/// mean elo))`.
///
/// The fitted intercept is deliberately dropped and ratings are centered
/// first; both are pure rescalings of the weight vector, which leave every
/// derived probability unchanged while keeping the exponentials well inside
/// f64 range for realistic ratings.
pub fn elo_to_preferences(
    fit: &LinearFit,
    elos: &[(String, f64)],
) -> Result<PreferenceVector, FitError> {
    if !fit.slope.is_finite() {
        return Err(FitError::NonFiniteSlope { slope: fit.slope });
    }
    let mean = elos.iter().map(|(_, e)| e).sum::<f64>() / elos.len() as f64;
    let labels: Vec<String> = elos.iter().map(|(t, _)| t.clone()).collect();
    let weights: Vec<f64> = elos
        .iter()
        .map(|(_, e)| (fit.slope * (e - mean)).exp())
        .collect();
    Ok(PreferenceVector::new(labels, weights)?)
}
