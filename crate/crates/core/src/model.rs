//! Biased-permutation probability model.
//!
//! A ranking of `n` objects with positive preference weights `q` is modelled
//! as sequential sampling without replacement: at each step one of the
//! remaining objects is picked with probability proportional to its weight.
//! The resulting permutation `p` (rank 1 drawn first) has likelihood
//!
//! ```text
//! L(q | p) = prod_i  q[p_i] / (q[p_i] + q[p_{i+1}] + ... + q[p_n])
//! ```
//!
//! Only ratios of weights matter: multiplying every weight by a positive
//! constant leaves `L` unchanged. The comparison statistic used throughout
//! the crate is the *reduced* log-likelihood
//!
//! ```text
//! ell(q | p) = -sum_i ln( q[p_i] + ... + q[p_n] ) = ln L - sum_i ln q_i ,
//! ```
//!
//! which drops the permutation-independent term `sum_i ln q_i` and is
//! computed with a single reverse-order cumulative sum.

use thiserror::Error;

/// Errors from constructing or evaluating the model types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(
        "NonPositiveWeight: weight at index {index} is {value} (weights must be finite and > 0)"
    )]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("DuplicateLabel: label {label:?} appears more than once")]
    DuplicateLabel { label: String },
    #[error("TooFewObjects: got {n} objects, need at least 2")]
    TooFewObjects { n: usize },
    #[error(
        "DimensionMismatch: preference vector has {expected} objects but permutation has {got}"
    )]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NotAPermutation: {detail}")]
    NotAPermutation { detail: String },
}

/// Strictly positive preference weights over `n` labelled objects.
///
/// Invariants (enforced at construction): `n >= 2`, every weight finite and
/// `> 0`, labels pairwise distinct. Semantics are scale-free; see
/// [`PreferenceVector::scaled`].
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceVector {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl PreferenceVector {
    /// Validates the invariants and builds the vector.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self, ModelError> {
        if labels.len() != weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: labels.len(),
                got: weights.len(),
            });
        }
        if weights.len() < 2 {
            return Err(ModelError::TooFewObjects { n: weights.len() });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::NonPositiveWeight { index, value });
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(ModelError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(Self { labels, weights })
    }

    /// Builds a vector with auto-generated labels `"1"`, `"2"`, ...
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, ModelError> {
        let labels = (1..=weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sum of the natural logs of the weights: the permutation-independent
    /// part of the full log-likelihood.
    pub fn sum_log_weights(&self) -> f64 {
        self.weights.iter().map(|w| w.ln()).sum()
    }

    /// Same preferences multiplied by `c > 0`. All likelihoods are unchanged;
    /// reduced log-likelihoods shift uniformly by `-n ln c`.
    pub fn scaled(&self, c: f64) -> Result<Self, ModelError> {
        Self::new(
            self.labels.clone(),
            self.weights.iter().map(|w| w * c).collect(),
        )
    }

    /// Reduced log-likelihood `ell` of observing `p` (nats).
    ///
    /// The full log of the model likelihood equals
    /// `ell + self.sum_log_weights()`.
    pub fn log_likelihood(&self, p: &Permutation) -> Result<f64, ModelError> {
        if p.len() != self.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.len(),
                got: p.len(),
            });
        }
        Ok(reduced_log_likelihood_of_order(&self.weights, p.order()))
    }

    /// Full log-likelihood `ln L(q | p)` (nats).
    pub fn full_log_likelihood(&self, p: &Permutation) -> Result<f64, ModelError> {
        Ok(self.log_likelihood(p)? + self.sum_log_weights())
    }

    /// Likelihood `L(q | p)` in `(0, 1]`.
    pub fn likelihood(&self, p: &Permutation) -> Result<f64, ModelError> {
        Ok(self.full_log_likelihood(p)?.exp())
    }

    /// The least-likely and most-likely permutations under these preferences.
    ///
    /// Ascending weight order minimizes the likelihood, descending order
    /// maximizes it; every other permutation falls between the two. Equal
    /// weights are broken by original index, ascending, so the result is
    /// deterministic.
    pub fn extreme_permutations(&self) -> (Permutation, Permutation) {
        let mut asc: Vec<usize> = (0..self.len()).collect();
        asc.sort_by(|&a, &b| {
            self.weights[a]
                .partial_cmp(&self.weights[b])
                .expect("weights are finite")
                .then(a.cmp(&b))
        });
        let mut desc: Vec<usize> = (0..self.len()).collect();
        desc.sort_by(|&a, &b| {
            self.weights[b]
                .partial_cmp(&self.weights[a])
                .expect("weights are finite")
                .then(a.cmp(&b))
        });
        (Permutation { order: asc }, Permutation { order: desc })
    }
}

/// A bijection of ranks `1..n` onto object indices `0..n-1`.
///
/// `order[t]` is the (0-based) index of the object placed at rank `t + 1`;
/// rank 1 comes first, matching the draw order of the model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    /// Validates that `order` hits every index in `0..order.len()` exactly once.
    pub fn new(order: Vec<usize>) -> Result<Self, ModelError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n {
                return Err(ModelError::NotAPermutation {
                    detail: format!("index {i} out of range for {n} objects"),
                });
            }
            if seen[i] {
                return Err(ModelError::NotAPermutation {
                    detail: format!("index {i} appears more than once"),
                });
            }
            seen[i] = true;
        }
        Ok(Self { order })
    }

    /// The identity permutation on `n` objects.
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Self::new(order.clone()).is_ok());
        Self { order }
    }
}

/// Reduced log-likelihood of a raw index order, no validation.
///
/// Walks ranks from last to first, accumulating the suffix sum of weights.
/// This is the one summation order used everywhere in the crate, so equal
/// orders always yield bitwise-equal values.
pub(crate) fn reduced_log_likelihood_of_order(weights: &[f64], order: &[usize]) -> f64 {
    let mut suffix = 0.0_f64;
    let mut ell = 0.0_f64;
    for &i in order.iter().rev() {
        suffix += weights[i];
        ell -= suffix.ln();
    }
    ell
}
