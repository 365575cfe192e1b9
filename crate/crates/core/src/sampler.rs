//! Random permutation generation via exponential order statistics.
//!
//! For weights `q` draw independent keys `Y_i = ln(-ln U_i) - ln(q_i)` with
//! `U_i` uniform on `(0,1)` (equivalently `Y_i = ln X_i` with
//! `X_i ~ Exp(q_i)`), then sort the keys ascending. The index order of the
//! sorted keys is a random permutation with exactly the biased-permutation
//! law of [`crate::model`]: one vectorizable draw-and-sort replaces `n`
//! sequential roulette selections.
//!
//! Reproducibility: every draw runs on its own counter-indexed RNG stream
//! ([`RngStream`]), so a batch is a pure function of
//! `(q, m_count, master_seed)` no matter how the work is scheduled or how
//! many threads consume it.

use crate::model::{reduced_log_likelihood_of_order, ModelError, Permutation, PreferenceVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors from batch sampling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("EmptyBatch: m_count must be at least 1")]
    EmptyBatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A reproducible, independently-seeded random stream.
///
/// Streams with equal `(master_seed, stream_index)` produce identical output;
/// distinct stream indices give statistically independent sequences (ChaCha
/// stream counters). Replication `m` of a Monte Carlo run uses
/// `stream_index = m`, so scheduling cannot change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Amortizes the seed expansion when many streams share one master seed.
#[derive(Clone)]
pub(crate) struct StreamFactory {
    template: ChaCha8Rng,
}

impl StreamFactory {
    pub(crate) fn new(master_seed: u64) -> Self {
        Self {
            template: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    pub(crate) fn rng_for(&self, stream_index: u64) -> ChaCha8Rng {
        let mut rng = self.template.clone();
        rng.set_stream(stream_index);
        rng
    }
}

/// Maps a raw 64-bit word to a uniform double strictly inside `(0, 1)`.
///
/// The midpoint construction `(x >> 11 + 1/2) * 2^-53` can produce neither
/// endpoint, which keeps `ln(-ln u)` finite for every drawn key; this is the
/// clamping policy for the key transform's singularities at 0 and 1.
#[inline]
pub(crate) fn uniform_open01(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Reusable per-draw buffers so batch loops do not allocate per replication.
pub(crate) struct DrawScratch {
    pub(crate) keys: Vec<f64>,
    pub(crate) order: Vec<usize>,
}

impl DrawScratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            keys: vec![0.0; n],
            order: (0..n).collect(),
        }
    }
}

/// Draws keys for every object and sorts `scratch.order` by ascending key,
/// breaking exact ties by object index.
pub(crate) fn draw_order_into(log_q: &[f64], rng: &mut ChaCha8Rng, scratch: &mut DrawScratch) {
    for (i, lq) in log_q.iter().enumerate() {
        let u = uniform_open01(rng.next_u64());
        scratch.keys[i] = (-u.ln()).ln() - lq;
    }
    let keys = &scratch.keys;
    for (i, slot) in scratch.order.iter_mut().enumerate() {
        *slot = i;
    }
    scratch.order.sort_unstable_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .expect("keys are finite")
            .then(a.cmp(&b))
    });
}

/// One draw of keys together with the permutation that sorts them.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedDraw {
    /// `keys[i]` is the key of object `i` (nats).
    pub keys: Vec<f64>,
    /// Object indices in ascending key order.
    pub perm: Permutation,
}

/// Draws one set of keys `Y_i = ln(-ln U_i) - ln(q_i)` and the permutation
/// sorting them ascending. All keys are finite by construction.
pub fn draw_keys(q: &PreferenceVector, stream: &RngStream) -> KeyedDraw {
    let log_q: Vec<f64> = q.weights().iter().map(|w| w.ln()).collect();
    let mut scratch = DrawScratch::new(q.len());
    let mut rng = stream.rng();
    draw_order_into(&log_q, &mut rng, &mut scratch);
    debug_assert!(scratch.keys.iter().all(|k| k.is_finite()));
    KeyedDraw {
        keys: scratch.keys,
        perm: Permutation::from_order_unchecked(scratch.order),
    }
}

/// Samples a single permutation distributed per the biased-permutation law.
pub fn sample_permutation(q: &PreferenceVector, stream: &RngStream) -> Permutation {
    draw_keys(q, stream).perm
}

/// Lazily yields `m_count` i.i.d. draws as `(permutation, reduced ell)`.
///
/// Draw `m` uses stream index `m`, so the output sequence is a pure function
/// of `(q, m_count, master_seed)`.
pub fn sample_batch(
    q: &PreferenceVector,
    m_count: u64,
    master_seed: u64,
) -> Result<SampleBatch<'_>, SampleError> {
    if m_count == 0 {
        return Err(SampleError::EmptyBatch);
    }
    Ok(SampleBatch {
        weights: q.weights(),
        log_q: q.weights().iter().map(|w| w.ln()).collect(),
        factory: StreamFactory::new(master_seed),
        scratch: DrawScratch::new(q.len()),
        next_index: 0,
        m_count,
    })
}

/// Iterator returned by [`sample_batch`].
pub struct SampleBatch<'a> {
    weights: &'a [f64],
    log_q: Vec<f64>,
    factory: StreamFactory,
    scratch: DrawScratch,
    next_index: u64,
    m_count: u64,
}

impl Iterator for SampleBatch<'_> {
    type Item = (Permutation, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_index >= self.m_count {
            return None;
        }
        let mut rng = self.factory.rng_for(self.next_index);
        draw_order_into(&self.log_q, &mut rng, &mut self.scratch);
        let ell = reduced_log_likelihood_of_order(self.weights, &self.scratch.order);
        self.next_index += 1;
        Some((
            Permutation::from_order_unchecked(self.scratch.order.clone()),
            ell,
        ))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.m_count - self.next_index) as usize;
        (left, Some(left))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrtest::for_each_permutation;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    fn pv(weights: &[f64]) -> PreferenceVector {
        PreferenceVector::from_weights(weights.to_vec()).unwrap()
    }

    /// Test-only cross-check oracle: sequential roulette-wheel sampling
    /// without replacement, the literal description of the model.
    fn roulette_sample(weights: &[f64], rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut remaining: Vec<usize> = (0..weights.len()).collect();
        let mut order = Vec::with_capacity(weights.len());
        while !remaining.is_empty() {
            let total: f64 = remaining.iter().map(|&i| weights[i]).sum();
            let mut target = uniform_open01(rng.next_u64()) * total;
            let mut chosen = remaining.len() - 1;
            for (slot, &i) in remaining.iter().enumerate() {
                target -= weights[i];
                if target <= 0.0 {
                    chosen = slot;
                    break;
                }
            }
            order.push(remaining.remove(chosen));
        }
        order
    }

    fn chi_square_statistic(
        counts: &HashMap<Vec<usize>, u64>,
        probs: &HashMap<Vec<usize>, f64>,
        total: u64,
    ) -> f64 {
        probs
            .iter()
            .map(|(order, p)| {
                let expected = p * total as f64;
                let observed = counts.get(order).copied().unwrap_or(0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum()
    }

    fn enumerated_probs(q: &PreferenceVector) -> HashMap<Vec<usize>, f64> {
        let mut probs = HashMap::new();
        for_each_permutation(q.len(), |order| {
            let p = Permutation::new(order.to_vec()).unwrap();
            probs.insert(order.to_vec(), q.likelihood(&p).unwrap());
        });
        probs
    }

    #[test]
    fn batch_is_deterministic_and_matches_single_draws() {
        let q = pv(&[3.0, 1.0, 2.0, 5.5]);
        let a: Vec<_> = sample_batch(&q, 200, 42).unwrap().collect();
        let b: Vec<_> = sample_batch(&q, 200, 42).unwrap().collect();
        assert_eq!(a, b);
        for (m, (perm, ell)) in a.iter().enumerate() {
            let single = sample_permutation(&q, &RngStream::new(42, m as u64));
            assert_eq!(perm, &single);
            assert_eq!(*ell, q.log_likelihood(perm).unwrap());
        }
    }

    #[test]
    fn empty_batch_is_rejected() {
        let q = pv(&[1.0, 2.0]);
        assert_eq!(sample_batch(&q, 0, 7).err(), Some(SampleError::EmptyBatch));
    }

    #[test]
    fn different_streams_differ() {
        let q = pv(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let base = sample_permutation(&q, &RngStream::new(9, 0));
        let distinct = (1..20u64)
            .map(|i| sample_permutation(&q, &RngStream::new(9, i)))
            .filter(|p| p != &base)
            .count();
        assert!(distinct > 0);
    }

    #[test]
    fn keys_sorted_by_perm_and_formula_shape() {
        let q = pv(&[2.0, 1.0, 0.5, 8.0]);
        let draw = draw_keys(&q, &RngStream::new(123, 45));
        let keys = &draw.keys;
        let order = draw.perm.order();
        for w in order.windows(2) {
            assert!(keys[w[0]] <= keys[w[1]]);
        }
        assert!(keys.iter().all(|k| k.is_finite()));
    }

    #[test]
    fn symmetric_two_weight_marginal() {
        // q=(1,1): each of the two orders has probability 1/2.
        let q = pv(&[1.0, 1.0]);
        let m = 100_000u64;
        let first = sample_batch(&q, m, 11)
            .unwrap()
            .filter(|(p, _)| p.order() == [0, 1])
            .count() as f64;
        let phat = first / m as f64;
        let sigma = (0.25 / m as f64).sqrt();
        assert!((phat - 0.5).abs() < 4.0 * sigma, "phat={phat}");
    }

    #[test]
    fn first_rank_marginal_is_weight_share() {
        // q=(9,1): rank 1 is object 0 with probability 0.9.
        let q = pv(&[9.0, 1.0]);
        let m = 100_000u64;
        let hits = sample_batch(&q, m, 5)
            .unwrap()
            .filter(|(p, _)| p.order()[0] == 0)
            .count() as f64;
        let phat = hits / m as f64;
        let sigma = (0.9 * 0.1 / m as f64).sqrt();
        assert!((phat - 0.9).abs() < 4.0 * sigma, "phat={phat}");
    }

    #[test]
    fn chi_square_agreement_with_model_law() {
        // Empirical distribution over S_3 matches the enumerated law.
        let q = pv(&[1.0, 2.0, 3.0]);
        let m = 200_000u64;
        let probs = enumerated_probs(&q);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for (perm, _) in sample_batch(&q, m, 2024).unwrap() {
            *counts.entry(perm.order().to_vec()).or_insert(0) += 1;
        }
        let stat = chi_square_statistic(&counts, &probs, m);
        let critical = ChiSquared::new(5.0).unwrap().inverse_cdf(0.999);
        assert!(stat < critical, "stat={stat} critical={critical}");
    }

    #[test]
    fn roulette_oracle_agrees_with_model_law() {
        // The sequential roulette construction and the key sampler target the
        // same distribution; check the oracle against the enumerated law too.
        let q = pv(&[5.0, 3.0, 1.0, 1.0]);
        let m = 200_000u64;
        let probs = enumerated_probs(&q);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..m {
            *counts
                .entry(roulette_sample(q.weights(), &mut rng))
                .or_insert(0) += 1;
        }
        let stat = chi_square_statistic(&counts, &probs, m);
        let critical = ChiSquared::new(23.0).unwrap().inverse_cdf(0.999);
        assert!(stat < critical, "stat={stat} critical={critical}");

        let mut key_counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for (perm, _) in sample_batch(&q, m, 78).unwrap() {
            *key_counts.entry(perm.order().to_vec()).or_insert(0) += 1;
        }
        let key_stat = chi_square_statistic(&key_counts, &probs, m);
        assert!(key_stat < critical, "stat={key_stat} critical={critical}");
    }

    #[test]
    fn mean_likelihood_matches_sum_of_squares() {
        // E[L(Pi)] over draws equals sum over permutations of L^2.
        let q = pv(&[5.0, 3.0, 1.0, 1.0]);
        let target: f64 = enumerated_probs(&q).values().map(|p| p * p).sum();
        let m = 200_000u64;
        let shift = q.sum_log_weights();
        let values: Vec<f64> = sample_batch(&q, m, 99)
            .unwrap()
            .map(|(_, ell)| (ell + shift).exp())
            .collect();
        let mean = values.iter().sum::<f64>() / m as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let tol = 4.0 * (var / m as f64).sqrt();
        assert!(
            (mean - target).abs() < tol,
            "mean={mean} target={target} tol={tol}"
        );
    }

    proptest! {
        #[test]
        fn keys_are_finite_and_perm_valid(
            weights in proptest::collection::vec(1e-3f64..1e6, 2..12),
            seed in any::<u64>(),
            stream in any::<u64>(),
        ) {
            let q = pv(&weights);
            let draw = draw_keys(&q, &RngStream::new(seed, stream));
            prop_assert!(draw.keys.iter().all(|k| k.is_finite()));
            prop_assert!(Permutation::new(draw.perm.order().to_vec()).is_ok());
            let mut sorted = draw.perm.order().windows(2)
                .map(|w| draw.keys[w[0]] <= draw.keys[w[1]]);
            prop_assert!(sorted.all(|ok| ok));
        }
    }
}
