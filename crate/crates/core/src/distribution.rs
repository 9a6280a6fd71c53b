//! Probability distributions over ordered outcomes.
//!
//! Outcomes are numbered `1..=n` in the public API. Interval masses
//! `p(i, j)` come from a prefix-sum table built by left-to-right summation,
//! so every lookup is O(1) and reproducible.

use serde::Serialize;

use crate::error::{Error, Result};

/// Normalized probabilities over `n` ordered outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    weights: Vec<f64>,
    probs: Vec<f64>,
    #[serde(skip)]
    prefix: Vec<f64>,
}

impl Distribution {
    /// Normalizes `weights`, rejecting zero entries.
    pub fn new(weights: &[f64]) -> Result<Self> {
        Self::build(weights, false)
    }

    /// Like [`Distribution::new`] but admits zero-mass outcomes.
    pub fn new_allow_zero(weights: &[f64]) -> Result<Self> {
        Self::build(weights, true)
    }

    pub fn build(weights: &[f64], allow_zero: bool) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (k, &w) in weights.iter().enumerate() {
            let index = k + 1;
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { index });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { index, value: w });
            }
            if w == 0.0 && !allow_zero {
                return Err(Error::ZeroWeight { index });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            // all zero (only reachable in allow-zero mode)
            return Err(Error::ZeroWeight { index: 1 });
        }
        if !total.is_finite() {
            return Err(Error::NonFiniteWeight { index: 0 });
        }

        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut prefix = Vec::with_capacity(probs.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for &p in &probs {
            acc += p;
            prefix.push(acc);
        }
        Ok(Self {
            weights: weights.to_vec(),
            probs,
            prefix,
        })
    }

    /// Uniform distribution over `n >= 1` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(&vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Raw weights as supplied.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized probabilities; index 0 holds `p(1)`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p(i)` for a 1-based item.
    pub fn prob(&self, item: usize) -> Result<f64> {
        self.check_index(item)?;
        Ok(self.probs[item - 1])
    }

    /// Total mass `p(i) + ... + p(j)` of the items `lo..=hi` (1-based).
    pub fn interval_prob(&self, lo: usize, hi: usize) -> Result<f64> {
        self.check_index(lo)?;
        self.check_index(hi)?;
        if lo > hi {
            return Err(Error::InvertedInterval { lo, hi });
        }
        Ok(self.mass(lo, hi))
    }

    /// Unchecked interval mass; `lo > hi` yields 0.
    #[inline]
    pub(crate) fn mass(&self, lo: usize, hi: usize) -> f64 {
        if lo > hi {
            0.0
        } else {
            self.prefix[hi] - self.prefix[lo - 1]
        }
    }

    /// Cumulative probabilities `p(1) + ... + p(k)` for `k = 0..=n`.
    pub(crate) fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// The same distribution with outcome order reversed.
    pub fn reversed(&self) -> Self {
        let mut weights = self.weights.clone();
        weights.reverse();
        Self::build(&weights, true).expect("reversal of a valid distribution")
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.len() {
            Err(Error::IndexOutOfRange { index, n: self.len() })
        } else {
            Ok(())
        }
    }
}

/// Positive branch costs for static prediction.
///
/// `mispredicted >= predicted > 0`; construction swaps the arguments if
/// needed so callers may pass them in either order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticCosts {
    mispredicted: f64,
    predicted: f64,
}

impl StaticCosts {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for c in [a, b] {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonPositiveCost(c));
            }
        }
        let (mispredicted, predicted) = if a >= b { (a, b) } else { (b, a) };
        Ok(Self {
            mispredicted,
            predicted,
        })
    }

    /// Cost `c0` of an edge whose outcome contradicts the prediction.
    pub fn mispredicted(&self) -> f64 {
        self.mispredicted
    }

    /// Cost `c1` of a correctly predicted edge.
    pub fn predicted(&self) -> f64 {
        self.predicted
    }

    /// `c0 / c1`, always at least 1.
    pub fn ratio(&self) -> f64 {
        self.mispredicted / self.predicted
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.mispredicted * factor, self.predicted * factor)
    }
}
