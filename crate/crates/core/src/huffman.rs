//! Huffman codeword-length statistics for the codeword-length lookup tree.
//!
//! A Huffman decoder that resolves the codeword length of the next input
//! with a hard-coded comparison tree needs the distribution of lengths, not
//! of symbols. This module builds that distribution from symbol weights.

use std::collections::VecDeque;

use serde::Serialize;

use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Zipf's law over `n` ranks: `p(i) = (1/i) / H_n`.
pub fn zipf_weights(n: usize) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::ZeroN);
    }
    let weights: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    Distribution::new(&weights)
}

/// Codeword length of every item in a Huffman code for `dist`.
///
/// Two-queue construction: leaves sorted by ascending probability (ties by
/// item index) feed one FIFO, merged nodes the other. On equal weights the
/// leaf queue is drawn first, so earlier-created nodes always merge first.
/// A single item gets length 0.
pub fn huffman_lengths(dist: &Distribution) -> Vec<u32> {
    let probs = dist.probs();
    let n = probs.len();
    if n == 1 {
        return vec![0];
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(a.cmp(&b)));
    let mut leaves: VecDeque<(f64, usize)> = order.into_iter().map(|i| (probs[i], i)).collect();
    let mut merged: VecDeque<(f64, usize)> = VecDeque::with_capacity(n);

    // Node ids: leaves 0..n, merged nodes n.. in creation order.
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut next_id = n;
    let pop = |leaves: &mut VecDeque<(f64, usize)>, merged: &mut VecDeque<(f64, usize)>| {
        match (leaves.front(), merged.front()) {
            (Some(l), Some(m)) if m.0 < l.0 => merged.pop_front(),
            (Some(_), _) => leaves.pop_front(),
            (None, _) => merged.pop_front(),
        }
        .expect("two nodes remain")
    };
    while leaves.len() + merged.len() > 1 {
        let a = pop(&mut leaves, &mut merged);
        let b = pop(&mut leaves, &mut merged);
        parent[a.1] = next_id;
        parent[b.1] = next_id;
        merged.push_back((a.0 + b.0, next_id));
        next_id += 1;
    }

    let root = next_id - 1;
    let mut depth = vec![0u32; 2 * n - 1];
    for id in (0..root).rev() {
        depth[id] = depth[parent[id]] + 1;
    }
    depth.truncate(n);
    depth
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthRow {
    pub length: u32,
    pub count: u64,
    pub prob: f64,
}

/// Codeword counts and probability mass per codeword length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthDistribution {
    /// Strictly increasing lengths.
    pub rows: Vec<LengthRow>,
    pub source_n: usize,
}

impl LengthDistribution {
    pub fn kraft_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.count as f64 * (-(r.length as f64)).exp2())
            .sum()
    }

    /// Mean codeword length in bits.
    pub fn expected_length(&self) -> f64 {
        self.rows.iter().map(|r| r.prob * r.length as f64).sum()
    }

    /// The lengths as an ordered outcome distribution.
    pub fn to_distribution(&self) -> Result<Distribution> {
        let probs: Vec<f64> = self.rows.iter().map(|r| r.prob).collect();
        Distribution::new(&probs)
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.length).collect()
    }
}

/// Aggregates a Huffman code for `dist` by codeword length.
pub fn huffman_length_distribution(dist: &Distribution) -> LengthDistribution {
    let lengths = huffman_lengths(dist);
    let mut rows: Vec<LengthRow> = Vec::new();
    let mut by_length: Vec<(u32, f64)> = lengths.iter().copied().zip(dist.probs().iter().copied()).collect();
    // stable: items of equal length keep index order for summation
    by_length.sort_by_key(|&(len, _)| len);
    for (len, p) in by_length {
        match rows.last_mut() {
            Some(row) if row.length == len => {
                row.count += 1;
                row.prob += p;
            }
            _ => rows.push(LengthRow {
                length: len,
                count: 1,
                prob: p,
            }),
        }
    }
    LengthDistribution {
        rows,
        source_n: dist.len(),
    }
}
