//! Monte-Carlo replay of keys through a decision tree.
//!
//! Items are drawn i.i.d. from the distribution with a ChaCha8 generator
//! seeded by `seed_from_u64(seed)`: each draw takes one `f64` uniform in
//! `[0, 1)` (53 random bits) and picks the first item whose cumulative
//! probability exceeds it. Runs are reproducible bit for bit.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distribution::{Distribution, StaticCosts};
use crate::error::{Error, Result};
use crate::predictor::{SaturatingCounter, TwoBitModel};
use crate::tree::{DecisionTree, Side};

/// Default number of draws discarded before measuring two-bit prediction.
pub const DEFAULT_WARMUP: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub samples: u64,
    pub mean_cycles: f64,
    /// Standard error of `mean_cycles`. Static runs use the per-lookup
    /// sample deviation; two-bit runs use 64 batch means.
    pub std_error: f64,
    /// Keyed by the node's pre-order index (leaves counted).
    pub per_node_mispredict: BTreeMap<usize, NodeMispredicts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMispredicts {
    pub split: usize,
    pub visits: u64,
    pub mispredicts: u64,
    pub rate: f64,
}

/// Static prediction: the edge each node's bias predicts costs `c1`, the
/// other `c0`.
pub fn simulate_static(
    tree: &DecisionTree,
    dist: &Distribution,
    costs: StaticCosts,
    samples: u64,
    seed: u64,
) -> Result<SimReport> {
    let flat = FlatTree::new(tree, dist.len())?;
    let predicted = flat.predicted_sides()?;
    let (c0, c1) = (costs.mispredicted(), costs.predicted());
    run(&flat, dist, samples, seed, 0, 0, |node, taken| {
        let side = if taken { Side::Right } else { Side::Left };
        let miss = side != predicted[node];
        (if miss { c0 } else { c1 }, miss)
    })
}

/// Dynamic prediction with one two-bit counter per internal node, each
/// starting weakly not taken. Going right counts as taken. The first
/// `warmup` draws train the counters and are not measured.
pub fn simulate_twobit(
    tree: &DecisionTree,
    dist: &Distribution,
    model: TwoBitModel,
    samples: u64,
    seed: u64,
    warmup: u64,
) -> Result<SimReport> {
    let flat = FlatTree::new(tree, dist.len())?;
    let mut counters = vec![SaturatingCounter::INITIAL; flat.nodes.len()];
    run(&flat, dist, samples, seed, warmup, TWOBIT_BATCHES, |node, taken| {
        let miss = counters[node].update(taken);
        let cost = model.base() + if miss { model.penalty() } else { 0.0 };
        (cost, miss)
    })
}

/// Batch count for the two-bit standard error. Successive lookups share
/// counter state, so per-lookup variance understates the error of the mean.
const TWOBIT_BATCHES: u64 = 64;

/// With `batches > 0` and enough samples, `std_error` comes from the spread
/// of that many equal batch means instead of the per-lookup variance.
fn run<F>(
    flat: &FlatTree,
    dist: &Distribution,
    samples: u64,
    seed: u64,
    warmup: u64,
    batches: u64,
    mut step: F,
) -> Result<SimReport>
where
    F: FnMut(usize, bool) -> (f64, bool),
{
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let sampler = ItemSampler::new(dist);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visits = vec![0u64; flat.nodes.len()];
    let mut misses = vec![0u64; flat.nodes.len()];

    for _ in 0..warmup {
        let item = sampler.draw(&mut rng);
        flat.walk(item, |node, taken| {
            step(node, taken);
        });
    }

    let batch_len = if batches > 0 && samples >= 2 * batches {
        samples / batches
    } else {
        0
    };
    let mut batch = Welford::default();
    let mut batch_sum = 0.0;

    let mut all = Welford::default();
    for k in 1..=samples {
        let item = sampler.draw(&mut rng);
        let mut cycles = 0.0;
        flat.walk(item, |node, taken| {
            let (c, miss) = step(node, taken);
            cycles += c;
            visits[node] += 1;
            misses[node] += miss as u64;
        });
        all.push(cycles);
        if batch_len > 0 {
            batch_sum += cycles;
            if k % batch_len == 0 && k / batch_len <= batches {
                batch.push(batch_sum / batch_len as f64);
                batch_sum = 0.0;
            }
        }
    }

    let std_error = if batch_len > 0 {
        batch.std_error()
    } else {
        all.std_error()
    };
    let per_node_mispredict = flat
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(k, node)| match node {
            FlatNode::Split { split, .. } => Some((
                k,
                NodeMispredicts {
                    split: *split,
                    visits: visits[k],
                    mispredicts: misses[k],
                    rate: if visits[k] > 0 {
                        misses[k] as f64 / visits[k] as f64
                    } else {
                        0.0
                    },
                },
            )),
            FlatNode::Leaf => None,
        })
        .collect();
    Ok(SimReport {
        samples,
        mean_cycles: all.mean,
        std_error,
        per_node_mispredict,
    })
}

#[derive(Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Sample standard deviation over `sqrt(n)`.
    fn std_error(&self) -> f64 {
        if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        }
    }
}

struct ItemSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl ItemSampler {
    fn new(dist: &Distribution) -> Self {
        let cumulative = dist.prefix()[1..].to_vec();
        let last_positive = dist
            .probs()
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("distribution has positive mass");
        Self {
            cumulative,
            last_positive,
        }
    }

    /// 1-based item.
    fn draw(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.last_positive) + 1
    }
}

/// Pre-order array form of a tree; indices match [`DecisionTree::subtrees`].
struct FlatTree<'a> {
    nodes: Vec<FlatNode>,
    source: Vec<&'a DecisionTree>,
}

enum FlatNode {
    Split { split: usize, left: usize, right: usize },
    Leaf,
}

impl<'a> FlatTree<'a> {
    fn new(tree: &'a DecisionTree, n: usize) -> Result<Self> {
        tree.validate(n)?;
        let mut flat = Self {
            nodes: Vec::new(),
            source: Vec::new(),
        };
        flat.push(tree);
        Ok(flat)
    }

    fn push(&mut self, tree: &'a DecisionTree) -> usize {
        let at = self.nodes.len();
        self.nodes.push(FlatNode::Leaf);
        self.source.push(tree);
        if let DecisionTree::Node { split, left, right, .. } = tree {
            let left = self.push(left);
            let right = self.push(right);
            self.nodes[at] = FlatNode::Split {
                split: *split,
                left,
                right,
            };
        }
        at
    }

    /// Bias per node; leaves get a placeholder.
    fn predicted_sides(&self) -> Result<Vec<Side>> {
        self.nodes
            .iter()
            .zip(&self.source)
            .map(|(node, tree)| match node {
                FlatNode::Leaf => Ok(Side::Right),
                FlatNode::Split { split, .. } => tree.predicted_side().ok_or(Error::MissingBias { split: *split }),
            })
            .collect()
    }

    fn walk(&self, item: usize, mut visit: impl FnMut(usize, bool)) {
        let mut at = 0;
        while let FlatNode::Split { split, left, right } = self.nodes[at] {
            let taken = item >= split;
            visit(at, taken);
            at = if taken { right } else { left };
        }
    }
}
