//! Exhaustive reference optimizer for small inputs.
//!
//! Enumerates every full binary alphabetic tree shape explicitly and prices
//! each one node by node. Nothing is memoized and no optimal-substructure
//! argument is used, so it shares no reasoning with the interval DP.

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::method::{SplitContext, SplitMethod};

pub const DEFAULT_MAX_N: usize = 12;

/// Internal nodes of one tree shape as `(lo, hi, split)`.
type Shape = Vec<(usize, usize, usize)>;

/// Minimum expected cost over all trees and all per-node method choices.
///
/// Node costs are additive, so for a fixed shape the best method assignment
/// takes the cheapest method at each node independently; the minimum over
/// all `m^(n-1)` assignments is therefore that per-node sum.
pub fn brute_force_optimal(dist: &Distribution, methods: &[SplitMethod], max_n: usize) -> Result<f64> {
    if methods.is_empty() {
        return Err(Error::NoMethods);
    }
    let n = dist.len();
    if n > max_n {
        return Err(Error::TooLarge { n, max: max_n });
    }
    let probs = dist.probs();
    let mass = |lo: usize, hi: usize| -> f64 { probs[lo - 1..hi].iter().sum() };

    let mut best = f64::INFINITY;
    for shape in shapes(1, n) {
        let mut total = 0.0;
        for &(lo, hi, split) in &shape {
            let ctx = SplitContext {
                left_mass: mass(lo, split - 1),
                right_mass: mass(split, hi),
                lo,
                hi,
                split,
            };
            let mut cheapest = f64::INFINITY;
            for (k, m) in methods.iter().enumerate() {
                let c = m.cost(&ctx);
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::MethodCostNegative { method: k + 1, cost: c });
                }
                cheapest = cheapest.min(c);
            }
            total += cheapest;
        }
        best = best.min(total);
    }
    Ok(best)
}

/// Every full binary tree shape over `lo..=hi`.
fn shapes(lo: usize, hi: usize) -> Vec<Shape> {
    if lo == hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for split in lo + 1..=hi {
        let lefts = shapes(lo, split - 1);
        let rights = shapes(split, hi);
        for l in &lefts {
            for r in &rights {
                let mut s = Vec::with_capacity(l.len() + r.len() + 1);
                s.push((lo, hi, split));
                s.extend_from_slice(l);
                s.extend_from_slice(r);
                out.push(s);
            }
        }
    }
    out
}
