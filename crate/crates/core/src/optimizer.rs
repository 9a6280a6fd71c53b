//! Interval dynamic programs for minimum expected-cost decision trees.
//!
//! Every optimizer here runs the same recurrence over intervals `[i, j]`:
//!
//! ```text
//! c(i, i)   = 0
//! c_k(i, j) = min over s in (i, j] of  C_k(p(i, s-1), p(s, j), i, j, s) + c(i, s-1) + c(s, j)
//! c(i, j)   = min over k of c_k(i, j)
//! ```
//!
//! The static model has two methods: the left edge mispredicted (`k = 1`)
//! or the right edge mispredicted (`k = 2`). The ordered model keeps a
//! single method with fixed left/right edge costs, and the uniform model is
//! the ordered model with unit costs.
//!
//! Ties resolve to the smallest split point within a method, then to the
//! lowest method index. No split-window pruning is applied: optimal split
//! points are not monotone in the interval bounds for this problem.

use serde::Serialize;

use crate::distribution::{Distribution, StaticCosts};
use crate::error::{Error, Result};
use crate::method::{SplitContext, SplitMethod};
use crate::tree::{DecisionTree, Side};

/// Optimal costs, split points and methods for every interval.
#[derive(Debug, Clone)]
pub struct DpTable {
    n: usize,
    cost: Vec<f64>,
    split: Vec<u32>,
    method: Vec<u32>,
}

impl DpTable {
    fn new(n: usize) -> Self {
        Self {
            n,
            cost: vec![0.0; n * n],
            split: vec![0; n * n],
            method: vec![0; n * n],
        }
    }

    #[inline]
    fn idx(&self, lo: usize, hi: usize) -> usize {
        (lo - 1) * self.n + (hi - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of interval slots held by each of the three tables.
    pub fn slots(&self) -> usize {
        self.cost.len()
    }

    /// Optimal cost `c(lo, hi)` of a subtree over `lo..=hi`.
    ///
    /// # Panics
    /// If `lo > hi` or either index is outside `1..=n`.
    #[inline]
    pub fn cost(&self, lo: usize, hi: usize) -> f64 {
        assert!(
            1 <= lo && lo <= hi && hi <= self.n,
            "interval [{lo}, {hi}] out of range"
        );
        self.cost[self.idx(lo, hi)]
    }

    /// Optimal split point; `None` for single items.
    pub fn split(&self, lo: usize, hi: usize) -> Option<usize> {
        (lo < hi).then(|| self.split[self.idx(lo, hi)] as usize)
    }

    /// Chosen method (1-based); `None` for single items.
    pub fn method(&self, lo: usize, hi: usize) -> Option<usize> {
        (lo < hi).then(|| self.method[self.idx(lo, hi)] as usize)
    }
}

/// The cost model an optimization ran under.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Static { mispredicted: f64, predicted: f64 },
    Ordered { left: f64, right: f64 },
    Uniform,
    General { methods: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub tree: DecisionTree,
    /// Expected cost of `tree`, equal to `table.cost(1, n)`.
    pub expected_cost: f64,
    pub table: DpTable,
    pub model: ModelSpec,
}

/// How `evaluate_tree` prices each edge.
#[derive(Debug, Clone, Copy)]
pub enum CostModel<'a> {
    /// Use each node's recorded `edge_costs`.
    Recorded,
    /// Static prediction: the edge each node's bias predicts costs `c1`, the
    /// other `c0`.
    Static(StaticCosts),
    /// Re-price each node with the method it records.
    Methods(&'a [SplitMethod]),
}

/// Optimal tree when each node may put the mispredicted edge on either side.
pub fn optimize_static(dist: &Distribution, costs: StaticCosts) -> Result<OptimizeResult> {
    let c0 = costs.mispredicted();
    let c1 = costs.predicted();
    let pairs = [(c0, c1), (c1, c0)];
    let table = solve(dist, 2, |k, ctx| {
        let (l, r) = pairs[k];
        Ok(l * ctx.left_mass + r * ctx.right_mass)
    })?;
    let tree = extract(dist, &table, &mut |k, _| Some(pairs[k - 1]));
    Ok(finish(
        tree,
        table,
        ModelSpec::Static {
            mispredicted: c0,
            predicted: c1,
        },
    ))
}

/// Optimal tree when every left edge costs `left_cost` and every right edge
/// `right_cost`.
pub fn optimize_ordered(dist: &Distribution, left_cost: f64, right_cost: f64) -> Result<OptimizeResult> {
    for c in [left_cost, right_cost] {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::NonPositiveCost(c));
        }
    }
    let table = solve(dist, 1, |_, ctx| {
        Ok(left_cost * ctx.left_mass + right_cost * ctx.right_mass)
    })?;
    let tree = extract(dist, &table, &mut |_, _| Some((left_cost, right_cost)));
    Ok(finish(
        tree,
        table,
        ModelSpec::Ordered {
            left: left_cost,
            right: right_cost,
        },
    ))
}

/// Tree minimizing the expected number of comparisons.
pub fn optimize_uniform(dist: &Distribution) -> Result<OptimizeResult> {
    let mut result = optimize_ordered(dist, 1.0, 1.0)?;
    result.model = ModelSpec::Uniform;
    Ok(result)
}

/// Optimal tree over arbitrary split methods.
///
/// Runs in `O(m n^3)` time for `m` methods. A method returning a negative
/// or non-finite cost aborts with [`Error::MethodCostNegative`].
pub fn optimize_general(dist: &Distribution, methods: &[SplitMethod]) -> Result<OptimizeResult> {
    if methods.is_empty() {
        return Err(Error::NoMethods);
    }
    let table = solve(dist, methods.len(), |k, ctx| {
        let cost = methods[k].cost(ctx);
        if cost.is_finite() && cost >= 0.0 {
            Ok(cost)
        } else {
            Err(Error::MethodCostNegative { method: k + 1, cost })
        }
    })?;
    let tree = extract(dist, &table, &mut |k, ctx| methods[k - 1].edge_costs(ctx));
    Ok(finish(
        tree,
        table,
        ModelSpec::General {
            methods: methods.iter().map(SplitMethod::label).collect(),
        },
    ))
}

/// Expected cost of `tree` under `model`, recomputed from the tree itself.
///
/// Edge-priced models sum `p(i)` times the cost of the path to leaf `i`;
/// [`CostModel::Methods`] sums each node's split cost instead.
pub fn evaluate_tree(tree: &DecisionTree, dist: &Distribution, model: CostModel<'_>) -> Result<f64> {
    tree.validate(dist.len())?;
    match model {
        CostModel::Recorded => path_sum(tree, dist, &|node| match node {
            DecisionTree::Node {
                edge_costs: Some([l, r]),
                ..
            } => Ok((*l, *r)),
            DecisionTree::Node { split, .. } => Err(Error::MissingBias { split: *split }),
            DecisionTree::Leaf { .. } => unreachable!(),
        }),
        CostModel::Static(costs) => path_sum(tree, dist, &|node| {
            let (c0, c1) = (costs.mispredicted(), costs.predicted());
            match (node.predicted_side(), node) {
                (Some(Side::Left), _) => Ok((c1, c0)),
                (Some(Side::Right), _) => Ok((c0, c1)),
                (None, DecisionTree::Node { split, .. }) => Err(Error::MissingBias { split: *split }),
                (None, DecisionTree::Leaf { .. }) => unreachable!(),
            }
        }),
        CostModel::Methods(methods) => {
            let mut total = 0.0;
            for sub in tree.subtrees() {
                if let DecisionTree::Node { split, method, .. } = sub.tree {
                    let m = method.checked_sub(1).and_then(|k| methods.get(k)).ok_or_else(|| {
                        Error::InvalidModel(format!(
                            "node at {split} uses method {method} but {} are defined",
                            methods.len()
                        ))
                    })?;
                    let ctx = SplitContext {
                        left_mass: dist.interval_prob(sub.lo, split - 1)?,
                        right_mass: dist.interval_prob(*split, sub.hi)?,
                        lo: sub.lo,
                        hi: sub.hi,
                        split: *split,
                    };
                    total += m.cost(&ctx);
                }
            }
            Ok(total)
        }
    }
}

fn path_sum<F>(tree: &DecisionTree, dist: &Distribution, edges: &F) -> Result<f64>
where
    F: Fn(&DecisionTree) -> Result<(f64, f64)>,
{
    fn walk<F>(t: &DecisionTree, dist: &Distribution, edges: &F, depth_cost: f64, acc: &mut f64) -> Result<()>
    where
        F: Fn(&DecisionTree) -> Result<(f64, f64)>,
    {
        match t {
            DecisionTree::Leaf { item } => {
                *acc += dist.probs()[item - 1] * depth_cost;
                Ok(())
            }
            DecisionTree::Node { left, right, .. } => {
                let (l, r) = edges(t)?;
                walk(left, dist, edges, depth_cost + l, acc)?;
                walk(right, dist, edges, depth_cost + r, acc)
            }
        }
    }
    let mut acc = 0.0;
    walk(tree, dist, edges, 0.0, &mut acc)?;
    Ok(acc)
}

/// Fills the table by increasing interval length. `price(k, ctx)` is the
/// cost of method `k` (0-based) at a split.
fn solve<F>(dist: &Distribution, methods: usize, mut price: F) -> Result<DpTable>
where
    F: FnMut(usize, &SplitContext) -> Result<f64>,
{
    let n = dist.len();
    let prefix = dist.prefix();
    let mut table = DpTable::new(n);
    let mut best = vec![(f64::INFINITY, 0usize); methods];

    for len in 2..=n {
        for lo in 1..=n + 1 - len {
            let hi = lo + len - 1;
            best.fill((f64::INFINITY, 0));
            for s in lo + 1..=hi {
                let ctx = SplitContext {
                    left_mass: prefix[s - 1] - prefix[lo - 1],
                    right_mass: prefix[hi] - prefix[s - 1],
                    lo,
                    hi,
                    split: s,
                };
                let below_left = table.cost[table.idx(lo, s - 1)];
                let below_right = table.cost[table.idx(s, hi)];
                for (k, slot) in best.iter_mut().enumerate() {
                    let v = price(k, &ctx)? + below_left + below_right;
                    if v < slot.0 {
                        *slot = (v, s);
                    }
                }
            }
            let mut chosen = 0;
            for k in 1..methods {
                if best[k].0 < best[chosen].0 {
                    chosen = k;
                }
            }
            let at = table.idx(lo, hi);
            table.cost[at] = best[chosen].0;
            table.split[at] = best[chosen].1 as u32;
            table.method[at] = (chosen + 1) as u32;
        }
    }
    Ok(table)
}

fn extract<F>(dist: &Distribution, table: &DpTable, edges: &mut F) -> DecisionTree
where
    F: FnMut(usize, &SplitContext) -> Option<(f64, f64)>,
{
    fn go<F>(dist: &Distribution, table: &DpTable, edges: &mut F, lo: usize, hi: usize) -> DecisionTree
    where
        F: FnMut(usize, &SplitContext) -> Option<(f64, f64)>,
    {
        let (Some(s), Some(k)) = (table.split(lo, hi), table.method(lo, hi)) else {
            return DecisionTree::leaf(lo);
        };
        let ctx = SplitContext {
            left_mass: dist.mass(lo, s - 1),
            right_mass: dist.mass(s, hi),
            lo,
            hi,
            split: s,
        };
        let edge_costs = edges(k, &ctx);
        let left = go(dist, table, edges, lo, s - 1);
        let right = go(dist, table, edges, s, hi);
        DecisionTree::node(s, k, edge_costs, left, right)
    }
    go(dist, table, edges, 1, dist.len())
}

fn finish(tree: DecisionTree, table: DpTable, model: ModelSpec) -> OptimizeResult {
    let expected_cost = table.cost(1, table.n());
    OptimizeResult {
        tree,
        expected_cost,
        table,
        model,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(w: &[f64]) -> Distribution {
        Distribution::new(w).unwrap()
    }

    fn costs(a: f64, b: f64) -> StaticCosts {
        StaticCosts::new(a, b).unwrap()
    }

    const FOUR: [f64; 4] = [0.3, 0.2, 0.2, 0.3];
    const BINOMIAL: [f64; 7] = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];

    #[test]
    fn static_four_leaf_example() {
        let r = optimize_static(&dist(&FOUR), costs(3.0, 1.0)).unwrap();
        assert!((r.expected_cost - 3.6).abs() < 1e-12);
        let root = r.table.split(1, 4).unwrap();
        assert!(root == 2 || root == 4, "root split {root}");
        assert_eq!(r.table.split(1, 3), Some(3));
        assert_eq!(r.table.split(2, 4), Some(3));
        let eval = evaluate_tree(&r.tree, &dist(&FOUR), CostModel::Recorded).unwrap();
        assert!((eval - r.expected_cost).abs() < 1e-12);
    }

    #[test]
    fn binomial_static_and_ordered() {
        let d = dist(&BINOMIAL);
        let s = optimize_static(&d, costs(11.0, 2.0)).unwrap();
        assert_eq!(s.expected_cost, 12.984375);
        let o = optimize_ordered(&d, 11.0, 2.0).unwrap();
        assert_eq!(o.expected_cost, 15.109375);
        let o2 = optimize_ordered(&d, 2.0, 11.0).unwrap();
        assert_eq!(o2.expected_cost, 15.109375);
    }

    #[test]
    fn two_items_are_forced() {
        let half = dist(&[0.5, 0.5]);
        assert_eq!(optimize_static(&half, costs(3.0, 1.0)).unwrap().expected_cost, 2.0);
        assert_eq!(optimize_ordered(&half, 3.0, 1.0).unwrap().expected_cost, 2.0);
        let skew = dist(&[0.9, 0.1]);
        let r = optimize_ordered(&skew, 3.0, 1.0).unwrap();
        assert!((r.expected_cost - 2.8).abs() < 1e-15);
        // static flips the bias toward the likely item
        let r = optimize_static(&skew, costs(3.0, 1.0)).unwrap();
        assert!((r.expected_cost - (0.9 + 0.3)).abs() < 1e-15);
        assert_eq!(r.tree.predicted_side(), Some(Side::Left));
        assert_eq!(r.table.method(1, 2), Some(2));
    }

    #[test]
    fn uniform_counts_comparisons() {
        assert_eq!(
            optimize_uniform(&Distribution::uniform(4).unwrap())
                .unwrap()
                .expected_cost,
            2.0
        );
        let r = optimize_uniform(&dist(&[0.5, 0.25, 0.25])).unwrap();
        assert_eq!(r.expected_cost, 1.5);
        assert_eq!(r.table.split(1, 3), Some(2));
        let one = optimize_uniform(&dist(&[7.0])).unwrap();
        assert_eq!(one.expected_cost, 0.0);
        assert_eq!(one.tree, DecisionTree::leaf(1));
        assert_eq!(one.model, ModelSpec::Uniform);
    }

    #[test]
    fn general_matches_static() {
        let c = costs(3.0, 1.0);
        let methods = crate::predictor::static_methods(c);
        let g = optimize_general(&dist(&FOUR), &methods).unwrap();
        let s = optimize_static(&dist(&FOUR), c).unwrap();
        assert_eq!(g.expected_cost, s.expected_cost);
        assert_eq!(g.tree, s.tree);
    }

    #[test]
    fn general_with_unit_edges_counts_comparisons() {
        let u4 = Distribution::uniform(4).unwrap();
        let unit = SplitMethod::edges(1.0, 1.0);
        assert_eq!(optimize_general(&u4, &[unit]).unwrap().expected_cost, 2.0);
        // a flat per-split charge counts internal nodes instead
        let flat = SplitMethod::from_fn("flat", |_| 1.0);
        assert_eq!(optimize_general(&u4, &[flat]).unwrap().expected_cost, 3.0);
    }

    #[test]
    fn general_affine_matches_ordered() {
        let d = dist(&BINOMIAL);
        let g = optimize_general(
            &d,
            &[SplitMethod::from_fn("3p'+5p''", |c| {
                3.0 * c.left_mass + 5.0 * c.right_mass
            })],
        )
        .unwrap();
        let o = optimize_ordered(&d, 3.0, 5.0).unwrap();
        assert_eq!(g.expected_cost, o.expected_cost);
        assert_eq!(g.table.split(1, 7), o.table.split(1, 7));
    }

    #[test]
    fn general_errors() {
        let d = Distribution::uniform(3).unwrap();
        assert!(matches!(optimize_general(&d, &[]), Err(Error::NoMethods)));
        let neg = SplitMethod::from_fn("neg", |_| -1.0);
        assert!(matches!(
            optimize_general(&d, &[SplitMethod::edges(1.0, 1.0), neg]),
            Err(Error::MethodCostNegative { method: 2, .. })
        ));
        let nan = SplitMethod::from_fn("nan", |_| f64::NAN);
        assert!(matches!(
            optimize_general(&d, &[nan]),
            Err(Error::MethodCostNegative { method: 1, .. })
        ));
        assert!(matches!(optimize_ordered(&d, 0.0, 1.0), Err(Error::NonPositiveCost(_))));
    }

    #[test]
    fn evaluate_errors_and_leaf() {
        let one = dist(&[1.0]);
        assert_eq!(
            evaluate_tree(&DecisionTree::leaf(1), &one, CostModel::Recorded).unwrap(),
            0.0
        );
        let bare = DecisionTree::node(2, 1, None, DecisionTree::leaf(1), DecisionTree::leaf(2));
        let two = dist(&[1.0, 1.0]);
        assert_eq!(
            evaluate_tree(&bare, &two, CostModel::Static(costs(3.0, 1.0))),
            Err(Error::MissingBias { split: 2 })
        );
        assert_eq!(
            evaluate_tree(&bare, &two, CostModel::Recorded),
            Err(Error::MissingBias { split: 2 })
        );
        assert!(matches!(
            evaluate_tree(&bare, &dist(&[1.0, 1.0, 1.0]), CostModel::Recorded),
            Err(Error::LeafCountMismatch { expected: 3, found: 2 })
        ));
        let methods = [SplitMethod::edges(1.0, 2.0)];
        assert_eq!(evaluate_tree(&bare, &two, CostModel::Methods(&methods)).unwrap(), 1.5);
        let wrong = DecisionTree::node(2, 2, None, DecisionTree::leaf(1), DecisionTree::leaf(2));
        assert!(evaluate_tree(&wrong, &two, CostModel::Methods(&methods)).is_err());
    }

    #[test]
    fn static_evaluation_follows_bias() {
        // predicted side recorded with unit costs still prices at (c0, c1)
        let t = DecisionTree::node(2, 1, Some((2.0, 1.0)), DecisionTree::leaf(1), DecisionTree::leaf(2));
        let d = dist(&[0.25, 0.75]);
        let v = evaluate_tree(&t, &d, CostModel::Static(costs(5.0, 3.0))).unwrap();
        assert_eq!(v, 0.25 * 5.0 + 0.75 * 3.0);
    }

    #[test]
    fn table_retains_every_interval() {
        let d = dist(&BINOMIAL);
        let r = optimize_static(&d, costs(11.0, 2.0)).unwrap();
        assert_eq!(r.table.slots(), 49);
        for i in 1..=7 {
            assert_eq!(r.table.cost(i, i), 0.0);
            assert_eq!(r.table.split(i, i), None);
        }
        assert_eq!(r.table.cost(1, 7), r.expected_cost);
    }
}
