//! Full binary alphabetic decision trees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A full binary decision tree over items `lo..=hi`.
///
/// A node splitting at `s` sends items `>= s` right and the rest left.
/// `method` is the 1-based index of the split method chosen for the node,
/// and `edge_costs` the (left, right) edge costs when the method has them.
///
/// JSON form: `{"leaf": i}` or
/// `{"split": s, "method": k, "edge_costs": [l, r], "left": .., "right": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecisionTree {
    Leaf {
        #[serde(rename = "leaf")]
        item: usize,
    },
    Node {
        split: usize,
        method: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge_costs: Option<[f64; 2]>,
        left: Box<DecisionTree>,
        right: Box<DecisionTree>,
    },
}

/// Which child an edge leads to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A subtree together with its position in the whole tree.
#[derive(Debug, Clone, Copy)]
pub struct Subtree<'a> {
    /// Pre-order index over all nodes, leaves included; the root is 0.
    pub index: usize,
    pub lo: usize,
    pub hi: usize,
    pub depth: usize,
    pub tree: &'a DecisionTree,
}

impl DecisionTree {
    pub fn leaf(item: usize) -> Self {
        DecisionTree::Leaf { item }
    }

    pub fn node(
        split: usize,
        method: usize,
        edge_costs: Option<(f64, f64)>,
        left: DecisionTree,
        right: DecisionTree,
    ) -> Self {
        DecisionTree::Node {
            split,
            method,
            edge_costs: edge_costs.map(|(l, r)| [l, r]),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DecisionTree::Leaf { .. })
    }

    /// First and last leaf item.
    pub fn span(&self) -> (usize, usize) {
        let mut lo = self;
        while let DecisionTree::Node { left, .. } = lo {
            lo = left;
        }
        let mut hi = self;
        while let DecisionTree::Node { right, .. } = hi {
            hi = right;
        }
        match (lo, hi) {
            (DecisionTree::Leaf { item: a }, DecisionTree::Leaf { item: b }) => (*a, *b),
            _ => unreachable!(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 1,
            DecisionTree::Node { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn internal_count(&self) -> usize {
        self.leaf_count() - 1
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        match self {
            DecisionTree::Leaf { .. } => 0,
            DecisionTree::Node { left, right, .. } => 1 + left.height().max(right.height()),
        }
    }

    /// Leaf items in order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.leaf_count());
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            DecisionTree::Leaf { item } => out.push(*item),
            DecisionTree::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    /// Checks the tree is alphabetic over exactly `1..=n` and every split
    /// point is the first item of its right subtree.
    pub fn validate(&self, n: usize) -> Result<()> {
        let leaves = self.leaves();
        if leaves.len() != n {
            return Err(Error::LeafCountMismatch {
                expected: n,
                found: leaves.len(),
            });
        }
        if let Some(pos) = leaves.iter().enumerate().position(|(k, &item)| item != k + 1) {
            return Err(Error::NotAlphabetic(format!(
                "leaf at in-order position {} is item {}",
                pos + 1,
                leaves[pos]
            )));
        }
        for sub in self.subtrees() {
            if let DecisionTree::Node { split, .. } = sub.tree {
                if !(sub.lo < *split && *split <= sub.hi) {
                    return Err(Error::NotAlphabetic(format!(
                        "split {} outside ({}, {}]",
                        split, sub.lo, sub.hi
                    )));
                }
                if let DecisionTree::Node { right, .. } = sub.tree {
                    if right.span().0 != *split {
                        return Err(Error::NotAlphabetic(format!(
                            "split {} but right subtree starts at {}",
                            split,
                            right.span().0
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// All subtrees in pre-order.
    pub fn subtrees(&self) -> Vec<Subtree<'_>> {
        let mut out = Vec::new();
        let mut stack = vec![(self, 0usize)];
        while let Some((tree, depth)) = stack.pop() {
            let (lo, hi) = tree.span();
            out.push(Subtree {
                index: out.len(),
                lo,
                hi,
                depth,
                tree,
            });
            if let DecisionTree::Node { left, right, .. } = tree {
                stack.push((right, depth + 1));
                stack.push((left, depth + 1));
            }
        }
        out
    }

    /// The child the cheaper edge leads to; ties go right.
    ///
    /// `None` for leaves and for nodes without recorded edge costs.
    pub fn predicted_side(&self) -> Option<Side> {
        match self {
            DecisionTree::Node {
                edge_costs: Some([l, r]),
                ..
            } => Some(if l < r { Side::Left } else { Side::Right }),
            _ => None,
        }
    }

    /// Copy with every node's edge costs replaced by fixed (left, right).
    pub fn with_ordered_edges(&self, left_cost: f64, right_cost: f64) -> Self {
        match self {
            DecisionTree::Leaf { item } => DecisionTree::leaf(*item),
            DecisionTree::Node {
                split,
                method,
                left,
                right,
                ..
            } => DecisionTree::node(
                *split,
                *method,
                Some((left_cost, right_cost)),
                left.with_ordered_edges(left_cost, right_cost),
                right.with_ordered_edges(left_cost, right_cost),
            ),
        }
    }

    /// Mirror image: reversed item order, children swapped.
    ///
    /// `n` is the item count of the whole tree; item `i` becomes `n + 1 - i`.
    pub fn mirrored(&self, n: usize) -> Self {
        match self {
            DecisionTree::Leaf { item } => DecisionTree::leaf(n + 1 - item),
            DecisionTree::Node {
                method,
                edge_costs,
                left,
                right,
                ..
            } => {
                let new_left = right.mirrored(n);
                let new_right = left.mirrored(n);
                let split = new_right.span().0;
                DecisionTree::node(split, *method, edge_costs.map(|[l, r]| (r, l)), new_left, new_right)
            }
        }
    }
}
