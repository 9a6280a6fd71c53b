//! Pluggable per-split cost functions.
//!
//! A split method prices one internal node: splitting the items `lo..=hi`
//! at `split` sends mass `left_mass = p(lo, split-1)` left and
//! `right_mass = p(split, hi)` right. The optimizer picks, for every
//! interval, the split point and method of least total cost.

use std::fmt;
use std::sync::Arc;

/// Arguments of a split cost `C_k(p', p'', i, j, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitContext {
    pub left_mass: f64,
    pub right_mass: f64,
    pub lo: usize,
    pub hi: usize,
    pub split: usize,
}

impl SplitContext {
    /// Mass reaching the node.
    pub fn mass(&self) -> f64 {
        self.left_mass + self.right_mass
    }
}

/// Cost of one way of implementing a split.
///
/// Implementations must be deterministic, return finite nonnegative
/// values, and run in constant time.
pub trait SplitCost: Send + Sync {
    fn cost(&self, ctx: &SplitContext) -> f64;

    /// Expected cost of the (left, right) edge for an execution that takes
    /// it, when the method decomposes as `left * p' + right * p''`.
    ///
    /// Codegen reads the predicted direction from these; simulation and
    /// static evaluation need them too.
    fn edge_costs(&self, _ctx: &SplitContext) -> Option<(f64, f64)> {
        None
    }

    fn label(&self) -> String;
}

/// A shareable, labelled split cost.
#[derive(Clone)]
pub struct SplitMethod {
    inner: Arc<dyn SplitCost>,
}

impl SplitMethod {
    pub fn new(cost: impl SplitCost + 'static) -> Self {
        Self { inner: Arc::new(cost) }
    }

    /// Wraps a closure. Such methods record no edge costs.
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&SplitContext) -> f64 + Send + Sync + 'static,
    {
        Self::new(FnCost { label: label.into(), f })
    }

    /// Fixed per-edge costs: `left * p' + right * p''`.
    pub fn edges(left: f64, right: f64) -> Self {
        Self::new(EdgeCosts { left, right })
    }

    pub fn cost(&self, ctx: &SplitContext) -> f64 {
        self.inner.cost(ctx)
    }

    pub fn edge_costs(&self, ctx: &SplitContext) -> Option<(f64, f64)> {
        self.inner.edge_costs(ctx)
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }
}

impl fmt::Debug for SplitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SplitMethod").field(&self.label()).finish()
    }
}

/// Constant edge costs, independent of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCosts {
    pub left: f64,
    pub right: f64,
}

impl SplitCost for EdgeCosts {
    #[inline]
    fn cost(&self, ctx: &SplitContext) -> f64 {
        self.left * ctx.left_mass + self.right * ctx.right_mass
    }

    fn edge_costs(&self, _ctx: &SplitContext) -> Option<(f64, f64)> {
        Some((self.left, self.right))
    }

    fn label(&self) -> String {
        format!("left edge {} / right edge {}", self.left, self.right)
    }
}

struct FnCost<F> {
    label: String,
    f: F,
}

impl<F> SplitCost for FnCost<F>
where
    F: Fn(&SplitContext) -> f64 + Send + Sync,
{
    fn cost(&self, ctx: &SplitContext) -> f64 {
        (self.f)(ctx)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}
