//! Minimum expected run-time alphabetic decision trees for processors whose
//! conditional branches cost different amounts depending on prediction.
//!
//! Outcomes `1..=n` with probabilities `p(i)` are resolved by a full binary
//! tree of `key >= cutoff` tests. Under static prediction each test costs
//! `c1` cycles along its predicted edge and `c0 >= c1` along the other, and
//! the bias of each test is free to choose. [`optimize_static`] finds the
//! tree and biases of least expected cost; [`optimize_general`] does the
//! same for arbitrary per-split cost functions such as the two-bit counter
//! model in [`predictor`].
//!
//! ```
//! use branchtree::{optimize_static, Distribution, StaticCosts};
//!
//! let dist = Distribution::new(&[1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0]).unwrap();
//! let best = optimize_static(&dist, StaticCosts::new(11.0, 2.0).unwrap()).unwrap();
//! assert_eq!(best.expected_cost, 12.984375);
//! ```

pub mod bounds;
pub mod codegen;
pub mod distribution;
pub mod error;
pub mod huffman;
pub mod method;
pub mod optimizer;
pub mod oracle;
pub mod predictor;
pub mod simulate;
pub mod tree;

pub use bounds::{cost_bounds, entropy, solve_d, BoundsReport};
pub use codegen::{emit_c, emit_dot, emit_pseudo_asm};
pub use distribution::{Distribution, StaticCosts};
pub use error::{Error, Result};
pub use huffman::{huffman_length_distribution, huffman_lengths, zipf_weights, LengthDistribution, LengthRow};
pub use method::{EdgeCosts, SplitContext, SplitCost, SplitMethod};
pub use optimizer::{
    evaluate_tree, optimize_general, optimize_ordered, optimize_static, optimize_uniform, CostModel, DpTable,
    ModelSpec, OptimizeResult,
};
pub use oracle::brute_force_optimal;
pub use predictor::{static_methods, twobit_method, twobit_mispredict_rate, TwoBitModel};
pub use simulate::{simulate_static, simulate_twobit, NodeMispredicts, SimReport};
pub use tree::{DecisionTree, Side, Subtree};
