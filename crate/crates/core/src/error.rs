use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong when building or evaluating a decision tree.
///
/// Item indices carried in variants are 1-based, matching the public API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distribution needs at least one weight")]
    EmptyInput,
    #[error("weight {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight {index} is zero; enable allow-zero mode to admit zero-mass outcomes")]
    ZeroWeight { index: usize },
    #[error("weight {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("item index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("interval [{lo}, {hi}] is inverted")]
    InvertedInterval { lo: usize, hi: usize },
    #[error("branch costs must be finite and positive (got {0})")]
    NonPositiveCost(f64),
    #[error("at least one split method is required")]
    NoMethods,
    #[error("split method {method} returned invalid cost {cost}")]
    MethodCostNegative { method: usize, cost: f64 },
    #[error("tree has {found} leaves but the distribution has {expected} outcomes")]
    LeafCountMismatch { expected: usize, found: usize },
    #[error("tree is not alphabetic: {0}")]
    NotAlphabetic(String),
    #[error("node splitting at {split} has no recorded edge costs")]
    MissingBias { split: usize },
    #[error("brute force limited to n <= {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid predictor parameter: {0}")]
    InvalidModel(String),
    #[error("Zipf distribution needs n >= 1")]
    ZeroN,
    #[error("simulation needs at least one sample")]
    NoSamples,
    #[error("expected {expected} cutoffs, got {found}")]
    CutoffCountMismatch { expected: usize, found: usize },
    #[error("expected {expected} labels, got {found}")]
    LabelCountMismatch { expected: usize, found: usize },
    #[error("cutoffs must be finite and strictly ascending (violated at position {0})")]
    UnsortedCutoffs(usize),
}
