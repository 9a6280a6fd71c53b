//! Entropy bounds on the optimal expected cost under static prediction.
//!
//! With `d` the positive solution of `2^(-d c0) + 2^(-d c1) = 1`, every
//! alphabetic tree costs at least `H(p) / d` (the bound holds even without
//! the alphabetic constraint), and the ordered-edge optimum costs at most
//! `(H(p) + 1) / d + max(c0, c1)`. The branching optimum lies between.

use serde::Serialize;

use crate::distribution::{Distribution, StaticCosts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `H(p)` in bits.
    pub entropy: f64,
    /// `c0 / c1`.
    pub rho: f64,
    /// Root of `x^rho + x - 1` in `(0, 1)`.
    pub x: f64,
    /// Bits resolved per cycle.
    pub d: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Shannon entropy in bits. Zero-mass outcomes contribute nothing.
pub fn entropy(dist: &Distribution) -> f64 {
    // Neumaier-compensated sum of -p ln p
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &p in dist.probs() {
        if p <= 0.0 {
            continue;
        }
        let term = -p * p.ln();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    ((sum + comp) / std::f64::consts::LN_2).max(0.0)
}

/// Solves `x^rho + x = 1` for `rho = c0 / c1` and returns `(x, d)` with
/// `d = -log2(x) / c1`.
pub fn solve_d(costs: StaticCosts) -> (f64, f64) {
    let rho = costs.ratio();
    let f = |x: f64| x.powf(rho) + x - 1.0;
    // f(lo) < 0 < f(hi) and f is strictly increasing on (0, 1).
    let mut lo = 1e-300f64;
    let mut hi = 1.0f64;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if f(hi).abs() < f(lo).abs() { hi } else { lo };
    let d = -x.log2() / costs.predicted();
    (x, d)
}

/// Lower and upper bounds on the optimal static-prediction cost.
pub fn cost_bounds(dist: &Distribution, costs: StaticCosts) -> BoundsReport {
    let h = entropy(dist);
    let (x, d) = solve_d(costs);
    BoundsReport {
        entropy: h,
        rho: costs.ratio(),
        x,
        d,
        lower: h / d,
        upper: (h + 1.0) / d + costs.mispredicted(),
    }
}
