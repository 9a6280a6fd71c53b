//! Split cost functions for static and dynamic branch prediction.
//!
//! The dynamic model gives every internal node its own two-bit saturating
//! counter. Executions reaching a node branch right ("taken") independently
//! with the node's conditional probability `p = p'' / (p' + p'')`, so each
//! counter is a birth-death chain on states `0..=3` that steps up with
//! probability `p` and down with `q = 1 - p`. Its stationary distribution is
//! proportional to `(q^3, p q^2, p^2 q, p^3)`; states 0 and 1 predict not
//! taken, states 2 and 3 predict taken.

use serde::Serialize;

use crate::distribution::StaticCosts;
use crate::error::{Error, Result};
use crate::method::{SplitContext, SplitCost, SplitMethod};

/// The two bias choices of static prediction.
///
/// Method 1 mispredicts the left edge (`c0 p' + c1 p''`), method 2 the
/// right edge (`c1 p' + c0 p''`).
pub fn static_methods(costs: StaticCosts) -> Vec<SplitMethod> {
    let (c0, c1) = (costs.mispredicted(), costs.predicted());
    vec![SplitMethod::edges(c0, c1), SplitMethod::edges(c1, c0)]
}

/// Cycle costs for a node predicted by a two-bit counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBitModel {
    base: f64,
    penalty: f64,
}

impl TwoBitModel {
    /// `base` cycles per branch plus `penalty` more on a misprediction.
    pub fn new(base: f64, penalty: f64) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::InvalidModel(format!("base must be positive, got {base}")));
        }
        if !(penalty.is_finite() && penalty >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "penalty must be nonnegative, got {penalty}"
            )));
        }
        Ok(Self { base, penalty })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }
}

/// Stationary probabilities of counter states 0..=3 when the branch is
/// taken with probability `p_taken`.
pub fn twobit_stationary(p_taken: f64) -> Result<[f64; 4]> {
    check_prob(p_taken)?;
    let p = p_taken;
    let q = 1.0 - p;
    let w = [q * q * q, p * q * q, p * p * q, p * p * p];
    let z: f64 = w.iter().sum();
    Ok(w.map(|x| x / z))
}

/// Long-run fraction of mispredicted executions of a branch taken with
/// probability `p_taken`.
pub fn twobit_mispredict_rate(p_taken: f64) -> Result<f64> {
    let pi = twobit_stationary(p_taken)?;
    let p = p_taken;
    Ok(p * (pi[0] + pi[1]) + (1.0 - p) * (pi[2] + pi[3]))
}

/// Asymptotic variance of the per-execution misprediction indicator, i.e.
/// `lim N Var(mean of N indicators)`. Mispredictions are correlated through
/// the counter state, so this exceeds `m (1 - m)` away from `p = 1/2`.
pub fn twobit_mispredict_variance(p_taken: f64) -> Result<f64> {
    let pi = twobit_stationary(p_taken)?;
    let p = p_taken;
    let q = 1.0 - p;
    if p == 0.0 || q == 0.0 {
        return Ok(0.0);
    }
    let mu = twobit_mispredict_rate(p)?;
    let step = |x: usize, taken: bool| if taken { (x + 1).min(3) } else { x.saturating_sub(1) };
    // Expected misprediction given the counter state, centred.
    let h: [f64; 4] = std::array::from_fn(|x| if x < 2 { p } else { q } - mu);

    // u = sum_k P^k h, the solution of the Poisson equation.
    let mut u = [0.0; 4];
    let mut term = h;
    for _ in 0..1_000_000 {
        let mut size = 0.0f64;
        for x in 0..4 {
            u[x] += term[x];
            size = size.max(term[x].abs());
        }
        if size < 1e-18 {
            break;
        }
        term = std::array::from_fn(|x| p * term[step(x, true)] + q * term[step(x, false)]);
    }

    let mut cross = 0.0;
    for (x, &px) in pi.iter().enumerate() {
        let predicts_taken = x >= 2;
        for (taken, py) in [(true, p), (false, q)] {
            let miss = if taken != predicts_taken { 1.0 } else { 0.0 };
            cross += px * py * (miss - mu) * u[step(x, taken)];
        }
    }
    Ok((mu * (1.0 - mu) + 2.0 * cross).max(0.0))
}

/// Split method pricing a node under two-bit dynamic prediction:
/// `(p' + p'') (base + penalty m(p'' / (p' + p'')))`.
pub fn twobit_method(model: TwoBitModel) -> SplitMethod {
    SplitMethod::new(TwoBitCost { model })
}

#[derive(Debug, Clone, Copy)]
struct TwoBitCost {
    model: TwoBitModel,
}

impl TwoBitCost {
    fn conditional_taken(ctx: &SplitContext) -> Option<f64> {
        let mass = ctx.mass();
        (mass > 0.0).then(|| (ctx.right_mass / mass).clamp(0.0, 1.0))
    }
}

impl SplitCost for TwoBitCost {
    fn cost(&self, ctx: &SplitContext) -> f64 {
        match Self::conditional_taken(ctx) {
            None => 0.0,
            Some(p) => {
                let m = twobit_mispredict_rate(p).expect("clamped probability");
                ctx.mass() * (self.model.base + self.model.penalty * m)
            }
        }
    }

    /// Expected cost of an execution going left (not taken) or right
    /// (taken). The counter state is independent of the current outcome, so
    /// a left-going execution mispredicts with the stationary mass of the
    /// predict-taken states and vice versa.
    fn edge_costs(&self, ctx: &SplitContext) -> Option<(f64, f64)> {
        let TwoBitModel { base, penalty } = self.model;
        match Self::conditional_taken(ctx) {
            None => Some((base, base)),
            Some(p) => {
                let pi = twobit_stationary(p).expect("clamped probability");
                let predicts_taken = pi[2] + pi[3];
                let predicts_not_taken = pi[0] + pi[1];
                Some((base + penalty * predicts_taken, base + penalty * predicts_not_taken))
            }
        }
    }

    fn label(&self) -> String {
        format!(
            "two-bit counter (base {}, penalty {})",
            self.model.base, self.model.penalty
        )
    }
}

/// A two-bit saturating branch counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturatingCounter(u8);

impl SaturatingCounter {
    /// Weakly not taken.
    pub const INITIAL: SaturatingCounter = SaturatingCounter(1);

    pub fn new(state: u8) -> Self {
        SaturatingCounter(state.min(3))
    }

    pub fn state(self) -> u8 {
        self.0
    }

    pub fn predicts_taken(self) -> bool {
        self.0 >= 2
    }

    /// Records an outcome; returns whether it was mispredicted.
    pub fn update(&mut self, taken: bool) -> bool {
        let miss = taken != self.predicts_taken();
        self.0 = if taken {
            (self.0 + 1).min(3)
        } else {
            self.0.saturating_sub(1)
        };
        miss
    }
}

impl Default for SaturatingCounter {
    fn default() -> Self {
        Self::INITIAL
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfRange(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Transition matrix of the counter, row = from-state.
    fn transition(p: f64) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for (x, row) in t.iter_mut().enumerate() {
            row[(x + 1).min(3)] += p;
            row[x.saturating_sub(1)] += 1.0 - p;
        }
        t
    }

    /// Power iteration from the weakly-not-taken state.
    fn power_iterated_rate(p: f64) -> f64 {
        let t = transition(p);
        let mut v = [0.0, 1.0, 0.0, 0.0];
        for _ in 0..200_000 {
            let mut next = [0.0; 4];
            for x in 0..4 {
                for y in 0..4 {
                    next[y] += v[x] * t[x][y];
                }
            }
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            if delta < 1e-16 {
                break;
            }
        }
        p * (v[0] + v[1]) + (1.0 - p) * (v[2] + v[3])
    }

    fn ctx(left_mass: f64, right_mass: f64) -> SplitContext {
        SplitContext {
            left_mass,
            right_mass,
            lo: 1,
            hi: 2,
            split: 2,
        }
    }

    #[test]
    fn static_method_values() {
        let m = static_methods(StaticCosts::new(3.0, 1.0).unwrap());
        assert!((m[0].cost(&ctx(0.3, 0.7)) - 1.6).abs() < 1e-15);
        assert!((m[1].cost(&ctx(0.3, 0.7)) - 2.4).abs() < 1e-15);
        let sym = static_methods(StaticCosts::new(1.0, 1.0).unwrap());
        assert_eq!(sym[0].cost(&ctx(0.3, 0.7)), sym[1].cost(&ctx(0.3, 0.7)));
        assert_eq!(sym[0].cost(&ctx(0.3, 0.7)), 1.0);
    }

    #[test]
    fn mispredict_rate_examples() {
        assert_eq!(twobit_mispredict_rate(0.0).unwrap(), 0.0);
        assert_eq!(twobit_mispredict_rate(1.0).unwrap(), 0.0);
        assert_eq!(twobit_mispredict_rate(0.5).unwrap(), 0.5);
        assert!((twobit_mispredict_rate(0.8).unwrap() - 20.0 / 85.0).abs() < 1e-15);
        assert!((power_iterated_rate(0.5) - 0.5).abs() < 1e-10);
        assert!((power_iterated_rate(0.8) - 20.0 / 85.0).abs() < 1e-10);
        assert_eq!(twobit_mispredict_rate(1.5), Err(Error::OutOfRange(1.5)));
        assert!(twobit_mispredict_rate(-0.1).is_err());
    }

    #[test]
    fn closed_form_matches_power_iteration() {
        for k in 1..=99 {
            let p = k as f64 / 100.0;
            let closed = twobit_mispredict_rate(p).unwrap();
            assert!((closed - power_iterated_rate(p)).abs() < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn rate_symmetry_and_range() {
        for k in 0..=1000 {
            let p = k as f64 / 1000.0;
            let m = twobit_mispredict_rate(p).unwrap();
            let mirror = twobit_mispredict_rate(1.0 - p).unwrap();
            assert!((m - mirror).abs() < 1e-14);
            assert!((0.0..=0.5).contains(&m));
        }
    }

    #[test]
    fn variance_matches_long_run_batches() {
        assert!((twobit_mispredict_variance(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(twobit_mispredict_variance(0.0).unwrap(), 0.0);

        // Exact variance of the mean of N indicators started from
        // stationarity, by brute-force lag sums over the 8-state chain.
        for p in [0.1, 0.3, 0.8, 0.97] {
            let q = 1.0 - p;
            let pi = twobit_stationary(p).unwrap();
            let mu = twobit_mispredict_rate(p).unwrap();
            let t = transition(p);
            let h = |x: usize| if x < 2 { p } else { q };
            let mut lag_sum = 0.0;
            for (x, &px) in pi.iter().enumerate() {
                for (taken, py) in [(true, p), (false, q)] {
                    let miss = if taken != (x >= 2) { 1.0 } else { 0.0 };
                    let next = if taken { (x + 1).min(3) } else { x.saturating_sub(1) };
                    let mut dist = [0.0; 4];
                    dist[next] = 1.0;
                    for _ in 0..2000 {
                        let e: f64 = (0..4).map(|s| dist[s] * h(s)).sum();
                        lag_sum += px * py * (miss - mu) * (e - mu);
                        let mut nd = [0.0; 4];
                        for a in 0..4 {
                            for b in 0..4 {
                                nd[b] += dist[a] * t[a][b];
                            }
                        }
                        dist = nd;
                    }
                }
            }
            let expected = mu * (1.0 - mu) + 2.0 * lag_sum;
            let got = twobit_mispredict_variance(p).unwrap();
            assert!((got - expected).abs() < 1e-10, "p {p}: {got} vs {expected}");
        }
    }

    #[test]
    fn twobit_method_values() {
        let m = twobit_method(TwoBitModel::new(1.0, 10.0).unwrap());
        assert_eq!(m.cost(&ctx(0.5, 0.5)), 6.0);
        assert_eq!(m.cost(&ctx(1.0, 0.0)), 1.0);
        assert_eq!(m.cost(&ctx(0.0, 0.0)), 0.0);
        assert!((m.cost(&ctx(0.2, 0.6)) - m.cost(&ctx(0.6, 0.2))).abs() < 1e-14);
        let flat = twobit_method(TwoBitModel::new(2.0, 0.0).unwrap());
        assert!((flat.cost(&ctx(0.3, 0.4)) - 1.4).abs() < 1e-14);
    }

    #[test]
    fn twobit_edges_decompose_cost() {
        let m = twobit_method(TwoBitModel::new(1.5, 12.0).unwrap());
        for (a, b) in [(0.1, 0.3), (0.5, 0.01), (0.25, 0.25), (0.7, 0.0)] {
            let c = ctx(a, b);
            let (l, r) = m.edge_costs(&c).unwrap();
            assert!((a * l + b * r - m.cost(&c)).abs() < 1e-14);
        }
    }

    #[test]
    fn model_validation() {
        assert!(TwoBitModel::new(0.0, 1.0).is_err());
        assert!(TwoBitModel::new(1.0, -1.0).is_err());
        assert!(TwoBitModel::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn counter_saturates() {
        let mut c = SaturatingCounter::default();
        assert_eq!(c.state(), 1);
        assert!(c.update(true)); // predicted not taken
        assert!(!c.update(true));
        assert!(!c.update(true));
        assert_eq!(c.state(), 3);
        assert!(c.update(false));
        assert_eq!(c.state(), 2);
        assert_eq!(SaturatingCounter::new(9).state(), 3);
    }
}
