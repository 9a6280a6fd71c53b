//! Helpers shared by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::HashMap;

use branchtree::{DecisionTree, Distribution, DpTable, StaticCosts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub dist: Distribution,
    pub costs: StaticCosts,
}

/// n in [1, 8], weights in (0, 1], predicted cost in [0.5, 4], ratio in [1, 16].
pub fn random_instances(count: usize, seed: u64) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(1..=8);
            let weights: Vec<f64> = (0..n).map(|_| 1.0 - r.gen::<f64>()).collect();
            let c1 = r.gen_range(0.5..4.0);
            let ratio = r.gen_range(1.0..=16.0);
            Instance {
                dist: Distribution::new(&weights).unwrap(),
                costs: StaticCosts::new(c1 * ratio, c1).unwrap(),
            }
        })
        .collect()
}

/// Uniformly random split points; each node's bias is picked at random,
/// with an occasional unbiased node.
pub fn random_tree(r: &mut impl Rng, lo: usize, hi: usize, c0: f64, c1: f64) -> DecisionTree {
    if lo == hi {
        return DecisionTree::leaf(lo);
    }
    let split = r.gen_range(lo + 1..=hi);
    let edges = match r.gen_range(0..10) {
        0 => (c1, c1),
        1..=5 => (c0, c1),
        _ => (c1, c0),
    };
    let left = random_tree(r, lo, split - 1, c0, c1);
    let right = random_tree(r, split, hi, c0, c1);
    DecisionTree::node(split, 1, Some(edges), left, right)
}

/// Strictly ascending integer cutoffs, possibly negative.
pub fn random_cutoffs(r: &mut impl Rng, count: usize) -> Vec<f64> {
    let mut v: i64 = r.gen_range(-50..50);
    (0..count)
        .map(|_| {
            v += r.gen_range(1..20);
            v as f64
        })
        .collect()
}

/// Keys that fall in the region of item `i` (1-based): both exact
/// boundaries where they exist, plus interior and far-away points.
pub fn region_keys(cutoffs: &[f64], i: usize) -> Vec<f64> {
    let n = cutoffs.len() + 1;
    let lo = (i > 1).then(|| cutoffs[i - 2]);
    let hi = (i < n).then(|| cutoffs[i - 1]);
    let mut keys = Vec::new();
    match (lo, hi) {
        (Some(a), Some(b)) => {
            keys.push(a);
            keys.push(b - 1.0);
            keys.push((a + b) / 2.0);
            keys.push(b - 0.25);
        }
        (Some(a), None) => keys.extend([a, a + 0.5, a + 1e6]),
        (None, Some(b)) => keys.extend([b - 1.0, b - 0.25, b - 1e6]),
        (None, None) => keys.extend([0.0, -1e9, 1e9]),
    }
    keys
}

/// The statements from `emit_c` output, parsed back into a tree.
#[derive(Debug)]
pub enum CStmt {
    If {
        key: String,
        ge: bool,
        cut: f64,
        then: Box<CStmt>,
        otherwise: Box<CStmt>,
    },
    Leaf(String),
}

pub fn parse_c(src: &str) -> CStmt {
    let lines: Vec<&str> = src.lines().collect();
    let mut pos = 0;
    let stmt = parse_stmt(&lines, &mut pos, 0);
    assert_eq!(pos, lines.len(), "trailing lines in C output");
    stmt
}

fn parse_stmt(lines: &[&str], pos: &mut usize, depth: usize) -> CStmt {
    let line = lines[*pos];
    let pad = "  ".repeat(depth);
    let body = line
        .strip_prefix(&pad)
        .unwrap_or_else(|| panic!("bad indent at line {}: {line:?}", *pos + 1));
    assert!(!body.starts_with(' '), "over-indented line {}: {line:?}", *pos + 1);
    *pos += 1;
    if let Some(cond) = body.strip_prefix("if (").and_then(|s| s.strip_suffix(')')) {
        let (key, ge, cut) = if let Some((k, c)) = cond.split_once(" >= ") {
            (k, true, c)
        } else if let Some((k, c)) = cond.split_once(" < ") {
            (k, false, c)
        } else {
            panic!("unknown condition {cond:?}");
        };
        let then = parse_stmt(lines, pos, depth + 1);
        assert_eq!(lines[*pos], format!("{pad}else"), "missing else at line {}", *pos + 1);
        *pos += 1;
        let otherwise = parse_stmt(lines, pos, depth + 1);
        CStmt::If {
            key: key.to_string(),
            ge,
            cut: cut.parse().unwrap(),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    } else {
        CStmt::Leaf(body.strip_suffix(';').expect("statement ends in ;").to_string())
    }
}

pub fn run_c(stmt: &CStmt, key_name: &str, key: f64) -> String {
    match stmt {
        CStmt::Leaf(s) => s.clone(),
        CStmt::If {
            key: k,
            ge,
            cut,
            then,
            otherwise,
        } => {
            assert_eq!(k, key_name);
            let holds = if *ge { key >= *cut } else { key < *cut };
            run_c(if holds { then } else { otherwise }, key_name, key)
        }
    }
}

/// Executes a pseudo-assembly listing for one key. A taken branch costs
/// `taken`, a fall-through `fall`. Returns the assigned label and cycles.
pub fn run_asm(listing: &str, key_name: &str, key: f64, taken: f64, fall: f64) -> (String, f64) {
    let mut tags = HashMap::new();
    let mut body = Vec::new();
    for (k, line) in listing.lines().enumerate() {
        let (tag, rest) = line.split_once(". ").expect("lettered line");
        tags.insert(tag.to_string(), k);
        body.push(rest);
    }
    let mut pc = 0;
    let mut label = None;
    let mut cycles = 0.0;
    let mut steps = 0;
    loop {
        steps += 1;
        assert!(steps < 10_000, "runaway listing");
        let ins = body[pc];
        if ins == "end" {
            break;
        } else if ins.starts_with("compare ") {
            pc += 1;
        } else if let Some(rest) = ins.strip_prefix("branch to ") {
            let (target, rest) = rest.split_once(" if ").unwrap();
            let cond = rest.split("  ;").next().unwrap();
            let cond = cond.strip_prefix(key_name).expect("key name");
            let holds = if let Some(c) = cond.strip_prefix(">=") {
                key >= c.parse::<f64>().unwrap()
            } else if let Some(c) = cond.strip_prefix('<') {
                key < c.parse::<f64>().unwrap()
            } else {
                panic!("unknown branch condition {cond:?}")
            };
            if holds {
                cycles += taken;
                pc = tags[target];
            } else {
                cycles += fall;
                pc += 1;
            }
        } else if let Some(target) = ins.strip_prefix("go to ") {
            pc = tags[target];
        } else {
            assert!(label.is_none(), "two assignments on one path");
            label = Some(ins.to_string());
            pc += 1;
        }
    }
    (label.expect("path assigns a label"), cycles)
}

/// Every root split point attaining the optimum recorded in `table`, found
/// by re-pricing each candidate with the static split costs.
pub fn optimal_root_splits(table: &DpTable, dist: &Distribution, costs: StaticCosts) -> Vec<usize> {
    let n = dist.len();
    if n == 1 {
        return Vec::new();
    }
    let (c0, c1) = (costs.mispredicted(), costs.predicted());
    let prices: Vec<(usize, f64)> = (2..=n)
        .map(|s| {
            let left = dist.interval_prob(1, s - 1).unwrap();
            let right = dist.interval_prob(s, n).unwrap();
            let node = (c0 * left + c1 * right).min(c1 * left + c0 * right);
            (s, node + table.cost(1, s - 1) + table.cost(s, n))
        })
        .collect();
    let best = prices.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    prices
        .into_iter()
        .filter(|&(_, v)| v <= best * (1.0 + 1e-9))
        .map(|(s, _)| s)
        .collect()
}

/// Keeps the first item of each item's region as its representative key.
pub fn representative_key(cutoffs: &[f64], item: usize) -> f64 {
    region_keys(cutoffs, item)[0]
}

pub fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("P = {i}")).collect()
}
