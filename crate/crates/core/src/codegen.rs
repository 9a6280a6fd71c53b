//! Source emitters for decision trees.
//!
//! A node splitting at `s` compares the key with cutoff `v_{s-1}` (the
//! boundary between items `s-1` and `s`); keys at or above it belong to the
//! right subtree. The predicted edge is always laid out as the fall-through
//! path, so the emitted branch instruction is the one expected not to be
//! taken. Which opcode polarity a given CPU predicts is platform-specific;
//! the pseudo-assembly annotates every branch instead.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tree::{DecisionTree, Side};

/// Nested if/else in C syntax, two-space indented, one statement per leaf.
///
/// `labels[i]` is the statement for item `i + 1`; a `;` is appended.
pub fn emit_c<S: AsRef<str>>(tree: &DecisionTree, cutoffs: &[f64], labels: &[S], key_name: &str) -> Result<String> {
    check_inputs(tree, cutoffs, labels)?;
    let mut out = String::new();
    c_block(tree, cutoffs, labels, key_name, 0, &mut out);
    Ok(out)
}

fn c_block<S: AsRef<str>>(t: &DecisionTree, cutoffs: &[f64], labels: &[S], key: &str, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match t {
        DecisionTree::Leaf { item } => {
            let _ = writeln!(out, "{pad}{};", labels[item - 1].as_ref());
        }
        DecisionTree::Node { split, left, right, .. } => {
            let cut = cutoffs[split - 2];
            let (test, then, otherwise) = match fall_through(t) {
                Side::Right => (format!("{key} >= {cut}"), right, left),
                Side::Left => (format!("{key} < {cut}"), left, right),
            };
            let _ = writeln!(out, "{pad}if ({test})");
            c_block(then, cutoffs, labels, key, depth + 1, out);
            let _ = writeln!(out, "{pad}else");
            c_block(otherwise, cutoffs, labels, key, depth + 1, out);
        }
    }
}

/// Lettered compare/branch/assign/goto listing ending in `end`.
///
/// A tree with `k` internal nodes over `n` items yields `2k + 2n` lines.
pub fn emit_pseudo_asm<S: AsRef<str>>(
    tree: &DecisionTree,
    cutoffs: &[f64],
    labels: &[S],
    key_name: &str,
) -> Result<String> {
    check_inputs(tree, cutoffs, labels)?;

    let mut code = Vec::new();
    layout(tree, cutoffs, &mut code, &mut 0);
    if let Some(Asm::Goto) = code.last() {
        code.pop();
    }
    code.push(Asm::End);

    // Resolve block ids to line positions.
    let mut block_at = vec![0usize; tree.internal_count()];
    for (pos, ins) in code.iter().enumerate() {
        if let Asm::Block(id) = ins {
            block_at[*id] = pos;
        }
    }
    let mut lines: Vec<&Asm> = Vec::new();
    let mut line_of = vec![0usize; code.len()];
    for (pos, ins) in code.iter().enumerate() {
        line_of[pos] = lines.len();
        if !matches!(ins, Asm::Block(_)) {
            lines.push(ins);
        }
    }
    let end_letter = letter(lines.len() - 1);

    let mut out = String::new();
    for (k, ins) in lines.iter().enumerate() {
        let tag = letter(k);
        let _ = match ins {
            Asm::Compare(c) => writeln!(out, "{tag}. compare {key_name}, {c}"),
            Asm::Branch { to, op, cut, note } => writeln!(
                out,
                "{tag}. branch to {} if {key_name}{op}{cut}  ; {note}",
                letter(line_of[block_at[*to]])
            ),
            Asm::Assign(item) => writeln!(out, "{tag}. {}", labels[item - 1].as_ref()),
            Asm::Goto => writeln!(out, "{tag}. go to {end_letter}"),
            Asm::End => writeln!(out, "{tag}. end"),
            Asm::Block(_) => unreachable!(),
        };
    }
    Ok(out)
}

enum Asm {
    Compare(f64),
    Branch {
        to: usize,
        op: &'static str,
        cut: f64,
        note: &'static str,
    },
    Assign(usize),
    Goto,
    End,
    /// Marks where a branch target starts; emits nothing.
    Block(usize),
}

fn layout(t: &DecisionTree, cutoffs: &[f64], code: &mut Vec<Asm>, blocks: &mut usize) {
    match t {
        DecisionTree::Leaf { item } => {
            code.push(Asm::Assign(*item));
            code.push(Asm::Goto);
        }
        DecisionTree::Node {
            split,
            left,
            right,
            edge_costs,
            ..
        } => {
            let cut = cutoffs[split - 2];
            let (op, near, far) = match fall_through(t) {
                Side::Right => ("<", right, left),
                Side::Left => (">=", left, right),
            };
            let note = match edge_costs {
                None => "no bias recorded",
                Some([l, r]) if l == r => "unbiased",
                Some(_) => "predicted not taken",
            };
            let id = *blocks;
            *blocks += 1;
            code.push(Asm::Compare(cut));
            code.push(Asm::Branch { to: id, op, cut, note });
            layout(near, cutoffs, code, blocks);
            code.push(Asm::Block(id));
            layout(far, cutoffs, code, blocks);
        }
    }
}

/// Graphviz digraph; edges carry their cost and prediction tag, with
/// `minlen` scaled so drawn depth follows path cost.
pub fn emit_dot(tree: &DecisionTree) -> String {
    let subs = tree.subtrees();
    let mut out = String::from("digraph decision_tree {\n  node [fontname=\"monospace\"];\n");
    for sub in &subs {
        let id = sub.index;
        match sub.tree {
            DecisionTree::Leaf { item } => {
                let _ = writeln!(out, "  n{id} [shape=ellipse, label=\"{item}\"];");
            }
            DecisionTree::Node {
                split,
                edge_costs,
                left,
                ..
            } => {
                let _ = writeln!(out, "  n{id} [shape=box, label=\"split {split}\"];");
                let left_id = id + 1;
                let right_id = id + 1 + subtree_size(left);
                let predicted = sub.tree.predicted_side();
                for (side, child) in [(Side::Left, left_id), (Side::Right, right_id)] {
                    let attrs = match edge_costs {
                        Some([l, r]) => {
                            let cost = if side == Side::Left { *l } else { *r };
                            let tag = if l == r {
                                "unbiased"
                            } else if predicted == Some(side) {
                                "predicted"
                            } else {
                                "mispredicted"
                            };
                            format!("label=\"{cost} ({tag})\", minlen={}", cost.round().max(1.0))
                        }
                        None => format!("label=\"{}\"", if side == Side::Left { "<" } else { ">=" }),
                    };
                    let _ = writeln!(out, "  n{id} -> n{child} [{attrs}];");
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

fn subtree_size(t: &DecisionTree) -> usize {
    2 * t.leaf_count() - 1
}

fn fall_through(t: &DecisionTree) -> Side {
    t.predicted_side().unwrap_or(Side::Right)
}

/// Spreadsheet-style line letters: A..Z, AA, AB, ...
fn letter(mut k: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'A' + (k % 26) as u8);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

fn check_inputs<S>(tree: &DecisionTree, cutoffs: &[f64], labels: &[S]) -> Result<()> {
    let n = tree.leaf_count();
    if labels.len() != n {
        return Err(Error::LabelCountMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if cutoffs.len() != n - 1 {
        return Err(Error::CutoffCountMismatch {
            expected: n - 1,
            found: cutoffs.len(),
        });
    }
    if let Some(k) = cutoffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::UnsortedCutoffs(k + 1));
    }
    if let Some(k) = cutoffs.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCutoffs(k + 2));
    }
    tree.validate(n)
}
