//! `branchtree`: optimize, inspect and simulate branch-cost decision trees.
//!
//! Exit status: 0 on success, 2 for usage, file or input validation errors,
//! 3 when an internal consistency check fails.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use branchtree::oracle::DEFAULT_MAX_N;
use branchtree::simulate::DEFAULT_WARMUP;
use branchtree::{
    brute_force_optimal, cost_bounds, emit_c, emit_dot, emit_pseudo_asm, evaluate_tree, huffman_length_distribution,
    optimize_general, optimize_ordered, optimize_static, optimize_uniform, simulate_static, simulate_twobit, solve_d,
    static_methods, twobit_method, zipf_weights, CostModel, DecisionTree, Distribution, OptimizeResult, SplitMethod,
    StaticCosts, TwoBitModel,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "branchtree",
    version,
    about = "Minimum expected-cost decision trees for branch-predicting CPUs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the optimal tree for a distribution.
    Optimize(OptimizeArgs),
    /// Entropy bounds and the characteristic root for a cost pair.
    Bounds(BoundsArgs),
    /// Huffman codeword-length distribution, usable as a weights file.
    HuffmanLengths(HuffmanArgs),
    /// Monte-Carlo replay of a tree.
    Simulate(SimulateArgs),
    /// Expected cost of a given tree under a model.
    Evaluate(EvaluateArgs),
    /// Static optimum against the ordered-edge and comparison-count trees.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Model {
    Static,
    Ordered,
    Uniform,
    Twobit,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EvalModel {
    /// Each node's stored edge costs.
    Recorded,
    Static,
    Ordered,
    Uniform,
    Twobit,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SimModel {
    Static,
    Twobit,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Emit {
    Report,
    C,
    Asm,
    Dot,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DistKind {
    Zipf,
}

#[derive(Args)]
struct WeightsArg {
    /// JSON file: {"weights": [...], "labels": [...], "cutoffs": [...]}.
    #[arg(long)]
    weights: PathBuf,
    /// Admit zero weights.
    #[arg(long)]
    allow_zero: bool,
}

#[derive(Args, Clone)]
struct CostArgs {
    /// Static: mispredicted,predicted in either order. Ordered: left,right.
    #[arg(long, value_parser = parse_pair, default_value = "3,1")]
    costs: (f64, f64),
    /// Two-bit model: cycles per branch.
    #[arg(long, default_value_t = 1.0)]
    base: f64,
    /// Two-bit model: extra cycles per misprediction.
    #[arg(long, default_value_t = 10.0)]
    penalty: f64,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    input: WeightsArg,
    #[arg(long, value_enum, default_value = "static")]
    model: Model,
    #[command(flatten)]
    costs: CostArgs,
    #[arg(long, value_enum, default_value = "report")]
    emit: Emit,
    /// Comma-separated statements for items 1..n; overrides the file.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    /// Comma-separated ascending cutoffs v_1..v_{n-1}; overrides the file.
    /// Defaults to 2..n, so key i selects item i.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    cutoffs: Option<Vec<f64>>,
    /// Key variable name in emitted code.
    #[arg(long, default_value = "V")]
    key: String,
    /// Result variable for default labels `R = i`.
    #[arg(long, default_value = "P")]
    result: String,
    /// Check the result against exhaustive search (n <= 12).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_parser = parse_pair, default_value = "3,1")]
    costs: (f64, f64),
    /// Also report entropy bounds for this distribution.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    allow_zero: bool,
}

#[derive(Args)]
struct HuffmanArgs {
    #[arg(long, value_enum, default_value = "zipf")]
    dist: DistKind,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Tree JSON, or an optimize report containing "tree".
    #[arg(long)]
    tree: PathBuf,
    #[command(flatten)]
    input: WeightsArg,
    #[arg(long, value_enum, default_value = "static")]
    model: SimModel,
    #[command(flatten)]
    costs: CostArgs,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Two-bit model: unmeasured training draws.
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    warmup: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    tree: PathBuf,
    #[command(flatten)]
    input: WeightsArg,
    #[arg(long, value_enum, default_value = "recorded")]
    model: EvalModel,
    #[command(flatten)]
    costs: CostArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: WeightsArg,
    /// mispredicted,predicted (taken,untaken) cycles.
    #[arg(long, value_parser = parse_pair, default_value = "3,1")]
    costs: (f64, f64),
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

enum CliError {
    /// Bad input; exit 2.
    Input(String),
    /// Internal consistency check failed; exit 3.
    Invariant(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<branchtree::Error> for CliError {
    fn from(e: branchtree::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Deserialize)]
struct WeightsFile {
    weights: Vec<f64>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    cutoffs: Option<Vec<f64>>,
}

struct Input {
    dist: Distribution,
    labels: Option<Vec<String>>,
    cutoffs: Option<Vec<f64>>,
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_weights(arg: &WeightsArg) -> CliResult<Input> {
    load_weights_from(&arg.weights, arg.allow_zero)
}

fn load_weights_from(path: &Path, allow_zero: bool) -> CliResult<Input> {
    let value = read_json(path)?;
    let file: WeightsFile =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let dist = Distribution::build(&file.weights, allow_zero)
        .map_err(|e| CliError::Input(format!("{}: field `weights`: {e}", path.display())))?;
    let n = dist.len();
    if let Some(labels) = &file.labels {
        if labels.len() != n {
            return Err(CliError::Input(format!(
                "{}: field `labels`: expected {n} entries, got {}",
                path.display(),
                labels.len()
            )));
        }
    }
    if let Some(cutoffs) = &file.cutoffs {
        if cutoffs.len() + 1 != n {
            return Err(CliError::Input(format!(
                "{}: field `cutoffs`: expected {} entries, got {}",
                path.display(),
                n - 1,
                cutoffs.len()
            )));
        }
        if let Some(k) = cutoffs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(CliError::Input(format!(
                "{}: field `cutoffs`: not strictly ascending at position {}",
                path.display(),
                k + 2
            )));
        }
    }
    Ok(Input {
        dist,
        labels: file.labels,
        cutoffs: file.cutoffs,
    })
}

fn load_tree(path: &Path) -> CliResult<DecisionTree> {
    let mut value = read_json(path)?;
    if let Some(inner) = value.get_mut("tree") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: not a decision tree: {e}", path.display())))
}

fn static_costs((a, b): (f64, f64)) -> CliResult<StaticCosts> {
    StaticCosts::new(a, b).map_err(|e| CliError::Input(format!("--costs: {e}")))
}

fn twobit(c: &CostArgs) -> CliResult<TwoBitModel> {
    TwoBitModel::new(c.base, c.penalty).map_err(|e| CliError::Input(format!("--base/--penalty: {e}")))
}

fn check_ordered((l, r): (f64, f64)) -> CliResult<()> {
    if [l, r].iter().all(|c| c.is_finite() && *c > 0.0) {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "--costs: costs must be finite and positive (got {l},{r})"
        )))
    }
}

/// Method list equivalent to `model`, for the oracle and node pricing.
fn methods_for(model: Model, c: &CostArgs) -> CliResult<Vec<SplitMethod>> {
    Ok(match model {
        Model::Static => static_methods(static_costs(c.costs)?),
        Model::Ordered => vec![SplitMethod::edges(c.costs.0, c.costs.1)],
        Model::Uniform => vec![SplitMethod::edges(1.0, 1.0)],
        Model::Twobit => vec![twobit_method(twobit(c)?)],
    })
}

fn optimize_with(model: Model, dist: &Distribution, c: &CostArgs) -> CliResult<OptimizeResult> {
    Ok(match model {
        Model::Static => optimize_static(dist, static_costs(c.costs)?)?,
        Model::Ordered => {
            check_ordered(c.costs)?;
            optimize_ordered(dist, c.costs.0, c.costs.1)?
        }
        Model::Uniform => optimize_uniform(dist)?,
        Model::Twobit => optimize_general(dist, &methods_for(model, c)?)?,
    })
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn cmd_optimize(args: &OptimizeArgs) -> CliResult<()> {
    let input = load_weights(&args.input)?;
    let dist = &input.dist;
    let n = dist.len();
    if args.oracle && n > DEFAULT_MAX_N {
        return Err(CliError::Input(format!(
            "--oracle supports n <= {DEFAULT_MAX_N}, got n = {n}"
        )));
    }
    let result = optimize_with(args.model, dist, &args.costs)?;

    let methods = methods_for(args.model, &args.costs)?;
    let repriced = evaluate_tree(&result.tree, dist, CostModel::Methods(&methods))?;
    if !close(repriced, result.expected_cost) {
        return Err(CliError::Invariant(format!(
            "tree reprices to {repriced}, optimizer reported {}",
            result.expected_cost
        )));
    }
    let oracle = if args.oracle {
        let cost = brute_force_optimal(dist, &methods, DEFAULT_MAX_N)?;
        if !close(cost, result.expected_cost) {
            return Err(CliError::Invariant(format!(
                "optimizer found {}, exhaustive search found {cost}",
                result.expected_cost
            )));
        }
        Some(cost)
    } else {
        None
    };

    match args.emit {
        Emit::Report => {
            let mut report = json!({
                "n": n,
                "model": result.model,
                "expected_cost": result.expected_cost,
                "tree": result.tree,
            });
            if args.model == Model::Static {
                report["bounds"] = json!(cost_bounds(dist, static_costs(args.costs.costs)?));
            }
            if let Some(cost) = oracle {
                report["oracle"] = json!({ "expected_cost": cost, "agrees": true });
            }
            print_json(&report);
        }
        Emit::Dot => emit(&emit_dot(&result.tree)),
        Emit::C | Emit::Asm => {
            let labels = args
                .labels
                .clone()
                .or(input.labels)
                .unwrap_or_else(|| (1..=n).map(|i| format!("{} = {i}", args.result)).collect());
            let cutoffs = args
                .cutoffs
                .clone()
                .or(input.cutoffs)
                .unwrap_or_else(|| (2..=n).map(|i| i as f64).collect());
            if labels.len() != n {
                return Err(CliError::Input(format!(
                    "--labels: expected {n} entries, got {}",
                    labels.len()
                )));
            }
            if cutoffs.len() + 1 != n {
                return Err(CliError::Input(format!(
                    "--cutoffs: expected {} entries, got {}",
                    n - 1,
                    cutoffs.len()
                )));
            }
            let code = if args.emit == Emit::C {
                emit_c(&result.tree, &cutoffs, &labels, &args.key)?
            } else {
                emit_pseudo_asm(&result.tree, &cutoffs, &labels, &args.key)?
            };
            emit(&code);
        }
    }
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> CliResult<()> {
    let costs = static_costs(args.costs)?;
    let (x, d) = solve_d(costs);
    let mut report = json!({
        "mispredicted": costs.mispredicted(),
        "predicted": costs.predicted(),
        "rho": costs.ratio(),
        "x": x,
        "d": d,
        "inverse_d": 1.0 / d,
        "upper_slack": 1.0 / d + costs.mispredicted(),
    });
    if let Some(path) = &args.weights {
        let input = load_weights_from(path, args.allow_zero)?;
        let b = cost_bounds(&input.dist, costs);
        report["entropy"] = json!(b.entropy);
        report["lower"] = json!(b.lower);
        report["upper"] = json!(b.upper);
    }
    print_json(&report);
    Ok(())
}

fn cmd_huffman(args: &HuffmanArgs) -> CliResult<()> {
    let dist = match args.dist {
        DistKind::Zipf => zipf_weights(args.n).map_err(|e| CliError::Input(format!("--n: {e}")))?,
    };
    let ld = huffman_length_distribution(&dist);
    let weights: Vec<f64> = ld.rows.iter().map(|r| r.prob).collect();
    let labels: Vec<String> = ld.rows.iter().map(|r| format!("L = {}", r.length)).collect();
    print_json(&json!({
        "source_n": ld.source_n,
        "rows": ld.rows,
        "total_count": ld.rows.iter().map(|r| r.count).sum::<u64>(),
        "kraft_sum": ld.kraft_sum(),
        "expected_length": ld.expected_length(),
        "weights": weights,
        "labels": labels,
    }));
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let input = load_weights(&args.input)?;
    let tree = load_tree(&args.tree)?;
    let dist = &input.dist;
    let (report, analytic) = match args.model {
        SimModel::Static => {
            let costs = static_costs(args.costs.costs)?;
            let analytic = evaluate_tree(&tree, dist, CostModel::Static(costs))?;
            (simulate_static(&tree, dist, costs, args.samples, args.seed)?, analytic)
        }
        SimModel::Twobit => {
            let model = twobit(&args.costs)?;
            let analytic = twobit_analytic(&tree, dist, model)?;
            (
                simulate_twobit(&tree, dist, model, args.samples, args.seed, args.warmup)?,
                analytic,
            )
        }
    };
    let z = if report.std_error > 0.0 {
        (report.mean_cycles - analytic) / report.std_error
    } else {
        0.0
    };
    let mut out = json!(report);
    out["analytic_cost"] = json!(analytic);
    out["z_score"] = json!(z);
    out["seed"] = json!(args.seed);
    print_json(&out);
    Ok(())
}

/// Stationary expected cost with every node priced by the two-bit method.
fn twobit_analytic(tree: &DecisionTree, dist: &Distribution, model: TwoBitModel) -> CliResult<f64> {
    let methods = [twobit_method(model)];
    Ok(evaluate_tree(
        &relabel_methods(tree),
        dist,
        CostModel::Methods(&methods),
    )?)
}

fn relabel_methods(tree: &DecisionTree) -> DecisionTree {
    match tree {
        DecisionTree::Leaf { item } => DecisionTree::leaf(*item),
        DecisionTree::Node { split, left, right, .. } => {
            DecisionTree::node(*split, 1, None, relabel_methods(left), relabel_methods(right))
        }
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let input = load_weights(&args.input)?;
    let tree = load_tree(&args.tree)?;
    let dist = &input.dist;
    let cost = match args.model {
        EvalModel::Recorded => evaluate_tree(&tree, dist, CostModel::Recorded)?,
        EvalModel::Static => evaluate_tree(&tree, dist, CostModel::Static(static_costs(args.costs.costs)?))?,
        EvalModel::Ordered => {
            check_ordered(args.costs.costs)?;
            let (l, r) = args.costs.costs;
            evaluate_tree(&tree.with_ordered_edges(l, r), dist, CostModel::Recorded)?
        }
        EvalModel::Uniform => evaluate_tree(&tree.with_ordered_edges(1.0, 1.0), dist, CostModel::Recorded)?,
        EvalModel::Twobit => twobit_analytic(&tree, dist, twobit(&args.costs)?)?,
    };
    print_json(&json!({ "n": dist.len(), "expected_cost": cost }));
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> CliResult<()> {
    let input = load_weights(&args.input)?;
    let dist = &input.dist;
    let costs = static_costs(args.costs)?;
    let (c0, c1) = (costs.mispredicted(), costs.predicted());

    let best = optimize_static(dist, costs)?;
    let left_mispredicted = optimize_ordered(dist, c0, c1)?.expected_cost;
    let right_mispredicted = optimize_ordered(dist, c1, c0)?.expected_cost;
    let uniform = optimize_uniform(dist)?;
    let uniform_left = evaluate_tree(&uniform.tree.with_ordered_edges(c0, c1), dist, CostModel::Recorded)?;
    let uniform_right = evaluate_tree(&uniform.tree.with_ordered_edges(c1, c0), dist, CostModel::Recorded)?;

    let s = best.expected_cost;
    if s > left_mispredicted.min(right_mispredicted) * (1.0 + 1e-12) {
        return Err(CliError::Invariant(format!(
            "static optimum {s} exceeds an ordered-edge optimum"
        )));
    }
    let gain = |other: f64| 1.0 - s / other;
    print_json(&json!({
        "n": dist.len(),
        "mispredicted": c0,
        "predicted": c1,
        "static": s,
        "ordered_left_mispredicted": left_mispredicted,
        "ordered_right_mispredicted": right_mispredicted,
        "comparison_optimal": {
            "expected_comparisons": uniform.expected_cost,
            "left_mispredicted": uniform_left,
            "right_mispredicted": uniform_right,
        },
        "improvement": {
            "vs_ordered_left_mispredicted": gain(left_mispredicted),
            "vs_ordered_right_mispredicted": gain(right_mispredicted),
            "vs_comparison_optimal_left_mispredicted": gain(uniform_left),
            "vs_comparison_optimal_right_mispredicted": gain(uniform_right),
        },
        "tree": best.tree,
    }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Optimize(a) => cmd_optimize(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::HuffmanLengths(a) => cmd_huffman(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Input(_) => 2,
                CliError::Invariant(_) => 3,
            })
        }
    }
}
