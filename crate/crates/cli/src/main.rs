//! `polarq`: kernel analysis, channel metrics, transforms, polarization
//! experiments and code simulation from the command line.
//!
//! Exit status: 0 on success, 2 on invalid arguments or inputs, 1 when a
//! computation fails (for example an exceeded enumeration budget).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use polarq::codec::{simulate, CodeSpec};
use polarq::io::{parse_frozen_json, ChannelSpec, KernelSpec};
use polarq::kernel::{normalized_form, polarizes_corollary_primitive, polarizes_theorem_prime};
use polarq::polarize::{enumerate_tree, sample_trajectories, DEFAULT_QUANTIZE};
use polarq::transform::subchannels;
use polarq::{Budgets, Channel, Kernel};

const BUDGET_ENV: &str = "POLARQ_BUDGET";

#[derive(Parser)]
#[command(name = "polarq", version, about = "Channel polarization over finite alphabets")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel analysis.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Channel metrics.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Metrics of the one-step synthetic channels W^(0..ℓ-1).
    Transform(TransformArgs),
    /// Polarization statistics at depth n.
    Polarize(PolarizeArgs),
    /// Monte-Carlo simulation of a polar code with successive-cancellation decoding.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Partial distances and exponent.
    Exponent(KernelArgs),
    /// Linearity, normal form and polarization conditions.
    Check(KernelArgs),
    /// Full distance profile, including per-pair distances for non-linear kernels.
    Distances(DistanceArgs),
}

#[derive(Subcommand)]
enum ChannelCommand {
    /// Capacity, Bhattacharyya parameters, error probability and their bounds.
    Stats(ChannelArgs),
}

#[derive(Args)]
struct KernelArgs {
    /// rs:<q>[:gamma=<int>], arikan, matrix:<path> or map:<path>.
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Use brute-force enumeration even for linear kernels.
    #[arg(long)]
    brute: bool,
}

#[derive(Args)]
struct ChannelArgs {
    /// qec:<q>:<eps>, qsc:<q>:<p> or file:<path>.
    #[arg(long)]
    channel: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    channel: String,
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct PolarizeArgs {
    #[arg(long)]
    channel: String,
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    depth: usize,
    /// Output budget K applied between levels.
    #[arg(long, default_value_t = DEFAULT_QUANTIZE)]
    quantize: usize,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Comma-separated exponents β for the speed fractions.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
    beta: Vec<f64>,
    /// Sample this many random paths instead of enumerating the tree.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON summary; stderr when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    channel: String,
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    depth: usize,
    /// Code rate; the information set is chosen by smallest Bhattacharyya parameter.
    #[arg(long, conflicts_with = "frozen_file", required_unless_present = "frozen_file")]
    rate: Option<f64>,
    #[arg(long)]
    frozen_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Feed true symbols back after every decision and decide every index.
    #[arg(long)]
    genie: bool,
    #[arg(long, default_value_t = DEFAULT_QUANTIZE)]
    quantize: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Compute(polarq::Error),
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T: std::fmt::Display>(e: T) -> Failure {
    Failure::Usage(e.to_string())
}

fn compute(e: polarq::Error) -> Failure {
    Failure::Compute(e)
}

fn channel_arg(spec: &str) -> Outcome<Channel> {
    let spec: ChannelSpec = spec.parse().map_err(|e| usage(format!("--channel: {e}")))?;
    spec.build().map_err(|e| usage(format!("--channel: {e}")))
}

fn kernel_arg(spec: &str) -> Outcome<Kernel> {
    let spec: KernelSpec = spec.parse().map_err(|e| usage(format!("--kernel: {e}")))?;
    spec.build().map_err(|e| usage(format!("--kernel: {e}")))
}

fn budgets() -> Outcome<Budgets> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => Budgets::parse(&v).map_err(|e| usage(format!("{BUDGET_ENV}: {e}"))),
        Err(_) => Ok(Budgets::default()),
    }
}

fn check_alphabets(w: &Channel, k: &Kernel) -> Outcome<()> {
    if w.input_size() != k.alphabet_size() {
        return Err(usage(format!(
            "channel alphabet {} does not match kernel alphabet {}",
            w.input_size(),
            k.alphabet_size()
        )));
    }
    Ok(())
}

fn check_quantize(w: &Channel, k: usize) -> Outcome<()> {
    if k < w.input_size() {
        return Err(usage(format!("--quantize must be at least q = {}", w.input_size())));
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Compute(polarq::Error::Io(format!("{}: {e}", path.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    emit(out, &text)
}

fn channel_metrics(w: &Channel) -> Value {
    let bounds = w.bound_report();
    json!({
        "q": w.input_size(),
        "outputs": w.output_size(),
        "I": w.symmetric_capacity(),
        "Z": w.bhattacharyya(),
        "z_max": w.z_max(),
        "z_min": w.z_min(),
        "p_e": w.error_prob(),
        "p_ml": w.ml_error_prob(),
        "bounds": bounds,
        "bounds_hold": bounds.holds(1e-12),
    })
}

fn kernel_exponent(args: &KernelArgs) -> Outcome<()> {
    let k = kernel_arg(&args.kernel)?;
    let b = budgets()?;
    let p = k.distance_profile(&b).map_err(compute)?;
    emit_json(
        &args.out,
        &json!({
            "q": k.alphabet_size(),
            "ell": k.size(),
            "linear": k.matrix().is_some(),
            "distances": p.d_min,
            "d_max": p.d_max,
            "exponent": p.exponent_min,
            "exponent_min": p.exponent_min,
            "exponent_max": p.exponent_max,
        }),
    )
}

fn kernel_check(args: &KernelArgs) -> Outcome<()> {
    let k = kernel_arg(&args.kernel)?;
    let mut out = json!({
        "q": k.alphabet_size(),
        "ell": k.size(),
        "linear": k.is_linear().ok(),
        "matrix": k.matrix(),
        "witness": k.corollary1_witness(),
    });
    if let (Some(f), Some(g)) = (k.field(), k.matrix()) {
        let vlp = polarq::kernel::vlp_decompose(f, g).map_err(compute)?;
        let nf = normalized_form(f, g).map_err(compute)?;
        out["vlp"] = json!(vlp);
        out["normalized"] = json!({
            "l": nf.l,
            "k": nf.k.map_or(-1, |k| k as i64),
        });
        out["theorem_prime"] = json!(polarizes_theorem_prime(f, g).map_err(compute)?);
        out["corollary_primitive"] = json!(polarizes_corollary_primitive(f, g).map_err(compute)?);
    }
    emit_json(&args.out, &out)
}

fn kernel_distances(args: &DistanceArgs) -> Outcome<()> {
    let k = kernel_arg(&args.kernel.kernel)?;
    let b = budgets()?;
    let p = if args.brute {
        k.distance_profile_brute(&b)
    } else {
        k.distance_profile(&b)
    }
    .map_err(compute)?;
    emit_json(&args.kernel.out, &json!(p))
}

fn channel_stats(args: &ChannelArgs) -> Outcome<()> {
    let w = channel_arg(&args.channel)?;
    let mut v = channel_metrics(&w);
    v["labels"] = json!(w.labels());
    emit_json(&args.out, &v)
}

fn transform(args: &TransformArgs) -> Outcome<()> {
    let w = channel_arg(&args.channel)?;
    let k = kernel_arg(&args.kernel)?;
    check_alphabets(&w, &k)?;
    let b = budgets()?;
    let set = subchannels(&w, &k, &b).map_err(compute)?;
    let subs: Vec<Value> = set
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut v = channel_metrics(c);
            v["i"] = json!(i);
            v
        })
        .collect();
    let sum: f64 = set.channels.iter().map(Channel::symmetric_capacity).sum();
    emit_json(
        &args.out,
        &json!({
            "parent": channel_metrics(&w),
            "subchannels": subs,
            "sum_I": sum,
            "ell_I": k.size() as f64 * w.symmetric_capacity(),
        }),
    )
}

fn polarize(args: &PolarizeArgs) -> Outcome<()> {
    let w = channel_arg(&args.channel)?;
    let k = kernel_arg(&args.kernel)?;
    check_alphabets(&w, &k)?;
    check_quantize(&w, args.quantize)?;
    if !(args.delta > 0.0 && args.delta < 0.5) {
        return Err(usage("--delta must lie in (0, 0.5)"));
    }
    if let Some(&bad) = args.beta.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(usage(format!("--beta {bad} must be positive")));
    }
    if args.samples == Some(0) {
        return Err(usage("--samples must be positive"));
    }
    let b = budgets()?;
    let report = match args.samples {
        Some(count) => sample_trajectories(&w, &k, args.depth, count, args.quantize, args.seed, &b),
        None => enumerate_tree(&w, &k, args.depth, args.quantize, &b),
    }
    .map_err(compute)?;

    match args.format {
        Format::Csv => emit(&args.out, &report.to_csv())?,
        Format::Json => emit_json(&args.out, &json!(report))?,
    }
    let mut summary = serde_json::to_string_pretty(&report.summary(args.delta, &args.beta)).expect("serializable");
    summary.push('\n');
    match &args.summary {
        Some(_) => emit(&args.summary, &summary)?,
        None => eprint!("{summary}"),
    }
    Ok(())
}

fn run_simulation(args: &SimulateArgs) -> Outcome<()> {
    let w = channel_arg(&args.channel)?;
    let k = kernel_arg(&args.kernel)?;
    check_alphabets(&w, &k)?;
    check_quantize(&w, args.quantize)?;
    if args.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let b = budgets()?;
    let len = polarq::numeric::checked_pow(k.size(), args.depth)
        .filter(|&n| n <= polarq::codec::MAX_BLOCK)
        .ok_or_else(|| usage("--depth gives a block length that is too large"))? as usize;
    let spec = match (&args.rate, &args.frozen_file) {
        (Some(rate), _) => {
            if !(0.0..=1.0).contains(rate) {
                return Err(usage("--rate must lie in [0, 1]"));
            }
            let report = enumerate_tree(&w, &k, args.depth, args.quantize, &b).map_err(compute)?;
            let info = report.information_set(*rate).map_err(compute)?;
            CodeSpec::from_information_set(k.clone(), args.depth, &info).map_err(compute)?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("--frozen-file: {e}")))?;
            let frozen =
                parse_frozen_json(&text, len, k.alphabet_size()).map_err(|e| usage(format!("--frozen-file: {e}")))?;
            CodeSpec::new(k.clone(), args.depth, frozen).map_err(compute)?
        }
        (None, None) => return Err(usage("one of --rate or --frozen-file is required")),
    };
    let r = simulate(&spec, &w, args.trials, args.seed, args.genie).map_err(compute)?;
    emit_json(
        &args.out,
        &json!({
            "block_length": len,
            "information_set": spec.information_set(),
            "trials": r.trials,
            "seed": args.seed,
            "genie": args.genie,
            "block_error_rate": r.block_error_rate,
            "symbol_error_rate": r.symbol_error_rate,
            "per_index_error": r.per_index_error,
            "per_index_ml_failure": r.per_index_ml_failure,
        }),
    )
}

fn run(cli: &Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(usage)?;
    }
    // A malformed override is rejected even by commands that do not enumerate.
    budgets()?;
    match &cli.command {
        Command::Kernel(KernelCommand::Exponent(a)) => kernel_exponent(a),
        Command::Kernel(KernelCommand::Check(a)) => kernel_check(a),
        Command::Kernel(KernelCommand::Distances(a)) => kernel_distances(a),
        Command::Channel(ChannelCommand::Stats(a)) => channel_stats(a),
        Command::Transform(a) => transform(a),
        Command::Polarize(a) => polarize(a),
        Command::Simulate(a) => run_simulation(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
