//! Command-line front end: ingest or generate a matrix, analyze its cost
//! structure, run the solvers, or sweep a benchmark grid.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use pdcd::analyzer::{self, ComplexityReport, Side};
use pdcd::error::Error;
use pdcd::generators::{
    default_labels, gen_binary_balanced_columns, gen_binary_skewed_columns, gen_random,
    gen_tightness_family, gen_worst_for_dual,
};
use pdcd::losses::{LossKind, LossModel};
use pdcd::matrix::{read_libsvm, DualIndexedSparseMatrix};
use pdcd::reference::ridge_primal_solution;
use pdcd::sampling::SerialSampling;
use pdcd::solver::{
    primal_objective, solve_dual, solve_primal, SolveOptions, SolverTrace, StoppingRule,
};

#[derive(Parser)]
#[command(name = "pdcd", version, about = "Primal/dual randomized coordinate descent and its cost model")]
#[command(after_help = GEN_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const GEN_HELP: &str = "\
GENERATOR SPECS (for --gen):
  kind:DxN[:param=value]*   where kind is one of
    ones        all-ones matrix
    random      Normal(mu, sigma^2) entries on a Bernoulli(density) pattern
                [mu=0 sigma=1 density=1 seed=0]
    tight       the tightness family: first column a, first row b, corner c
                [a=1 b=1 c=1]
    binary-min  binary, balanced column counts (minimal C_D)   [a or nnz, seed=0]
    binary-max  binary, skewed column counts (maximal C_D)     [a or nnz, seed=0]
    worst-dual  binary, balanced rows and skewed columns       [a or nnz, seed=0]
  `a=K` sets the nonzero count; `nnz=P%` sets it as a fraction of d*n.

EXAMPLES:
  pdcd analyze --gen ones:3x3
  pdcd analyze --gen worst-dual:100x1000:a=10000 --lambda 1/n
  pdcd solve --gen worst-dual:100x100:nnz=100% --loss logistic --side both --trace out.csv
  pdcd bench --out bench_out
";

#[derive(Subcommand)]
enum Command {
    /// Compute the cost model and recommend primal or dual coordinate descent
    Analyze(AnalyzeArgs),
    /// Run the solvers and write convergence traces
    Solve(SolveArgs),
    /// Sweep a (n, sparsity) grid of worst-for-dual instances
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Read a data matrix (and labels) in LIBSVM format
    #[arg(long, value_name = "PATH", conflicts_with = "gen")]
    libsvm: Option<PathBuf>,
    /// Generate a matrix from a spec (see bottom of --help)
    #[arg(long, value_name = "SPEC", required_unless_present = "libsvm")]
    gen: Option<String>,
    /// Override the feature count upward (LIBSVM input only)
    #[arg(long, value_name = "D")]
    min_features: Option<usize>,
    /// Scale all columns by the inverse average column norm
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Regularization parameter; the literal `1/n` is resolved after loading
    #[arg(long, default_value = "1/n")]
    lambda: String,
    /// Loss family, which fixes the smoothness constant beta
    #[arg(long, value_enum, default_value_t = LossArg::Logistic)]
    loss: LossArg,
    /// Override beta instead of deriving it from --loss
    #[arg(long)]
    beta: Option<f64>,
    /// Also append the machine-readable record line to this file
    #[arg(long, value_name = "PATH")]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "1/n")]
    lambda: String,
    #[arg(long, value_enum, default_value_t = LossArg::Squared)]
    loss: LossArg,
    /// Which solver(s) to run
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    side: SideArg,
    #[arg(long, value_enum, default_value_t = SamplingArg::Importance)]
    sampling: SamplingArg,
    /// Stop when the measured suboptimality reaches this value
    #[arg(long, value_name = "GAP")]
    stop_gap: Option<f64>,
    /// Pass budget (one pass = all nonzeros visited once)
    #[arg(long, default_value_t = 100.0)]
    max_passes: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV path; with --side both, `.primal`/`.dual` is inserted
    /// before the extension
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Output directory for traces and summary.csv
    #[arg(long, value_name = "DIR", default_value = "bench_out")]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    d: usize,
    /// Comma-separated example counts
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 1000, 10000])]
    n: Vec<usize>,
    /// Comma-separated fill percentages
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0f64, 10.0, 100.0])]
    nnz: Vec<f64>,
    /// Number of seeds per cell (seeds 0..k)
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = LossArg::Logistic)]
    loss: LossArg,
    #[arg(long, default_value = "1/n")]
    lambda: String,
    /// Relative suboptimality defining "reached the target"
    #[arg(long, default_value_t = 1e-3)]
    target: f64,
    #[arg(long, default_value_t = 100.0)]
    max_passes: f64,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum LossArg {
    Squared,
    Logistic,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SideArg {
    Primal,
    Dual,
    Both,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SamplingArg {
    Uniform,
    Importance,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BoundViolated(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn parse_lambda(s: &str, n: usize) -> Result<f64, Error> {
    let lambda = if s.trim() == "1/n" {
        1.0 / n as f64
    } else {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("lambda `{s}`")))?
    };
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!("lambda {lambda} must be positive")));
    }
    Ok(lambda)
}

fn parse_gen_spec(spec: &str) -> Result<(DualIndexedSparseMatrix, usize), Error> {
    let bad = |msg: String| Error::InvalidParameter(format!("generator spec `{spec}`: {msg}"));
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or_default();
    let dims = parts.next().ok_or_else(|| bad("missing DxN".into()))?;
    let (ds, ns) = dims
        .split_once(['x', 'X'])
        .ok_or_else(|| bad(format!("bad dimensions `{dims}`")))?;
    let d: usize = ds.parse().map_err(|_| bad(format!("bad d `{ds}`")))?;
    let n: usize = ns.parse().map_err(|_| bad(format!("bad n `{ns}`")))?;
    if d == 0 || n == 0 {
        return Err(bad("dimensions must be positive".into()));
    }

    let mut params: Vec<(String, String)> = Vec::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| bad(format!("bad param `{p}`")))?;
        params.push((k.to_string(), v.to_string()));
    }
    let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let get_f64 = |key: &str, default: f64| -> Result<f64, Error> {
        match get(key) {
            Some(v) => v.parse().map_err(|_| bad(format!("bad {key} `{v}`"))),
            None => Ok(default),
        }
    };
    let seed = match get("seed") {
        Some(v) => v.parse::<u64>().map_err(|_| bad(format!("bad seed `{v}`")))?,
        None => 0,
    };
    // nonzero count for binary kinds: `a=K` or `nnz=P%` of d*n
    let alpha = || -> Result<u64, Error> {
        if let Some(v) = get("a") {
            return v.parse::<u64>().map_err(|_| bad(format!("bad a `{v}`")));
        }
        if let Some(v) = get("nnz") {
            let pct: f64 = v
                .trim_end_matches('%')
                .parse()
                .map_err(|_| bad(format!("bad nnz `{v}`")))?;
            return Ok((pct / 100.0 * (d * n) as f64).round() as u64);
        }
        Err(bad("binary kinds need `a=` or `nnz=`".into()))
    };

    let (matrix, repaired) = match kind {
        "ones" => (gen_random(d, n, 1.0, 0.0, 1.0, seed)?.matrix, 0),
        "random" => {
            let g = gen_random(
                d,
                n,
                get_f64("mu", 0.0)?,
                get_f64("sigma", 1.0)?,
                get_f64("density", 1.0)?,
                seed,
            )?;
            (g.matrix, g.repaired)
        }
        "tight" => (
            gen_tightness_family(d, n, get_f64("a", 1.0)?, get_f64("b", 1.0)?, get_f64("c", 1.0)?)?,
            0,
        ),
        "binary-min" => (gen_binary_balanced_columns(d, n, alpha()?, seed)?.matrix, 0),
        "binary-max" => (gen_binary_skewed_columns(d, n, alpha()?, seed)?.matrix, 0),
        "worst-dual" => (gen_worst_for_dual(d, n, alpha()?, seed)?.matrix, 0),
        other => return Err(bad(format!("unknown kind `{other}`"))),
    };
    Ok((matrix, repaired))
}

/// Loads or generates the matrix plus labels (±1 alternating when generated).
fn load_input(input: &InputArgs) -> Result<(DualIndexedSparseMatrix, Vec<f64>), Error> {
    let (x, y) = if let Some(path) = &input.libsvm {
        let file = File::open(path)?;
        read_libsvm(BufReader::new(file), input.min_features)?
    } else {
        let spec = input.gen.as_deref().expect("clap enforces one input source");
        let (x, repaired) = parse_gen_spec(spec)?;
        if repaired > 0 {
            eprintln!("note: {repaired} entries inserted to repair zero rows/columns");
        }
        let y = default_labels(x.n());
        (x, y)
    };
    let x = if input.normalize { x.normalize_columns()? } else { x };
    Ok((x, y))
}

fn build_loss(kind: LossArg, labels: Vec<f64>) -> Result<LossModel, Error> {
    match kind {
        LossArg::Squared => Ok(LossModel::squared(labels)),
        LossArg::Logistic => LossModel::logistic(labels),
    }
}

fn print_report(r: &ComplexityReport, lambda: f64, beta: f64) {
    println!("matrix          {} x {}  ({} nonzeros, fill {:.4})", r.d, r.n, r.nnz, r.nnz as f64 / (r.d * r.n) as f64);
    println!("lambda          {lambda}");
    println!("beta            {beta}");
    println!("C_P             {}", r.c_p);
    println!("C_D             {}", r.c_d);
    println!("primal  K^ {}  W {}  T {}", r.khat_p, r.w_p, r.t_p);
    println!("dual    K^ {}  W {}  T {}", r.khat_d, r.w_d, r.t_d);
    println!("T_P / T_D       {}", r.ratio);
    println!("recommendation  {}", r.recommendation);
    println!("note: T counts visited nonzeros; per-iteration loss-evaluation constants (one per row nonzero per primal iteration, 1 per dual iteration) are reported but not folded into the decision");
}

fn record_line(r: &ComplexityReport) -> String {
    format!(
        "d={} n={} nnz={} cp={} cd={} tp={} td={} ratio={} rec={}",
        r.d, r.n, r.nnz, r.c_p, r.c_d, r.t_p, r.t_d, r.ratio, r.recommendation
    )
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let (x, _y) = load_input(&args.input)?;
    let lambda = parse_lambda(&args.lambda, x.n())?;
    let beta = args.beta.unwrap_or(match args.loss {
        LossArg::Squared => 1.0,
        LossArg::Logistic => 0.25,
    });
    let report = analyzer::recommend(&x, lambda, beta)?;
    print_report(&report, lambda, beta);
    let line = record_line(&report);
    println!("{line}");
    if let Some(path) = &args.record {
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn trace_path_for(base: &Path, side: &str, both: bool) -> PathBuf {
    if !both {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.{side}.{ext}"))
}

fn write_trace(trace: &SolverTrace, path: &Path) -> Result<(), Error> {
    let f = BufWriter::new(File::create(path)?);
    trace.write_csv(f)
}

/// Reference optimum for primal-suboptimality stopping: the normal equations
/// for squared loss, a tight dual run for logistic.
fn reference_objective(
    x: &DualIndexedSparseMatrix,
    loss: &LossModel,
    lambda: f64,
    labels: &[f64],
) -> Result<f64, Error> {
    match loss.kind() {
        LossKind::Squared => {
            let w_star = ridge_primal_solution(x, labels, lambda)?;
            Ok(primal_objective(x, loss, lambda, &w_star))
        }
        LossKind::Logistic => {
            let sampling = analyzer::importance_sampling(Side::Dual, x, lambda, loss.beta())?;
            let (_, v) = analyzer::eso_serial(x);
            let opts = SolveOptions {
                seed: 0,
                trace_interval_nnz: None,
                init: None,
                stop: StoppingRule {
                    target_gap: Some(1e-12),
                    reference_obj: None,
                    max_passes: Some(20_000.0),
                    max_iterations: None,
                    max_wall: None,
                },
            };
            let (w, _alpha, _trace) = solve_dual(x, loss, lambda, &sampling, &v, &opts)?;
            Ok(primal_objective(x, loss, lambda, &w))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let (x, y) = load_input(&args.input)?;
    let lambda = parse_lambda(&args.lambda, x.n())?;
    let loss = build_loss(args.loss, y.clone())?;
    let (u, v) = analyzer::eso_serial(&x);
    let both = args.side == SideArg::Both;

    let make_sampling = |side: Side| -> Result<SerialSampling, Error> {
        let m = match side {
            Side::Primal => x.d(),
            Side::Dual => x.n(),
        };
        match args.sampling {
            SamplingArg::Uniform => SerialSampling::uniform(m),
            SamplingArg::Importance => analyzer::importance_sampling(side, &x, lambda, loss.beta()),
        }
    };

    let reference = match (args.stop_gap, args.side) {
        (Some(_), SideArg::Primal | SideArg::Both) => {
            Some(reference_objective(&x, &loss, lambda, &y)?)
        }
        _ => None,
    };
    let opts = |for_primal: bool| SolveOptions {
        seed: args.seed,
        trace_interval_nnz: None,
        init: None,
        stop: StoppingRule {
            target_gap: args.stop_gap,
            reference_obj: if for_primal { reference } else { None },
            max_passes: Some(args.max_passes),
            max_iterations: None,
            max_wall: None,
        },
    };

    if args.side == SideArg::Primal || both {
        let sampling = make_sampling(Side::Primal)?;
        let (_, trace) = solve_primal(&x, &loss, lambda, &sampling, &u, &opts(true))?;
        let last = trace.last();
        println!(
            "primal: {} iterations, {:.2} passes, P = {}",
            last.iter, last.passes, last.primal_obj
        );
        if let Some(path) = &args.trace {
            write_trace(&trace, &trace_path_for(path, "primal", both))?;
        }
    }
    if args.side == SideArg::Dual || both {
        let sampling = make_sampling(Side::Dual)?;
        let (_, _, trace) = solve_dual(&x, &loss, lambda, &sampling, &v, &opts(false))?;
        let last = trace.last();
        println!(
            "dual:   {} iterations, {:.2} passes, P = {}, gap = {}",
            last.iter,
            last.passes,
            last.primal_obj,
            last.gap.unwrap_or(f64::NAN)
        );
        if let Some(path) = &args.trace {
            write_trace(&trace, &trace_path_for(path, "dual", both))?;
        }
    }
    Ok(())
}

struct BenchResult {
    n: usize,
    alpha: u64,
    seed: u64,
    line: String,
}

/// Passes until the primal objective drops to `threshold`, from the trace.
fn passes_to(trace: &SolverTrace, threshold: f64) -> Option<f64> {
    trace
        .rows
        .iter()
        .find(|r| r.primal_obj <= threshold)
        .map(|r| r.passes)
}

fn fmt_passes(p: Option<f64>) -> String {
    p.map(|v| format!("{v:.4}")).unwrap_or_else(|| "DNF".into())
}

fn bench_cell(
    args: &BenchArgs,
    n: usize,
    alpha: u64,
    seed: u64,
) -> Result<(String, Vec<(String, SolverTrace)>), Error> {
    let d = args.d;
    let x = gen_worst_for_dual(d, n, alpha, seed)?.matrix;
    let y = default_labels(n);
    let lambda = parse_lambda(&args.lambda, n)?;
    let loss = build_loss(args.loss, y)?;
    let (u, v) = analyzer::eso_serial(&x);
    let report = analyzer::recommend(&x, lambda, loss.beta())?;

    let opts = SolveOptions {
        seed,
        trace_interval_nnz: Some((x.nnz() as u64 / 20).max(1)),
        init: None,
        stop: StoppingRule {
            target_gap: None,
            reference_obj: None,
            max_passes: Some(args.max_passes),
            max_iterations: None,
            max_wall: None,
        },
    };
    let sp = analyzer::importance_sampling(Side::Primal, &x, lambda, loss.beta())?;
    let sd = analyzer::importance_sampling(Side::Dual, &x, lambda, loss.beta())?;
    let (_, tp) = solve_primal(&x, &loss, lambda, &sp, &u, &opts)?;
    let (_, _, td) = solve_dual(&x, &loss, lambda, &sd, &v, &opts)?;

    // target: close `target` of the way from P(0) to the best value either
    // run achieved
    let p0 = tp.rows[0].primal_obj;
    let p_star = tp
        .rows
        .iter()
        .chain(td.rows.iter())
        .map(|r| r.primal_obj)
        .fold(f64::INFINITY, f64::min);
    let threshold = p_star + args.target * (p0 - p_star);
    let pp = passes_to(&tp, threshold);
    let dp = passes_to(&td, threshold);
    let pass_ratio = match (pp, dp) {
        (Some(a), Some(b)) if b > 0.0 => format!("{:.4}", a / b),
        _ => String::new(),
    };
    let line = format!(
        "{d},{n},{alpha},{seed},{},{},{},{},{},{}",
        report.t_p,
        report.t_d,
        report.ratio,
        fmt_passes(pp),
        fmt_passes(dp),
        pass_ratio
    );
    let traces = vec![
        (format!("trace_d{d}_n{n}_a{alpha}_s{seed}.primal.csv"), tp),
        (format!("trace_d{d}_n{n}_a{alpha}_s{seed}.dual.csv"), td),
    ];
    Ok((line, traces))
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    std::fs::create_dir_all(&args.out)?;
    let mut jobs: Vec<(usize, u64, u64)> = Vec::new();
    for &n in &args.n {
        for &pct in &args.nnz {
            let alpha = (pct / 100.0 * (args.d * n) as f64).round() as u64;
            for seed in 0..args.seeds.max(1) {
                jobs.push((n, alpha, seed));
            }
        }
    }
    let results: Vec<BenchResult> = jobs
        .par_iter()
        .map(|&(n, alpha, seed)| {
            let line = match bench_cell(&args, n, alpha, seed) {
                Ok((line, traces)) => {
                    for (name, trace) in traces {
                        if let Err(e) = write_trace(&trace, &args.out.join(name)) {
                            eprintln!("warning: trace write failed: {e}");
                        }
                    }
                    line
                }
                Err(e) => {
                    eprintln!("cell (n={n}, alpha={alpha}, seed={seed}) failed: {e}");
                    format!("{},{n},{alpha},{seed},ERR,ERR,ERR,ERR,ERR,ERR", args.d)
                }
            };
            BenchResult { n, alpha, seed, line }
        })
        .collect();

    let mut ordered = results;
    ordered.sort_by_key(|r| (r.n, r.alpha, r.seed));
    let path = args.out.join("summary.csv");
    let mut f = BufWriter::new(File::create(&path)?);
    writeln!(f, "d,n,alpha,seed,tp,td,t_ratio,primal_passes,dual_passes,pass_ratio")?;
    for r in &ordered {
        writeln!(f, "{}", r.line)?;
    }
    drop(f);
    println!("wrote {} cells to {}", ordered.len(), path.display());
    Ok(())
}
