//! Argument handling and command dispatch for the `monosi` binary.
//!
//! Exit codes: 0 on success, 2 on a usage error (bad flags or flag values),
//! 1 when the computation or file I/O fails. Every error goes to standard
//! error prefixed with `error:`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use monosi::asymptotics::{self, BenchmarkModel, ScaledCentering};
use monosi::estimators::{self, EstimatorKind, FitConfig, Starts};
use monosi::score::{BandwidthRule, Formulation, ScoreConfig};
use monosi::simulate::{self, ModelSpec, MonteCarloConfig, SimStarts};
use monosi::sphere::{Chart, ChartKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] monosi::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "monosi", version, about = "Estimation in the monotone single index model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one estimator to a CSV data set.
    Fit(FitArgs),
    /// Monte Carlo study on a benchmark model.
    Simulate(SimulateArgs),
    /// Print the closed-form reference covariances of a benchmark model.
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Param,
    Lagrange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Spherical,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    UniformCubic,
    NormalCubic,
}

impl ModelArg {
    fn name(&self) -> &'static str {
        match self {
            Self::UniformCubic => "uniform-cubic",
            Self::NormalCubic => "normal-cubic",
        }
    }
}

/// Settings shared by `fit` and `simulate`.
#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "param")]
    pub formulation: FormulationArg,
    #[arg(long, value_enum, default_value = "spherical")]
    pub chart: ChartArg,
    /// Fixed kernel bandwidth for the efficient score; omit for the range rule.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub min_step: f64,
    #[arg(long, default_value_t = 0.5)]
    pub initial_step: f64,
    /// Pattern-search evaluation budget per start.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_evals: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_estimator)]
    pub estimator: EstimatorKind,
    /// Number of random starting directions.
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Estimate JSON; the link step function goes to `<stem>.link.csv` next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub reps: usize,
    /// Comma separated, e.g. `sse,ese,lse`.
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator, required = true)]
    pub estimators: Vec<EstimatorKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starting directions per fit; omit to start at the true direction.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Worker threads; the output does not depend on this.
    #[arg(long, env = "MONOSI_THREADS")]
    pub threads: Option<usize>,
    /// Table CSV; a run manifest goes to `<stem>.manifest.json` next to it.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional CSV of per-replication `sqrt(n/d) |alpha_hat - alpha0|`.
    #[arg(long)]
    pub l2_output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Also write the reference as JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    s.parse::<EstimatorKind>().map_err(|_| {
        let names: Vec<&str> = EstimatorKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn score_config(solver: &SolverArgs, d: usize) -> CliResult<ScoreConfig> {
    let chart = match solver.chart {
        ChartArg::Spherical => Chart::new(ChartKind::Spherical, d),
        ChartArg::Half => Chart::new(ChartKind::HalfSphere, d),
    }
    .map_err(|e| usage(e.to_string()))?;
    let mut sc = ScoreConfig::parametrized(chart, false);
    if solver.formulation == FormulationArg::Lagrange {
        sc.formulation = Formulation::Lagrange;
    }
    if let Some(h) = solver.bandwidth {
        sc.bandwidth_rule = BandwidthRule::Fixed(h);
    }
    sc.validate().map_err(|e| usage(format!("--bandwidth: {e}")))?;
    Ok(sc)
}

fn fit_config(solver: &SolverArgs, d: usize, starts: Starts, seed: u64) -> CliResult<FitConfig> {
    let mut cfg = FitConfig::new(d).map_err(|e| usage(e.to_string()))?;
    cfg.score = score_config(solver, d)?;
    cfg.pattern.min_step = solver.min_step;
    cfg.pattern.initial_step = solver.initial_step;
    cfg.pattern.max_evals = solver.max_evals;
    cfg.pattern
        .validate()
        .map_err(|e| usage(format!("--min-step/--initial-step/--max-evals: {e}")))?;
    cfg.starts = starts;
    cfg.link_free.seed = seed;
    Ok(cfg)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    s.push('\n');
    s
}

fn run_fit(args: &FitArgs) -> CliResult<()> {
    if args.starts == 0 {
        return Err(usage("--starts must be at least 1"));
    }
    let data = monosi::load_csv(&args.input)?;
    let cfg = fit_config(
        &args.solver,
        data.d(),
        Starts::RandomGrid {
            count: args.starts,
            seed: args.seed,
        },
        args.seed,
    )?;
    let est = estimators::fit(args.estimator, &data, &cfg)?;
    let link_path = sibling(&args.output, ".link.csv");
    est.link_fit.write_csv(&link_path)?;
    let link_name = link_path.file_name().map(|s| s.to_string_lossy().into_owned());
    write_file(&args.output, &json_text(&est.to_json(link_name.as_deref())))?;
    println!(
        "{}: alpha_hat = {:?}, criterion = {:e}, converged = {}",
        est.estimator, est.alpha_hat, est.criterion, est.report.converged
    );
    Ok(())
}

fn benchmark(model: ModelArg, dim: usize) -> CliResult<BenchmarkModel> {
    BenchmarkModel::from_name(model.name(), dim).map_err(|e| usage(e.to_string()))
}

fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let model = benchmark(args.model, args.dim)?;
    if args.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    if args.reps < 2 {
        return Err(usage("--reps must be at least 2"));
    }
    if args.starts == Some(0) {
        return Err(usage("--starts must be at least 1"));
    }
    if args.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let spec = ModelSpec::from_benchmark(model)?;
    let config = MonteCarloConfig {
        fit: fit_config(&args.solver, spec.d, Starts::Given(vec![spec.alpha0.clone()]), args.seed)?,
        starts: match args.starts {
            None => SimStarts::TrueAlpha,
            Some(k) => SimStarts::RandomGrid(k),
        },
        threads: args.threads,
    };
    let replications = simulate::run_replications(&spec, &args.estimators, args.n, args.reps, args.seed, &config)?;
    let summaries = simulate::summarize(&replications, &args.estimators, args.n);
    let table = simulate::table_csv(&summaries);
    write_file(&args.output, &table)?;

    if let Some(path) = &args.l2_output {
        let samples = simulate::l2_errors(&replications, &args.estimators, &spec, args.n);
        let mut out = String::from("estimator,replication,error\n");
        for s in &samples {
            for (i, v) in s.samples.iter().enumerate() {
                out.push_str(&format!("{},{i},{v}\n", s.estimator));
            }
        }
        write_file(path, &out)?;
    }

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = serde_json::json!({
        "tool": "monosi",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "model": args.model.name(),
        "spec": spec,
        "n": args.n,
        "reps": args.reps,
        "seed": args.seed,
        "seed_derivation": "splitmix64(seed + splitmix64(replication)), ChaCha8 per replication",
        "estimators": args.estimators.iter().map(|k| k.name()).collect::<Vec<_>>(),
        "config": {
            "score": config.fit.score,
            "pattern": config.fit.pattern,
            "broyden": config.fit.link_free.broyden,
            "link_free_random_starts": config.fit.link_free.random_starts,
            "starts": config.starts,
        },
        "failures": summaries.iter().map(|s| (s.estimator.name().to_string(), serde_json::json!(s.failures))).collect::<serde_json::Map<_, _>>(),
        "table": args.output.file_name().map(|s| s.to_string_lossy().into_owned()),
    });
    write_file(&sibling(&args.output, ".manifest.json"), &json_text(&manifest))?;
    print!("{table}");
    Ok(())
}

fn describe(name: &str, m: &Option<ScaledCentering>) -> Option<String> {
    let m = m.as_ref()?;
    Some(format!(
        "{name} = {} * (d I - 1 1^T); diag {} = {:.12}, offdiag {} = {:.12}",
        m.scale,
        m.diagonal(),
        m.diagonal_f64(),
        m.off_diagonal(),
        -m.scale_f64(),
    ))
}

fn run_asymptotics(args: &AsymptoticsArgs) -> CliResult<()> {
    let model = benchmark(args.model, args.dim)?;
    let reference = asymptotics::benchmark_matrices(model)?;
    println!("model {} d = {}", args.model.name(), model.dim());
    for (name, m) in [
        ("A", &reference.a),
        ("Sigma", &reference.sigma),
        ("Atilde", &reference.a_tilde),
        ("Sigmatilde", &reference.sigma_tilde),
        ("sse_cov", &reference.sse_cov),
        ("ese_cov", &reference.ese_cov),
    ] {
        if let Some(line) = describe(name, m) {
            println!("{line}");
        }
    }
    for t in &reference.table_values {
        let n = t.n.map_or("inf".to_string(), |n| n.to_string());
        println!("table {} n={n} diag {:?} offdiag {:?}", t.estimator, t.diag, t.offdiag);
    }
    if let Some(path) = &args.output {
        write_file(path, &json_text(&reference.to_json()))?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Asymptotics(a) => run_asymptotics(a),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
