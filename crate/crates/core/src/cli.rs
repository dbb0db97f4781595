//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid arguments or unreadable input,
//! 2 when a computation fails numerically.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{self, BenchConfig};
use crate::data::{Dataset, Loss};
use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::io;
use crate::path::{compare_paths, fit_path, path_start, penalty_for_method, Method, PathConfig, PathDocument};
use crate::solver::{fit, SolverConfig};
use crate::synth::{generate, SynthConfig};
use crate::weights::{self, Scheme, WeightConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "slope-screen", version, about = "Group SLOPE and sparse-group SLOPE with strong screening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a penalty weight sequence.
    Weights(WeightsCmd),
    /// Fit at a single lambda and print the coefficients.
    Fit(FitCmd),
    /// Fit a regularization path.
    Path(PathCmd),
    /// Write a synthetic dataset to a directory.
    Synth(SynthCmd),
    /// Compare screened and unscreened paths on synthetic data.
    Bench(BenchCmd),
    /// Compare two saved paths.
    Compare(CompareCmd),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Calibration {
    Mean,
    Max,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output encoding.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args, Debug)]
struct WeightArgs {
    /// Share of the variable-level penalty in SGS and SGO.
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    /// Target variable false discovery rate of the weights.
    #[arg(long, default_value_t = 0.05)]
    qv: f64,
    /// Target group false discovery rate of the weights.
    #[arg(long, default_value_t = 0.05)]
    qg: f64,
    /// Base level of OSCAR weights (default derived from the data).
    #[arg(long)]
    sigma1: Option<f64>,
    /// Mean or max calibration of the FDR weights.
    #[arg(long, value_enum, default_value = "mean")]
    weights: Calibration,
}

impl WeightArgs {
    fn config(&self, method: Method) -> WeightConfig {
        let scheme = match (method, self.weights) {
            (Method::Gslope, Calibration::Max) => Scheme::GslopeMax,
            (Method::Gslope, Calibration::Mean) => Scheme::GslopeMean,
            (_, Calibration::Max) => Scheme::SgsMax,
            _ => Scheme::SgsMean,
        };
        WeightConfig {
            q_v: self.qv,
            q_g: self.qg,
            alpha: self.alpha,
            scheme,
            ..WeightConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Convergence tolerance on the iterate change.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Iteration cap per fit.
    #[arg(long = "max-iter", default_value_t = 5000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Headerless CSV design matrix.
    #[arg(long = "x")]
    x: PathBuf,
    /// Response, one value per line.
    #[arg(long = "y")]
    y: PathBuf,
    /// Group labels, one per column of X (default: every column is its own group).
    #[arg(long)]
    groups: Option<PathBuf>,
    /// `linear` or `logistic` (responses in {0, 1}).
    #[arg(long, default_value = "linear")]
    loss: Loss,
    /// Do not fit an intercept for the linear loss.
    #[arg(long = "no-intercept")]
    no_intercept: bool,
    /// Do not scale columns to unit norm.
    #[arg(long = "no-standardize")]
    no_standardize: bool,
}

impl DataArgs {
    fn load(&self) -> Result<(Dataset, GroupStructure)> {
        let x = io::read_matrix_file(&self.x)?;
        let y = io::read_vector_file(&self.y)?;
        let groups = match &self.groups {
            Some(path) => io::read_groups_file(path)?,
            None => GroupStructure::singletons(x.ncols()),
        };
        if groups.num_vars() != x.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{} group labels for {} columns",
                groups.num_vars(),
                x.ncols()
            )));
        }
        let ds = Dataset::prepare(x, y, self.loss, !self.no_intercept, !self.no_standardize)?;
        Ok((ds, groups))
    }
}

#[derive(Args, Debug)]
struct WeightsCmd {
    /// One of slope_bh, gslope_mean, gslope_max, sgs_mean, sgs_max, oscar.
    #[arg(long)]
    scheme: Scheme,
    /// Number of variables, used with singleton groups or `--sizes`.
    #[arg(long)]
    p: Option<usize>,
    /// Group sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Group label file.
    #[arg(long)]
    groups: Option<PathBuf>,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("level").required(true).args(["lambda", "lambda_ratio"]))]
struct FitCmd {
    #[command(flatten)]
    data: DataArgs,
    /// One of slope, gslope, sgs, goscar, sgo.
    #[arg(long, default_value = "sgs")]
    method: Method,
    /// Absolute penalty level.
    #[arg(long)]
    lambda: Option<f64>,
    /// Lambda as a fraction of the smallest lambda with an all-zero solution.
    #[arg(long = "lambda-ratio")]
    lambda_ratio: Option<f64>,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct PathCmd {
    #[command(flatten)]
    data: DataArgs,
    /// One of slope, gslope, sgs, goscar, sgo.
    #[arg(long, default_value = "sgs")]
    method: Method,
    /// Use strong screening with KKT checks (the default).
    #[arg(long, overrides_with = "no_screen")]
    screen: bool,
    /// Fit every point on all variables.
    #[arg(long = "no-screen", overrides_with = "screen")]
    no_screen: bool,
    /// Number of path points.
    #[arg(long = "len", default_value_t = 50)]
    len: usize,
    /// Last lambda as a fraction of the first.
    #[arg(long, default_value_t = 0.05)]
    terminal: f64,
    /// KKT refits per point before falling back to a full fit.
    #[arg(long = "kkt-rounds", default_value_t = 10)]
    kkt_rounds: usize,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SynthCmd {
    /// Directory receiving X.csv, y.csv, groups.txt and beta_true.csv.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Observations.
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Variables.
    #[arg(long, default_value_t = 500)]
    p: usize,
    /// Within-group correlation.
    #[arg(long, default_value_t = 0.6)]
    rho: f64,
    /// `linear` or `logistic` response.
    #[arg(long, default_value = "linear")]
    model: Loss,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug)]
struct BenchCmd {
    /// Methods, comma separated.
    #[arg(long = "method", value_delimiter = ',', default_values = ["gslope", "sgs"])]
    methods: Vec<Method>,
    /// Numbers of variables, comma separated.
    #[arg(long = "p", value_delimiter = ',', default_values = ["200", "400"])]
    ps: Vec<usize>,
    /// Within-group correlations, comma separated.
    #[arg(long = "rho", value_delimiter = ',', default_values = ["0", "0.3", "0.6", "0.9"])]
    rhos: Vec<f64>,
    /// Repetitions per case.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Observations.
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// `linear` or `logistic` response.
    #[arg(long, default_value = "linear")]
    model: Loss,
    /// Number of path points.
    #[arg(long = "len", default_value_t = 50)]
    len: usize,
    /// Last lambda as a fraction of the first.
    #[arg(long, default_value_t = 0.05)]
    terminal: f64,
    /// Seed of the first repetition.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareCmd {
    /// Path saved with `path --format json`.
    first: PathBuf,
    /// Second saved path, fitted on the same lambdas.
    second: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

fn sink(output: &str) -> Result<Box<dyn Write>> {
    if output == "-" {
        Ok(Box::new(BufWriter::new(std::io::stdout())))
    } else {
        let f = File::create(output)
            .map_err(|e| Error::InvalidArgument(format!("cannot create {output}: {e}")))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn emit_json(value: &impl Serialize, out: &OutputArgs) -> Result<()> {
    let mut w = sink(&out.output)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run_weights(cmd: &WeightsCmd) -> Result<()> {
    let groups = if let Some(path) = &cmd.groups {
        io::read_groups_file(path)?
    } else if !cmd.sizes.is_empty() {
        GroupStructure::from_sizes(&cmd.sizes)?
    } else if let Some(p) = cmd.p {
        GroupStructure::singletons(p)
    } else {
        return Err(Error::InvalidArgument("one of --p, --sizes or --groups is required".into()));
    };
    if let Some(p) = cmd.p {
        if p != groups.num_vars() {
            return Err(Error::InvalidArgument(format!(
                "--p {p} disagrees with the {} variables in the group structure",
                groups.num_vars()
            )));
        }
    }
    let mut cfg = WeightConfig {
        q_v: cmd.weights.qv,
        q_g: cmd.weights.qg,
        alpha: cmd.weights.alpha,
        scheme: cmd.scheme,
        ..WeightConfig::default()
    };
    if let Some(s) = cmd.weights.sigma1 {
        cfg.oscar_sigma1 = s;
    }
    let w = weights::generate(&groups, &cfg)?;
    match cmd.out.format {
        Format::Json => emit_json(&w, &cmd.out),
        Format::Csv => {
            let mut out = csv::Writer::from_writer(sink(&cmd.out.output)?);
            out.write_record(["index", "value", "kind"])?;
            for (kind, seq) in [("v", &w.v), ("w", &w.w)] {
                for (i, x) in seq.iter().enumerate() {
                    out.write_record([(i + 1).to_string(), x.to_string(), kind.to_string()])?;
                }
            }
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FitOutput {
    method: Method,
    lambda: f64,
    beta: Vec<f64>,
    intercept: Option<f64>,
    iterations: usize,
    converged: bool,
    objective: f64,
}

fn run_fit(cmd: &FitCmd) -> Result<()> {
    let (ds, groups) = cmd.data.load()?;
    let spec = penalty_for_method(cmd.method, &ds, &groups, &cmd.weights.config(cmd.method), cmd.weights.sigma1)?;
    let lambda = match (cmd.lambda, cmd.lambda_ratio) {
        (Some(l), _) => l,
        (None, Some(r)) => r * path_start(&ds, &spec)?,
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let res = fit(&ds, &spec, lambda, &vec![0.0; ds.p()], &cmd.solver.config())?;
    if !res.converged {
        log::warn!("solver did not converge in {} iterations", res.iterations);
    }
    let beta = res.beta.beta;
    match cmd.out.format {
        Format::Json => emit_json(
            &FitOutput {
                method: cmd.method,
                lambda,
                intercept: ds.intercept(ndarray::ArrayView1::from(&beta)),
                beta,
                iterations: res.iterations,
                converged: res.converged,
                objective: res.objective,
            },
            &cmd.out,
        ),
        Format::Csv => {
            let mut w = sink(&cmd.out.output)?;
            io::write_vector(&beta, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn run_path(cmd: &PathCmd) -> Result<()> {
    let (ds, groups) = cmd.data.load()?;
    let wcfg = cmd.weights.config(cmd.method);
    let spec = penalty_for_method(cmd.method, &ds, &groups, &wcfg, cmd.weights.sigma1)?;
    let path_cfg = PathConfig {
        length: cmd.len,
        terminal_ratio: cmd.terminal,
        method: cmd.method,
        screen: !cmd.no_screen,
        kkt_max_rounds: cmd.kkt_rounds,
    };
    let solver = cmd.solver.config();
    let result = fit_path(&ds, &spec, &path_cfg, &solver)?;
    log::info!(
        "path finished: {} points, {} iterations, {:.3}s",
        result.lambdas.len(),
        result.total_iterations(),
        result.total_seconds()
    );
    match cmd.out.format {
        Format::Json => {
            let doc = PathDocument::new(path_cfg, solver, wcfg.alpha, result);
            let mut w = sink(&cmd.out.output)?;
            doc.to_writer(&mut w)?;
            writeln!(w)?;
            w.flush()?;
            Ok(())
        }
        Format::Csv => crate::path::write_metrics_csv(&result, sink(&cmd.out.output)?),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", path.display())))
}

fn run_synth(cmd: &SynthCmd) -> Result<()> {
    let cfg = SynthConfig {
        n: cmd.n,
        p: cmd.p,
        rho: cmd.rho,
        model: cmd.model,
        seed: cmd.seed,
        ..SynthConfig::default()
    };
    let data = generate(&cfg)?;
    std::fs::create_dir_all(&cmd.out_dir)
        .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", cmd.out_dir.display())))?;
    io::write_matrix(&data.x, create(&cmd.out_dir, "X.csv")?)?;
    io::write_vector(data.y.as_slice().unwrap_or(&data.y.to_vec()), create(&cmd.out_dir, "y.csv")?)?;
    io::write_groups(&data.groups, create(&cmd.out_dir, "groups.txt")?)?;
    io::write_vector(&data.beta, create(&cmd.out_dir, "beta_true.csv")?)?;
    log::info!("wrote synthetic dataset to {}", cmd.out_dir.display());
    Ok(())
}

fn run_bench(cmd: &BenchCmd) -> Result<()> {
    let method = cmd.methods.first().copied().unwrap_or(Method::Sgs);
    let cfg = BenchConfig {
        methods: cmd.methods.clone(),
        ps: cmd.ps.clone(),
        rhos: cmd.rhos.clone(),
        reps: cmd.reps,
        synth: SynthConfig {
            n: cmd.n,
            model: cmd.model,
            seed: cmd.seed,
            ..SynthConfig::default()
        },
        path: PathConfig {
            length: cmd.len,
            terminal_ratio: cmd.terminal,
            ..PathConfig::default()
        },
        solver: cmd.solver.config(),
        weights: cmd.weights.config(method),
        jobs: cmd.jobs,
    };
    let report = bench::run(&cfg)?;
    match cmd.out.format {
        Format::Json => emit_json(&report, &cmd.out),
        Format::Csv => bench::write_summary_csv(&report, sink(&cmd.out.output)?),
    }
}

fn load_doc(path: &Path) -> Result<PathDocument> {
    let f = File::open(path).map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    PathDocument::from_reader(BufReader::new(f))
}

fn run_compare(cmd: &CompareCmd) -> Result<()> {
    let a = load_doc(&cmd.first)?;
    let b = load_doc(&cmd.second)?;
    let report = compare_paths(&a.result, &b.result)?;
    match cmd.out.format {
        Format::Json => emit_json(&report, &cmd.out),
        Format::Csv => {
            let mut out = csv::Writer::from_writer(sink(&cmd.out.output)?);
            out.write_record(["k", "lambda", "l2_distance"])?;
            for (k, (d, l)) in report.distances.iter().zip(&a.result.lambdas).enumerate() {
                out.write_record([(k + 1).to_string(), format!("{l:e}"), format!("{d:e}")])?;
            }
            out.flush()?;
            log::info!(
                "max distance {:e}, superset failures {}, runtime ratio {:.3}",
                report.max_distance,
                report.superset_failures,
                report.runtime_ratio
            );
            Ok(())
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SLOPE_SCREEN_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalFailure(_) => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Weights(c) => run_weights(c),
        Command::Fit(c) => run_fit(c),
        Command::Path(c) => run_path(c),
        Command::Synth(c) => run_synth(c),
        Command::Bench(c) => run_bench(c),
        Command::Compare(c) => run_compare(c),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if code == EXIT_INVALID {
                eprintln!("\nFor usage, run: slope-screen --help");
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(run(["slope-screen", "--help"]), EXIT_OK);
        assert_eq!(run(["slope-screen", "frobnicate"]), EXIT_INVALID);
        assert_eq!(run(["slope-screen", "weights", "--scheme", "nope", "--p", "3"]), EXIT_INVALID);
        assert_eq!(run(["slope-screen", "weights", "--scheme", "oscar"]), EXIT_INVALID);
        assert_eq!(exit_code(&Error::NumericalFailure("x".into())), EXIT_NUMERICAL);
    }

    #[test]
    fn screen_flags_override() {
        let parse = |args: &[&str]| {
            let mut v = vec!["slope-screen", "path", "--x", "a", "--y", "b"];
            v.extend_from_slice(args);
            match Cli::try_parse_from(v).unwrap().command {
                Command::Path(c) => !c.no_screen,
                _ => unreachable!(),
            }
        };
        assert!(parse(&[]));
        assert!(!parse(&["--no-screen"]));
        assert!(parse(&["--no-screen", "--screen"]));
    }
}
