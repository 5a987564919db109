//! Command-line front end: `simulate`, `sweep`, `bounds` and `plot`.
//!
//! Exit codes are 0 on success, 1 on a runtime failure (including a violated
//! bound or failed verification) and 2 on a usage or configuration error.

pub mod config;
pub mod output;
pub mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, BoundReport};
use crate::environments::{RngStream, BETA_SAMPLER};
use crate::error::Error;
use crate::numerics::{gauss_tail, gauss_tail_bounds};
use crate::simulation::{estimate_regret, ExperimentConfig};
use config::ConfigFile;
use output::{read_csv, write_csv, CsvError, OutputRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tsbandit", version, about = "Bandit regret simulations and regret-bound checks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workers {
    Max,
    Count(usize),
}

fn parse_workers(s: &str) -> Result<Workers, String> {
    if s == "max" {
        return Ok(Workers::Max);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or `max`, got {s:?}")),
        Ok(n) => Ok(Workers::Count(n)),
    }
}

#[derive(Debug, Args)]
struct RunOptions {
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (`max` uses every core); does not change the output.
    #[arg(long, value_parser = parse_workers)]
    workers: Option<Workers>,
    /// Override the master seed of the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment config and print its regret table.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Run one config once per gap value and print all tables together.
    Sweep {
        config: PathBuf,
        /// Comma-separated gap values substituted for `delta`.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[command(flatten)]
        run: RunOptions,
    },
    /// Evaluate a regret bound or run a numerical check.
    Bounds(BoundsArgs),
    /// Draw regret curves from one or more result tables.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Logarithmic round axis.
        #[arg(long)]
        log_x: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    /// Prior-free bound 14 sqrt(nK).
    Thm1,
    /// Minimax lower bound sqrt(nK)/20.
    Lower,
    /// Two-armed known-gap bound delta + 578/delta.
    Thm2,
    /// K-armed bound from the gaps and minimum gap.
    Thm3,
    /// Pull-count threshold A_i.
    Aith,
    /// Numerical checks of the proof integrals and tail bounds.
    VerifyProofs,
    /// Monte Carlo check of the maximal inequality for Gaussian partial sums.
    Hoeffding,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(value_enum)]
    theorem: Theorem,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long = "K")]
    k: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated gaps for `thm3`.
    #[arg(long, value_delimiter = ',')]
    gaps: Vec<f64>,
    /// Partial-sum length for `hoeffding`.
    #[arg(long)]
    m: Option<u64>,
    /// Threshold for `hoeffding`.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result table whose final checkpoint is compared with the bound.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Io(m) => CliError::Runtime(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Configuration problems found while building the first episode are usage errors.
fn classify(e: Error) -> CliError {
    let config_like = |e: &Error| {
        matches!(e, Error::Config(_) | Error::InvalidInput(_) | Error::Domain(_) | Error::Precondition(_))
    };
    match &e {
        Error::Episode { source, .. } if config_like(source) => CliError::Usage(e.to_string()),
        other if config_like(other) => CliError::Usage(e.to_string()),
        _ => CliError::Runtime(e.to_string()),
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// normal output to `stdout` and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { config, run } => simulate(&config, None, &run, stdout, stderr),
        Command::Sweep { config, deltas, run } => simulate(&config, Some(&deltas), &run, stdout, stderr),
        Command::Bounds(args) => run_bounds(&args, stdout),
        Command::Plot { csv, out, log_x } => run_plot(&csv, &out, log_x, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Runtime(msg)) = &e;
            let _ = writeln!(stderr, "error: {msg}");
            e.code()
        }
    }
}

fn load_configs(path: &Path, deltas: Option<&[f64]>, seed: Option<u64>) -> Result<Vec<ExperimentConfig>, CliError> {
    let mut file = ConfigFile::load(path).map_err(|e| CliError::Usage(e.0))?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    let Some(deltas) = deltas else {
        return Ok(vec![file.to_experiment().map_err(|e| CliError::Usage(e.0))?]);
    };
    if file.environment != "two-point" && file.policy != "bpr2" {
        return Err(CliError::Usage(
            "sweep needs a config whose policy or environment uses `delta`".into(),
        ));
    }
    deltas
        .iter()
        .map(|&d| {
            let mut f = file.clone();
            f.delta = Some(d);
            f.experiment_id = format!("{}-delta={d}", file.experiment_id);
            f.to_experiment().map_err(|e| CliError::Usage(format!("delta={d}: {}", e.0)))
        })
        .collect()
}

fn simulate(
    path: &Path,
    deltas: Option<&[f64]>,
    opts: &RunOptions,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let configs = load_configs(path, deltas, opts.seed)?;
    let workers = match opts.workers {
        None | Some(Workers::Max) => None,
        Some(Workers::Count(n)) => Some(n),
    };
    let mut records = Vec::new();
    for config in &configs {
        let summary = estimate_regret(config, workers).map_err(classify)?;
        let meta: Vec<String> = summary
            .metadata
            .iter()
            .chain(&[("beta".to_string(), BETA_SAMPLER.to_string())])
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(stderr, "# {}: {}", summary.experiment_id, meta.join(" "));
        records.extend(OutputRecord::from_summary(&summary));
    }
    match &opts.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            write_csv(std::io::BufWriter::new(file), &records)?;
        }
        None => write_csv(stdout, &records)?,
    }
    Ok(EXIT_OK)
}

fn need<T: Copy>(value: Option<T>, flag: &str, theorem: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("`bounds {theorem}` needs --{flag}")))
}

fn domain(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn load_csv(path: &Path) -> Result<Vec<OutputRecord>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file).map_err(|e| match e {
        CsvError::Io(m) => CliError::Runtime(format!("{}: {m}", path.display())),
        CsvError::Schema(m) => CliError::Usage(format!("{}: schema mismatch: {m}", path.display())),
        CsvError::Row(m) => CliError::Usage(format!("{}: {m}", path.display())),
    })
}

fn print_bound(report: &BoundReport, stdout: &mut dyn Write) {
    let inputs: Vec<String> = report.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(stdout, "{} {}: {:.2}", report.name, inputs.join(" "), report.bound_value);
}

fn compare_bound(report: BoundReport, path: &Path, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let records = load_csv(path)?;
    if records.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", path.display())));
    }
    let mut code = EXIT_OK;
    for series in plot::group_series(&records) {
        let &(t, mean, _) = series.points.last().expect("series are never empty");
        let compared = report.clone().compare(mean);
        let holds = compared.comparison.is_some_and(|c| c.holds);
        let _ = writeln!(
            stdout,
            "{} at t={t}: empirical {mean:.2} vs bound {:.2}: {}",
            series.experiment_id,
            report.bound_value,
            if holds { "holds" } else { "VIOLATED" }
        );
        if !holds {
            code = EXIT_RUNTIME;
        }
    }
    Ok(code)
}

/// Points at which the Gaussian tail bracket is checked by `verify-proofs`.
const TAIL_POINTS: [f64; 6] = [1.0, 1.5, 2.0, 3.0, 5.0, 10.0];

fn verify_proofs(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let n = need(args.n, "n", "verify-proofs")?;
    let k = need(args.k, "K", "verify-proofs")?;
    let mut ok = true;
    for report in [bounds::step2_report(n, k), bounds::step3_report(n, k)] {
        let report = report.map_err(domain)?;
        ok &= report.passed();
        let _ = write!(stdout, "{report}");
    }
    if let (Some(delta), Some(eps)) = (args.delta, args.epsilon) {
        match bounds::verify_aith_threshold(delta, eps) {
            Ok(a) => {
                let _ = writeln!(stdout, "pull threshold (delta={delta}, epsilon={eps}): A = {a}");
            }
            Err(e @ Error::Verification { .. }) => {
                ok = false;
                let _ = writeln!(stdout, "pull threshold: FAIL {e}");
            }
            Err(e) => return Err(domain(e)),
        }
    }
    let _ = writeln!(stdout, "gaussian tail bracket");
    for x in TAIL_POINTS {
        let (lo, hi) = gauss_tail_bounds(x).map_err(domain)?;
        let tail = gauss_tail(x);
        let inside = lo <= tail && tail <= hi;
        ok &= inside;
        let _ = writeln!(
            stdout,
            "  {:<4} x={x:<5} {lo:.6e} <= {tail:.6e} <= {hi:.6e}",
            if inside { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(stdout, "{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_OK } else { EXIT_RUNTIME })
}

fn run_bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let report = match args.theorem {
        Theorem::Thm1 | Theorem::Lower => {
            let name = if args.theorem == Theorem::Thm1 { "thm1" } else { "lower" };
            let n = need(args.n, "n", name)?;
            let k = need(args.k, "K", name)?;
            let value = if args.theorem == Theorem::Thm1 {
                bounds::thm1_bound(n, k)
            } else {
                bounds::minimax_lower_bound(n, k)
            };
            BoundReport::new(name, &[("n", n as f64), ("K", k as f64)], value.map_err(domain)?)
        }
        Theorem::Thm2 => {
            let delta = need(args.delta, "delta", "thm2")?;
            BoundReport::new("thm2", &[("delta", delta)], bounds::thm2_bound(delta).map_err(domain)?)
        }
        Theorem::Thm3 => {
            let eps = need(args.epsilon, "epsilon", "thm3")?;
            if args.gaps.is_empty() {
                return Err(CliError::Usage("`bounds thm3` needs --gaps".into()));
            }
            let mut inputs: Vec<(String, f64)> = args
                .gaps
                .iter()
                .enumerate()
                .map(|(i, &g)| (format!("gap{}", i + 1), g))
                .collect();
            inputs.push(("epsilon".into(), eps));
            let mut r = BoundReport::new("thm3", &[], bounds::thm3_bound(&args.gaps, eps).map_err(domain)?);
            r.inputs = inputs;
            r
        }
        Theorem::Aith => {
            let delta = need(args.delta, "delta", "aith")?;
            let eps = need(args.epsilon, "epsilon", "aith")?;
            let a = bounds::verify_aith_threshold(delta, eps).map_err(|e| match e {
                Error::Verification { .. } => CliError::Runtime(e.to_string()),
                other => domain(other),
            })?;
            let _ = writeln!(stdout, "aith delta={delta} epsilon={eps}: {a}");
            return Ok(EXIT_OK);
        }
        Theorem::VerifyProofs => return verify_proofs(args, stdout),
        Theorem::Hoeffding => {
            let m = need(args.m, "m", "hoeffding")?;
            let x = need(args.x, "x", "hoeffding")?;
            let mut rng = RngStream::new(args.seed, 0);
            let r = bounds::hoeffding_maximal_check(m, x, args.trials, &mut rng).map_err(domain)?;
            let _ = writeln!(
                stdout,
                "hoeffding m={m} x={x} trials={}: frequency {:.6} vs bound {:.6} (+3 SE = {:.6}): {}",
                r.trials,
                r.frequency,
                r.bound,
                r.bound + 3.0 * r.stderr,
                if r.passed { "PASS" } else { "FAIL" }
            );
            return Ok(if r.passed { EXIT_OK } else { EXIT_RUNTIME });
        }
    };
    print_bound(&report, stdout);
    match &args.compare {
        Some(path) => compare_bound(report, path, stdout),
        None => Ok(EXIT_OK),
    }
}

fn run_plot(paths: &[PathBuf], out: &Path, log_x: bool, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut records = Vec::new();
    for path in paths {
        records.extend(load_csv(path)?);
    }
    if records.is_empty() {
        return Err(CliError::Usage("no data rows".into()));
    }
    if log_x && records.iter().any(|r| r.t == 0) {
        return Err(CliError::Usage("--log-x needs positive rounds".into()));
    }
    let series = plot::group_series(&records);
    std::fs::write(out, plot::render_svg(&series, log_x))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display())))?;
    let _ = writeln!(stdout, "wrote {} series to {}", series.len(), out.display());
    Ok(EXIT_OK)
}
