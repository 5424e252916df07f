//! Command-line front end: data generation, fitting, order selection,
//! Monte Carlo studies, Wasserstein evaluation and objective scoring.
//!
//! Exit codes: 0 success, 2 validation failure, 3 I/O failure, 4 strict
//! non-convergence, 5 study-shape errors (too few rows for a slope).

use clap::{Args, Parser, Subcommand};
use mixfit::family::{DataSet, KernelFamily};
use mixfit::fit::{fit, OptimizerOptions};
use mixfit::measure::{wasserstein, MixingMeasure, ParamDomain};
use mixfit::objective::{phi_objective, PhiSpec};
use mixfit::order::plug_in;
use mixfit::study::{
    fit_log_log_slope, run_order_study, run_rate_study, write_csv, render_svg_plot,
    RateStudyConfig, StudyError,
};
use mixfit::textfmt::fmt_sig;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug)]
enum CliError {
    /// Exit 2: bad flags, specs, or file contents.
    Validation(String),
    /// Exit 3: missing or unwritable files.
    Io(String),
    /// Exit 4: --strict and the optimizer did not converge.
    NotConverged,
    /// Exit 5: study output cannot support the requested summary.
    StudyShape(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::NotConverged => 4,
            CliError::StudyShape(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Validation(m) => format!("error: {m}"),
            CliError::Io(m) => format!("i/o error: {m}"),
            CliError::NotConverged => "error: optimizer did not converge (--strict)".to_string(),
            CliError::StudyShape(m) => format!("error: {m}"),
        }
    }
}

// Library-side errors are validation failures unless they came from the
// filesystem, which the CLI handles itself.
macro_rules! from_validation {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}
from_validation!(
    mixfit::family::FamilyError,
    mixfit::measure::MeasureError,
    mixfit::objective::ObjectiveError,
    mixfit::fit::FitError,
    mixfit::order::OrderError
);

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Io(m) => CliError::Io(m),
            StudyError::TooFewRows { .. } | StudyError::NonPositiveMean { .. } => {
                CliError::StudyShape(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "mixfit", version, about = "Minimum distance estimation of mixing measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OptimizerArgs {
    /// Local searches per fit
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Iteration cap per local search
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
    /// Optimizer seed; falls back to MIXFIT_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter domain as `lo hi` (univariate families)
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample i.i.d. observations from a mixture and write them to a file
    Gen {
        /// Component family, e.g. `gaussian(sigma=1,d=1)` or `poisson`
        #[arg(long)]
        family: String,
        /// Inline truth measure: `;`-separated `p theta...` atoms
        #[arg(long, conflicts_with = "truth_file")]
        truth: Option<String>,
        /// Truth measure file (one `p theta...` line per atom)
        #[arg(long)]
        truth_file: Option<PathBuf>,
        /// Number of observations
        #[arg(long)]
        n: usize,
        /// Sampling seed; falls back to MIXFIT_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        /// Output data file
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a k-atom mixing measure by minimizing an objective
    Fit {
        #[arg(long)]
        family: String,
        /// Objective: `ks`, `mmd(rbf,gamma=..)`, or `moments(order=..,theta0=..)`
        #[arg(long)]
        phi: String,
        /// Data file, one observation per line
        #[arg(long)]
        data: PathBuf,
        /// Number of atoms
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
        /// Where to write the fitted measure
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 4 when no local search converged
        #[arg(long)]
        strict: bool,
    },
    /// Select the number of components by threshold crossing
    Order {
        #[arg(long)]
        family: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        data: PathBuf,
        /// Largest order to try
        #[arg(long)]
        k_max: usize,
        /// Threshold constant override (default depends on the objective)
        #[arg(long)]
        c1: Option<f64>,
        #[command(flatten)]
        opt: OptimizerArgs,
        /// Where to write the plug-in measure
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate an objective for a measure file against a data file
    Score {
        #[arg(long)]
        family: String,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        data: PathBuf,
        /// Measure file to score
        #[arg(long)]
        measure: PathBuf,
    },
    /// Wasserstein distance between two measure files
    Wasserstein {
        /// First measure file
        #[arg(long)]
        a: PathBuf,
        /// Second measure file
        #[arg(long)]
        b: PathBuf,
        /// Wasserstein order (>= 1)
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
    },
    /// Convergence-rate study from a config file; writes CSV and SVG
    RateStudy {
        #[command(flatten)]
        study: StudyArgs,
    },
    /// Order-selection frequency study from a config file
    OrderStudy {
        #[command(flatten)]
        study: StudyArgs,
    },
}

#[derive(Args, Clone)]
struct StudyArgs {
    /// Flat `key = value` study configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path
    #[arg(long)]
    csv: PathBuf,
    /// Output SVG path (rate studies)
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Master seed override; beats the config file and MIXFIT_SEED
    #[arg(long)]
    seed: Option<u64>,
    /// Replication count override; beats the config file
    #[arg(long)]
    replications: Option<usize>,
    /// Worker thread count (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
}

fn env_seed() -> Option<u64> {
    std::env::var("MIXFIT_SEED").ok().and_then(|v| v.parse().ok())
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(env_seed).unwrap_or(0)
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_domain(spec: &Option<String>) -> Result<Option<ParamDomain>, CliError> {
    let Some(spec) = spec else { return Ok(None) };
    let nums: Vec<f64> = spec
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Validation(format!("bad domain number `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    if nums.len() != 2 {
        return Err(CliError::Validation("domain needs exactly `lo hi`".to_string()));
    }
    Ok(Some(ParamDomain::interval(nums[0], nums[1])?))
}

fn optimizer_options(opt: &OptimizerArgs) -> OptimizerOptions {
    OptimizerOptions {
        restarts: opt.restarts,
        max_iterations: opt.max_iterations,
        seed: resolve_seed(opt.seed),
        ..OptimizerOptions::default()
    }
}

fn load_inputs(
    family: &str,
    phi: &str,
    data: &PathBuf,
) -> Result<(KernelFamily, PhiSpec, DataSet), CliError> {
    let fam = KernelFamily::parse(family)?;
    let phi = PhiSpec::parse(phi)?;
    let data = DataSet::from_text(&read_file(data)?)?;
    Ok((fam, phi, data))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { family, truth, truth_file, n, seed, out } => {
            let fam = KernelFamily::parse(&family)?;
            let text = match (truth, truth_file) {
                (Some(inline), None) => inline.replace(';', "\n"),
                (None, Some(path)) => read_file(&path)?,
                _ => {
                    return Err(CliError::Validation(
                        "provide exactly one of --truth or --truth-file".to_string(),
                    ))
                }
            };
            let g = MixingMeasure::from_text(&text)?;
            let data = fam.sample_mixture(&g, n, resolve_seed(seed))?;
            write_file(&out, &data.to_text())
        }
        Command::Fit { family, phi, data, k, opt, out, strict } => {
            let (fam, phi, data) = load_inputs(&family, &phi, &data)?;
            let domain = parse_domain(&opt.domain)?;
            let res = fit(&fam, &phi, &data, k, domain.as_ref(), &optimizer_options(&opt))?;
            println!(
                "k={} objective={} converged={}",
                res.measure.k(),
                fmt_sig(res.objective),
                res.converged
            );
            if let Some(path) = out {
                write_file(&path, &res.measure.to_text())?;
            }
            if strict && !res.converged {
                return Err(CliError::NotConverged);
            }
            Ok(())
        }
        Command::Order { family, phi, data, k_max, c1, opt, out, strict } => {
            let (fam, phi, data) = load_inputs(&family, &phi, &data)?;
            let domain = parse_domain(&opt.domain)?;
            let res = plug_in(
                &fam,
                &phi,
                &data,
                k_max,
                domain.as_ref(),
                &optimizer_options(&opt),
                c1,
            )?;
            if res.undetermined {
                println!("k_hat=undetermined");
            } else {
                println!("k_hat={}", res.k_hat);
            }
            println!("a_n={}", fmt_sig(res.threshold));
            for (i, obj) in res.objectives.iter().enumerate() {
                println!("objective[{}]={}", i + 1, fmt_sig(*obj));
            }
            if let Some(path) = out {
                write_file(&path, &res.plug_in.measure.to_text())?;
            }
            if strict && !res.plug_in.converged {
                return Err(CliError::NotConverged);
            }
            Ok(())
        }
        Command::Score { family, phi, data, measure } => {
            let (fam, phi, data) = load_inputs(&family, &phi, &data)?;
            let g = MixingMeasure::from_text(&read_file(&measure)?)?;
            let value = phi_objective(&phi, &fam, &g, &data, None)?;
            println!("objective={}", fmt_sig(value));
            Ok(())
        }
        Command::Wasserstein { a, b, ell } => {
            let ga = MixingMeasure::from_text(&read_file(&a)?)?;
            let gb = MixingMeasure::from_text(&read_file(&b)?)?;
            println!("{}", fmt_sig(wasserstein(&ga, &gb, ell)?));
            Ok(())
        }
        Command::RateStudy { study } => {
            let cfg = study_config(&study)?;
            let rows = run_rate_study(&cfg)?;
            write_csv(&rows, &study.csv)?;
            let slope = fit_log_log_slope(&rows);
            if let Some(svg) = &study.svg {
                let line = slope.as_ref().ok().map(|&(s, i, _)| (s, i));
                render_svg_plot(&rows, line, svg)?;
            }
            let (s, _, stderr) = slope?;
            println!("slope={} stderr={}", fmt_sig(s), fmt_sig(stderr));
            Ok(())
        }
        Command::OrderStudy { study } => {
            let cfg = study_config(&study)?;
            let rows = run_order_study(&cfg)?;
            write_csv(&rows, &study.csv)?;
            if let Some(svg) = &study.svg {
                render_svg_plot(&rows, None, svg)?;
            }
            for row in &rows {
                println!(
                    "n={} frac_correct={}",
                    row.n,
                    fmt_sig(row.frac_correct.unwrap_or(0.0))
                );
            }
            Ok(())
        }
    }
}

fn study_config(args: &StudyArgs) -> Result<RateStudyConfig, CliError> {
    if let Some(t) = args.threads {
        // a failure here only means a pool already exists; that is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let text = read_file(&args.config)?;
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected key = value", lineno + 1))
        })?;
        kv.insert(key.trim().to_string(), value.trim().to_string());
    }
    // flags beat the file, the file beats MIXFIT_SEED
    if let Some(seed) = args.seed.or_else(|| if kv.contains_key("seed") { None } else { env_seed() }) {
        kv.insert("seed".to_string(), seed.to_string());
    }
    if let Some(reps) = args.replications {
        kv.insert("replications".to_string(), reps.to_string());
    }
    Ok(RateStudyConfig::from_pairs(&kv)?)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{}", e.message());
        std::process::exit(e.code());
    }
}
