//! Command-line front end: exact pressures, quenched averages, inequality
//! verification, convergence tables, and truncation sweeps, all driven by a
//! JSON model configuration.
//!
//! Exit codes: 0 success, 1 a verified inequality was violated, 2 bad
//! configuration or parameters, 3 capacity exceeded, 4 I/O failure.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use quenchlab_core::config::{self, Config};
use quenchlab_core::inequality::{self, CheckReport, CorollaryVariant, DisorderMode};
use quenchlab_core::limit::{self, ConvergenceMode};
use quenchlab_core::model::{instantiate, CouplingFamily, Region};
use quenchlab_core::{engine, quenched, Error, Hamiltonian};

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "quenchlab", version, about = "Finite-volume spin-glass pressure laboratory")]
struct Cli {
    /// Worker threads (default: QUENCHLAB_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON model configuration
    #[arg(long)]
    config: std::path::PathBuf,
    /// Inverse temperature (overrides the config)
    #[arg(long)]
    beta: Option<f64>,
    /// RNG seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact pressure of one realized Hamiltonian
    Pressure {
        #[command(flatten)]
        common: Common,
    },
    /// Quenched pressure: exact disorder enumeration, or Monte Carlo with --samples
    Quenched {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo disorder samples (omit for exact enumeration)
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Run inequality checks against the configured model
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check names (default: every applicable check)
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Monte Carlo samples for checks that need them
        #[arg(long, default_value_t = 2000)]
        samples: u64,
    },
    /// Finite-size pressure convergence table with the limit bound
    Limit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated box sides
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Monte Carlo samples (omit for exact enumeration)
        #[arg(long)]
        samples: Option<u64>,
        /// Write the table as CSV to this path
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Truncation error sweep against the tail bound
    Truncation {
        #[command(flatten)]
        common: Common,
        /// Comma-separated truncation cutoffs
        #[arg(long, value_delimiter = ',')]
        r_grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2000)]
        samples: u64,
        /// Write the rows as CSV to this path
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

#[derive(Serialize, Clone)]
struct Meta {
    seed: u64,
    config_hash: String,
    tool_version: &'static str,
}

struct Loaded {
    config: Config,
    meta_seed: u64,
    beta: f64,
    hash: String,
}

enum Failure {
    Violation,
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code_for(f: &Failure) -> u8 {
    match f {
        Failure::Violation => EXIT_VIOLATION,
        Failure::Io(_) => EXIT_IO,
        Failure::Core(Error::Capacity(_)) => EXIT_CAPACITY,
        Failure::Core(_) => EXIT_CONFIG,
    }
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", common.config.display())))?;
    let config = Config::from_str(&text)?;
    let run = config.run();
    let beta = common.beta.or(run.beta).unwrap_or(1.0);
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta {beta} must be finite and nonnegative")).into());
    }
    let meta_seed = common.seed.or(run.seed).unwrap_or(0);
    Ok(Loaded { config, meta_seed, beta, hash: config::content_hash(&text) })
}

impl Loaded {
    fn meta(&self) -> Meta {
        Meta {
            seed: self.meta_seed,
            config_hash: self.hash.clone(),
            tool_version: quenchlab_core::VERSION,
        }
    }
}

fn emit<T: Serialize>(payload: &T) -> Result<(), Failure> {
    let line = serde_json::to_string(payload)
        .map_err(|e| Failure::Io(format!("cannot serialize record: {e}")))?;
    println!("{line}");
    Ok(())
}

fn write_csv(path: &std::path::Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("QUENCHLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("error: could not configure {t} worker threads");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Violation => eprintln!("FAIL: at least one inequality check failed"),
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Io(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(exit_code_for(&f))
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Pressure { common } => run_pressure(&common),
        Command::Quenched { common, samples } => run_quenched(&common, samples),
        Command::Verify { common, checks, samples } => run_verify(&common, checks, samples),
        Command::Limit { common, n_list, samples, out } => run_limit(&common, n_list, samples, out),
        Command::Truncation { common, r_grid, samples, out } => {
            run_truncation(&common, r_grid, samples, out)
        }
    }
}

#[derive(Serialize)]
struct PressureRecord {
    command: &'static str,
    meta: Meta,
    beta: f64,
    n_sites: usize,
    n_terms: usize,
    log_partition: f64,
    pressure_density: f64,
}

fn run_pressure(common: &Common) -> Result<(), Failure> {
    let loaded = load(common)?;
    let family = loaded.config.family()?;
    let region = loaded.config.region()?;
    let h: Hamiltonian = instantiate(&family, &region, loaded.meta_seed)?;
    let g = engine::log_partition(&h, loaded.beta)?;
    emit(&PressureRecord {
        command: "pressure",
        meta: loaded.meta(),
        beta: loaded.beta,
        n_sites: h.region().len(),
        n_terms: h.n_terms(),
        log_partition: g.log_partition,
        pressure_density: g.pressure_density,
    })
}

#[derive(Serialize)]
struct QuenchedRecord {
    command: &'static str,
    meta: Meta,
    beta: f64,
    n_sites: usize,
    #[serde(flatten)]
    estimate: quenched::PressureEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    median: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iqr: Option<f64>,
}

fn run_quenched(common: &Common, samples: Option<u64>) -> Result<(), Failure> {
    let loaded = load(common)?;
    let family = loaded.config.family()?;
    let region = loaded.config.region()?;
    let samples = samples.or(loaded.config.run().samples);
    let (estimate, median, iqr) = match samples {
        None => (quenched::quenched_exact(&family, &region, loaded.beta)?, None, None),
        Some(n) => {
            let mc = quenched::quenched_mc(&family, &region, loaded.beta, n, loaded.meta_seed)?;
            (mc.estimate, Some(mc.median), Some(mc.iqr))
        }
    };
    emit(&QuenchedRecord {
        command: "quenched",
        meta: loaded.meta(),
        beta: loaded.beta,
        n_sites: region.len(),
        estimate,
        median,
        iqr,
    })
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    command: &'static str,
    meta: &'a Meta,
    beta: f64,
    #[serde(flatten)]
    report: &'a CheckReport,
}

const ALL_CHECKS: &[&str] = &[
    "scalar",
    "ratio",
    "telescoping",
    "corollary",
    "cl",
    "griffiths",
    "superadditivity",
    "truncation",
];

struct VerifyContext {
    family: CouplingFamily,
    region: Region,
    beta: f64,
    seed: u64,
    samples: u64,
}

impl VerifyContext {
    fn enumerable(&self) -> bool {
        quenched::ExactEnsemble::from_family(&self.family, &self.region).is_ok()
    }

    fn run_check(&self, name: &str, explicit: bool) -> Result<Vec<CheckReport>, Failure> {
        let not_applicable = |why: &str| -> Result<Vec<CheckReport>, Failure> {
            if explicit {
                Err(Error::InvalidParameter(format!("check '{name}' is not applicable: {why}")).into())
            } else {
                Ok(Vec::new())
            }
        };
        let beta = self.beta;
        match name {
            "scalar" => {
                let grid: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 0.01).collect();
                Ok(vec![inequality::scalar_toolbox_check(&grid)])
            }
            "ratio" => {
                let h: Hamiltonian = instantiate(&self.family, &self.region, self.seed)?;
                Ok(vec![inequality::ratio_identity_check(&h, beta)?])
            }
            "telescoping" => {
                let h: Hamiltonian = instantiate(&self.family, &self.region, self.seed)?;
                Ok(vec![inequality::telescoping_bound_check_all(&h, beta)?])
            }
            "corollary" => {
                if !self.enumerable() {
                    return not_applicable("disorder is not finitely supported");
                }
                let ens = quenched::ExactEnsemble::from_family(&self.family, &self.region)?;
                let mid = ens.n_terms() / 2;
                let mut reports = Vec::new();
                if ens.n_outcomes() == 1 {
                    reports.push(inequality::corollary_bound_check(
                        &ens,
                        beta,
                        mid,
                        CorollaryVariant::Nonrandom,
                    )?);
                } else {
                    reports.push(inequality::corollary_bound_check(
                        &ens,
                        beta,
                        mid,
                        CorollaryVariant::Dependent,
                    )?);
                    reports.push(inequality::corollary_bound_check(
                        &ens,
                        beta,
                        mid,
                        CorollaryVariant::Independent,
                    )?);
                }
                Ok(reports)
            }
            "cl" => {
                if !self.enumerable() {
                    return not_applicable("disorder is not finitely supported");
                }
                let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
                Ok(vec![inequality::cl_monotonicity_check(
                    &self.family,
                    &self.region,
                    beta,
                    0,
                    &grid,
                )?])
            }
            "griffiths" => {
                if !self.family.is_deterministic() {
                    return not_applicable("couplings are random");
                }
                let h: Hamiltonian = instantiate(&self.family, &self.region, self.seed)?;
                if h.terms().iter().any(|t| t.effective() < 0.0) {
                    return not_applicable("couplings are not all nonnegative");
                }
                let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
                Ok(vec![inequality::griffiths_check(&h, beta, 0, &grid)?])
            }
            "superadditivity" => {
                let side = match self.region.box_side() {
                    Some(s) if s >= 2 => s,
                    _ => return not_applicable("needs a box region with side at least 2"),
                };
                let n1 = (side / 2).max(1);
                let mode = if self.enumerable() {
                    DisorderMode::Exact
                } else {
                    DisorderMode::Mc { samples: self.samples, seed: self.seed }
                };
                Ok(vec![inequality::superadditivity_check(&self.family, side, n1, beta, mode)?])
            }
            "truncation" => {
                if self.family.is_deterministic() {
                    return not_applicable("couplings are deterministic");
                }
                let r_grid = [1.0, 3.0, 10.0];
                Ok(vec![inequality::truncation_error_check(
                    &self.family,
                    &self.region,
                    beta,
                    &r_grid,
                    self.samples,
                    self.seed,
                )?])
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown check '{other}' (known: {})",
                ALL_CHECKS.join(", ")
            ))
            .into()),
        }
    }
}

fn run_verify(common: &Common, checks: Option<Vec<String>>, samples: u64) -> Result<(), Failure> {
    let loaded = load(common)?;
    let explicit = checks.is_some();
    let requested: Vec<String> = match checks {
        Some(c) => c,
        None => loaded
            .config
            .run()
            .checks
            .unwrap_or_else(|| ALL_CHECKS.iter().map(|s| s.to_string()).collect()),
    };
    let ctx = VerifyContext {
        family: loaded.config.family()?,
        region: loaded.config.region()?,
        beta: loaded.beta,
        seed: loaded.meta_seed,
        samples,
    };
    let meta = loaded.meta();
    let mut all_passed = true;
    for name in &requested {
        for report in ctx.run_check(name, explicit)? {
            all_passed &= report.passed;
            emit(&CheckRecord { command: "verify", meta: &meta, beta: loaded.beta, report: &report })?;
        }
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

#[derive(Serialize)]
struct LimitRecord {
    command: &'static str,
    meta: Meta,
    #[serde(flatten)]
    table: limit::ConvergenceTable,
}

fn run_limit(
    common: &Common,
    n_list: Option<Vec<usize>>,
    samples: Option<u64>,
    out: Option<std::path::PathBuf>,
) -> Result<(), Failure> {
    let loaded = load(common)?;
    let family = loaded.config.family()?;
    let n_list = n_list
        .or(loaded.config.run().n_list)
        .unwrap_or_else(|| vec![2, 4, 8]);
    let samples = samples.or(loaded.config.run().samples);
    let mode = match samples {
        Some(n) => ConvergenceMode::QuenchedMc { samples: n, seed: loaded.meta_seed },
        None if family.is_deterministic() => ConvergenceMode::FerroExact,
        None => ConvergenceMode::QuenchedExact,
    };
    let table = limit::convergence_run(&family, mode, loaded.beta, &n_list)?;
    if let Some(path) = &out {
        let mut csv = String::from("n,pressure,std_error,exact,bound\n");
        for row in &table.rows {
            csv.push_str(&format!(
                "{},{:.17e},{:.17e},{},{:.17e}\n",
                row.n, row.pressure, row.std_error, row.exact, row.bound
            ));
        }
        write_csv(path, &csv)?;
    }
    let violated = !table.flagged_pairs.is_empty();
    emit(&LimitRecord { command: "limit", meta: loaded.meta(), table })?;
    if violated {
        Err(Failure::Violation)
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct TruncationRecord {
    command: &'static str,
    meta: Meta,
    beta: f64,
    rows: Vec<inequality::TruncationRow>,
    #[serde(flatten)]
    report: CheckReport,
}

fn run_truncation(
    common: &Common,
    r_grid: Option<Vec<f64>>,
    samples: u64,
    out: Option<std::path::PathBuf>,
) -> Result<(), Failure> {
    let loaded = load(common)?;
    let family = loaded.config.family()?;
    let region = loaded.config.region()?;
    let r_grid = r_grid
        .or(loaded.config.run().r_grid)
        .unwrap_or_else(|| vec![1.0, 3.0, 10.0, 30.0, 100.0]);
    let rows =
        inequality::truncation_sweep(&family, &region, loaded.beta, &r_grid, samples, loaded.meta_seed)?;
    let report = inequality::truncation_error_check(
        &family,
        &region,
        loaded.beta,
        &r_grid,
        samples,
        loaded.meta_seed,
    )?;
    if let Some(path) = &out {
        let mut csv = String::from("r,diff_mean,diff_std_error,bound\n");
        for row in &rows {
            csv.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e}\n",
                row.r, row.diff_mean, row.diff_std_error, row.bound
            ));
        }
        write_csv(path, &csv)?;
    }
    let passed = report.passed;
    emit(&TruncationRecord { command: "truncation", meta: loaded.meta(), beta: loaded.beta, rows, report })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}
