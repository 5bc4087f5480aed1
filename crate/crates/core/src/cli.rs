//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a solver fails, a check fails or some
//! episodes fail, 2 for unusable input.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bound::{solve, BoundSolution, SolveStatus, SolverFlag};
use crate::config::{BoundConfig, ExperimentConfig, InstanceSpec};
use crate::error::{Error, Result};
use crate::harness::{run_monte_carlo, write_aggregates, write_traces, MonteCarloResult};
use crate::selfcheck::{format_report, run_selfcheck, SelfcheckOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ossb", version, about = "Regret lower bounds and OSSB simulations for structured bandits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the lower-bound problem for one instance and print it as JSON.
    SolveBound(SolveBoundArgs),
    /// Run a Monte-Carlo experiment and write CSV files.
    Run(RunArgs),
    /// Cross-check the solvers against the grid oracle and test invariants.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct SolveBoundArgs {
    /// JSON file with `structure`, `model`, `theta` and optional `solver`.
    #[arg(long, required_unless_present = "instance", conflicts_with = "instance")]
    pub config: Option<PathBuf>,
    /// The same JSON object inline.
    #[arg(long)]
    pub instance: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config and `OSSB_OUT_DIR`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Overrides `base_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Accept OSSB with `epsilon = 0`.
    #[arg(long)]
    pub allow_epsilon_zero: bool,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Scale applied to every tolerance; a test hook.
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}

/// Subset of [`BoundSolution`] printed by `solve-bound`.
#[derive(Debug, Serialize)]
pub struct BoundReport<'a> {
    pub rates: &'a [f64],
    pub value: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub max_violation: f64,
    pub optimal_arm: usize,
    pub flags: &'a [SolverFlag],
}

impl<'a> From<&'a BoundSolution> for BoundReport<'a> {
    fn from(s: &'a BoundSolution) -> Self {
        BoundReport {
            rates: &s.rates,
            value: s.value,
            status: s.status,
            iterations: s.iterations,
            max_violation: s.max_violation,
            optimal_arm: s.optimal_arm,
            flags: &s.flags,
        }
    }
}

/// Seed and effective configuration of a run, written next to the CSVs.
#[derive(Debug, Serialize)]
pub struct RunMeta<'a> {
    pub base_seed: u64,
    pub config: &'a ExperimentConfig,
    pub instances: Vec<InstanceSpec>,
    pub failures: Vec<String>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::InvalidPolicy(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parse `args` and execute; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::SolveBound(a) => cmd_solve_bound(&a, out),
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Selfcheck(a) => cmd_selfcheck(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn cmd_solve_bound(args: &SolveBoundArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = match (&args.config, &args.instance) {
        (Some(path), _) => BoundConfig::load(path)?,
        (None, Some(text)) => BoundConfig::from_json(text)?,
        (None, None) => return Err(Error::Config("pass --config or --instance".into())),
    };
    let sol = solve(&cfg.structure, cfg.model, &cfg.theta, &cfg.solver, None)?;
    let json = serde_json::to_string_pretty(&BoundReport::from(&sol))
        .map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{json}")?;
    Ok(EXIT_OK)
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(p) = args.parallelism {
        cfg.parallelism = p;
    }
    cfg.allow_epsilon_zero |= args.allow_epsilon_zero;
    cfg.output.dir = args.out.clone().unwrap_or_else(|| cfg.output_dir());
    let instances = cfg.instances()?;
    let mc = cfg.monte_carlo();
    writeln!(out, "seed: {}", cfg.base_seed)?;

    let mut results: Vec<MonteCarloResult> = Vec::with_capacity(cfg.policies.len());
    for policy in &cfg.policies {
        results.push(run_monte_carlo(&instances, policy, &mc)?);
    }

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let create = |name: &str| {
        let path = dir.join(name);
        fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    };
    write_traces(std::io::BufWriter::new(create(&cfg.output.traces)?), &results)?;
    write_aggregates(std::io::BufWriter::new(create(&cfg.output.aggregate)?), &results)?;

    let failures: Vec<String> = results
        .iter()
        .flat_map(|r| {
            r.failures.iter().map(move |f| {
                format!("{} instance {} trial {}: {}", r.policy, f.instance_id, f.trial, f.error)
            })
        })
        .collect();
    let meta = RunMeta {
        base_seed: cfg.base_seed,
        config: &cfg,
        instances: instances.iter().map(InstanceSpec::from).collect(),
        failures: failures.clone(),
    };
    let meta = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("run_meta.json"), meta + "\n")?;

    write!(out, "{}", summary_table(&results))?;
    writeln!(out, "wrote {}", dir.display())?;
    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    writeln!(err, "{} episodes failed:", failures.len())?;
    for f in &failures {
        writeln!(err, "  {f}")?;
    }
    Ok(EXIT_FAILURE)
}

/// Final mean regret with its 95% half-width, per policy.
pub fn summary_table(results: &[MonteCarloResult]) -> String {
    let width = results.iter().map(|r| r.policy.len()).max().unwrap_or(6).max(6);
    let mut s = format!(
        "{:width$}  {:>8}  {:>12}  {:>10}  {:>5}  {:>6}\n",
        "policy", "round", "mean regret", "ci95", "n", "failed"
    );
    for r in results {
        let a = &r.aggregate;
        let Some(last) = a.rounds.len().checked_sub(1) else {
            s.push_str(&format!("{:width$}  (no data)\n", r.policy));
            continue;
        };
        s.push_str(&format!(
            "{:width$}  {:>8}  {:>12.3}  {:>10.3}  {:>5}  {:>6}\n",
            r.policy,
            a.rounds[last],
            a.mean[last],
            a.ci95[last],
            a.n,
            r.failures.len()
        ));
    }
    s
}

pub fn cmd_selfcheck(args: &SelfcheckArgs, out: &mut dyn Write) -> Result<i32> {
    let opts = SelfcheckOptions {
        tolerance_scale: args.tolerance_scale,
        ..SelfcheckOptions::default()
    };
    let outcomes = run_selfcheck(&opts);
    write!(out, "{}", format_report(&outcomes))?;
    Ok(if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
