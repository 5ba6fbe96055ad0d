//! Command-line front end: `solve`, `simulate`, `sweep`, `compare`.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ehstore::analysis::stability_limit_constant;
use ehstore::harness::output::{
    write_compare, write_solution, write_stats, write_sweep, write_tail,
};
use ehstore::harness::{compare_policies, run_sweep, run_trace, ConfigFile, PolicySpec};
use ehstore::{DemandPolicy, Error, Result};

#[derive(Parser)]
#[command(
    name = "ehsim",
    version,
    about = "Energy-harvesting battery underflow analysis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured policy's balance equation and report stability.
    Solve(Common),
    /// Simulate one scenario; writes trace statistics and a tail table.
    Simulate(Common),
    /// Underflow probability over the `[sweep]` grid.
    Sweep(Common),
    /// Mean service rate of the `[compare]` policies.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the total frame count (burn-in included).
    #[arg(long)]
    frames: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replications and grid rows.
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load(args: &Common) -> Result<ConfigFile> {
    if args.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let mut file = ConfigFile::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        file.scenario.seed = seed;
    }
    if let Some(frames) = args.frames {
        file.scenario.frames = frames;
    }
    file.scenario.validate()?;
    Ok(file)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn tail_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.tail.csv"))
}

fn solve(args: &Common) -> Result<()> {
    let file = load(args)?;
    let s = &file.scenario;
    let model = s.flow_model();
    if let PolicySpec::Fixed(DemandPolicy::Constant(p)) = s.policy {
        let limit = stability_limit_constant(&model)?;
        eprintln!("stability limit for constant demand: {limit:.6}; configured level {p}");
    }
    let resolved = s.resolve_policy()?;
    let solution = resolved
        .solution
        .ok_or_else(|| Error::Config("no_storage has no balance equation to solve".into()))?;
    let label = s.policy.label();
    if let PolicySpec::Solved { family, theta } = s.policy {
        let name = family.parameter_name();
        eprintln!(
            "{label}: theta = {theta:.6e} -> {name} = {:.9}, |MGF - 1| = {:.3e}, E{{z}} = {:.6}",
            solution.policy_parameter, solution.mgf_residual, solution.mean_net_flow
        );
    } else {
        eprintln!(
            "{label}: decay rate theta = {:.6e}, E{{z}} = {:.6}",
            solution.theta, solution.mean_net_flow
        );
    }
    write_solution(sink(&args.out)?, label, &solution)
}

fn simulate(args: &Common) -> Result<()> {
    let file = load(args)?;
    let stats = run_trace(&file.scenario, args.workers)?;
    if let Err(msg) = &stats.tail {
        eprintln!("tail fit unavailable: {msg}");
    }
    write_stats(sink(&args.out)?, &stats)?;
    match &args.out {
        Some(p) => write_tail(File::create(tail_path(p))?, &stats),
        None => {
            println!();
            write_tail(io::stdout().lock(), &stats)
        }
    }
}

/// Exit code of the first failed row, if any.
fn first_failure<'a>(errors: impl Iterator<Item = &'a (i32, String)>) -> Option<i32> {
    let mut code = None;
    for (c, msg) in errors {
        eprintln!("row failed: {msg}");
        code.get_or_insert(*c);
    }
    code
}

fn sweep(args: &Common) -> Result<Option<i32>> {
    let file = load(args)?;
    let plan = file
        .sweep
        .ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    let rows = run_sweep(&file.scenario, &plan, args.workers)?;
    write_sweep(sink(&args.out)?, &rows)?;
    Ok(first_failure(
        rows.iter().filter_map(|r| r.result.as_ref().err()),
    ))
}

fn compare(args: &Common) -> Result<Option<i32>> {
    let file = load(args)?;
    let plan = file
        .compare
        .ok_or_else(|| Error::Config("config has no [compare] section".into()))?;
    let rows = compare_policies(&file.scenario, &plan, args.workers)?;
    write_compare(sink(&args.out)?, &rows)?;
    Ok(first_failure(
        rows.iter().filter_map(|r| r.result.as_ref().err()),
    ))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors are configuration errors (exit 1), not clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a).map(|_| None),
        Command::Simulate(a) => simulate(a).map(|_| None),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
    };
    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ehsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
