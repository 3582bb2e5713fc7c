use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fbdrift::fitness::Problem;
use fbdrift_cli::commands::{self, RunOptions};
use fbdrift_cli::{CliError, ExperimentConfig, EXIT_PASS, EXIT_VIOLATION};

#[derive(Parser)]
#[command(name = "fbdrift", version, about = "Fixed-budget drift bounds for the (1+1) EA, checked by Monte Carlo")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = fbdrift_cli::WORKERS_ENV, default_value_t = 0)]
    workers: usize,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write per-checkpoint statistics and hitting times.
    Simulate,
    /// Tabulate every bound prediction over a range of budgets.
    Bounds(BoundsArgs),
    /// Run an ensemble and check every applicable prediction against it.
    Verify,
    /// Exact scan of the mgf drift bound (Lemmas 5.3/5.5) over n.
    MgfCheck(MgfArgs),
}

#[derive(Args)]
struct BoundsArgs {
    /// onemax or leadingones (taken from --config when omitted).
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long)]
    n: Option<usize>,
    /// Explicit budgets, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "t_range")]
    t: Vec<u64>,
    /// Budget range start:end:step (inclusive).
    #[arg(long)]
    t_range: Option<String>,
    /// Constant overrides key=value (repeatable).
    #[arg(long = "constant", value_parser = parse_constant)]
    constants: Vec<(String, f64)>,
}

#[derive(Args)]
struct MgfArgs {
    /// Problem sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 200, 400])]
    n: Vec<usize>,
    /// r = r_constant / n in the compensated step.
    #[arg(long, default_value_t = 0.0)]
    r_constant: f64,
    /// Number of log-spaced lambda values.
    #[arg(long, default_value_t = 24)]
    grid_points: usize,
}

fn parse_constant(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_range(s: &str) -> Result<Vec<u64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Config(format!("t range `{s}` is not start:end:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let num = |p: &str| p.trim().parse::<u64>().map_err(|_| bad());
    commands::t_range(num(parts[0])?, num(parts[1])?, num(parts[2])?)
}

fn require_config(global: &GlobalArgs) -> Result<ExperimentConfig, CliError> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs --config <path>".into()))?;
    ExperimentConfig::load(path)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let opts = RunOptions {
        seed: cli.global.seed,
        workers: cli.global.workers,
        out: cli.global.out.clone(),
    };
    match cli.command {
        Command::Simulate => {
            let cfg = require_config(&cli.global)?;
            let out = commands::cmd_simulate(&cfg, &opts)?;
            print!("{}", out.summary);
            Ok(EXIT_PASS)
        }
        Command::Verify => {
            let cfg = require_config(&cli.global)?;
            let out = commands::cmd_verify(&cfg, &opts)?;
            print!("{}", out.text);
            Ok(if out.all_pass() { EXIT_PASS } else { EXIT_VIOLATION })
        }
        Command::Bounds(args) => {
            let cfg = match &cli.global.config {
                Some(p) => Some(ExperimentConfig::load(p)?),
                None => None,
            };
            let problem = args
                .problem
                .or(cfg.as_ref().map(|c| c.problem))
                .ok_or_else(|| CliError::Config("bounds needs --problem or --config".into()))?;
            let n = args
                .n
                .or(cfg.as_ref().map(|c| c.n))
                .ok_or_else(|| CliError::Config("bounds needs --n or --config".into()))?;
            let ts = match (&args.t_range, args.t.is_empty()) {
                (Some(r), _) => parse_range(r)?,
                (None, false) => args.t.clone(),
                (None, true) => cfg
                    .as_ref()
                    .map(|c| c.checkpoints.clone())
                    .filter(|c| !c.is_empty())
                    .ok_or_else(|| CliError::Config("bounds needs --t, --t-range or checkpoints".into()))?,
            };
            let mut constants: BTreeMap<String, f64> = cfg.map(|c| c.constants).unwrap_or_default();
            constants.extend(args.constants);
            let text = commands::cmd_bounds(problem, n, &ts, &constants, cli.global.out.as_deref())?;
            print!("{text}");
            Ok(EXIT_PASS)
        }
        Command::MgfCheck(args) => {
            let report = commands::cmd_mgf_check(&args.n, args.r_constant, args.grid_points)?;
            if let Some(dir) = &cli.global.out {
                std::fs::create_dir_all(dir).map_err(|e| fbdrift_cli::error::io_error(dir, e))?;
                let path = dir.join(commands::MGF_FILE);
                std::fs::write(&path, &report.text).map_err(|e| fbdrift_cli::error::io_error(&path, e))?;
            }
            print!("{}", report.text);
            Ok(if report.stable() { EXIT_PASS } else { EXIT_VIOLATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { fbdrift_cli::EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fbdrift: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
