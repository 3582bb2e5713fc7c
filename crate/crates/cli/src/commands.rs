//! The four subcommands, as library functions returning their artefacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fbdrift::concentration::{bracket_window, expected_opt_time_lo, lambda_grid, verify_mgf_drift_bound, MgfCheck};
use fbdrift::ea::Budget;
use fbdrift::fitness::Problem;
use fbdrift::montecarlo::{
    compare_bounds, empirical_survival, run_ensemble, stats::ALPHA, ComparisonReport, EnsembleConfig, EnsembleStats,
};
use fbdrift::potential::{survival_from_djwz, SurvivalCurve};
use fbdrift::predict::{self, BoundPrediction, Constants, Evidence, PredictionValue, THM51_WINDOW_C};

use crate::config::ExperimentConfig;
use crate::error::{io_error, CliError};
use crate::format::{cell, fmt_g};

pub const STATS_HEADER: &str = "checkpoint,mean,variance,q05,q25,q50,q75,q95,inside_bracket,trials";
pub const HITTING_HEADER: &str = "trial,hitting_time,censored";
pub const BOUNDS_HEADER: &str =
    "t,thm35_sqrt_e,thm35_exp,thm36_linear,thm36_log,thm43_additive,thm51_lower,thm51_point,thm51_upper";

pub const STATS_FILE: &str = "stats.csv";
pub const HITTING_FILE: &str = "hitting_times.csv";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const VERIFY_FILE: &str = "verify_report.txt";
pub const MGF_FILE: &str = "mgf_check.txt";

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the thread pool decide.
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl RunOptions {
    pub fn apply(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = cfg.clone();
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn ensemble_config(cfg: &ExperimentConfig, workers: usize) -> EnsembleConfig {
    EnsembleConfig {
        problem: cfg.problem,
        n: cfg.n,
        trials: cfg.trials,
        budget: cfg.budget.0,
        checkpoints: cfg.checkpoints.clone(),
        master_seed: cfg.master_seed,
        simulator: cfg.simulator.clone(),
        workers,
    }
}

/// Constants with defaults filled in. The mgf constant behind the bracket
/// calibration is computed only when some budget lies in the bracket window.
fn resolved_constants(problem: Problem, n: usize, ts: &[u64], given: &Constants) -> Result<Constants, CliError> {
    let mut c = predict::default_constants();
    c.extend(given.iter().map(|(k, v)| (k.clone(), *v)));
    let (lo, hi) = bracket_window(n, c[THM51_WINDOW_C]);
    let needs_bracket = problem == Problem::LeadingOnes
        && n >= 2
        && ts.iter().any(|&t| (lo..=hi).contains(&(t as f64)));
    if needs_bracket {
        c = predict::resolve_constants(problem, n, &c)?;
    }
    Ok(c)
}

fn bracket_at(n: usize, t: u64, c: &Constants) -> Option<(f64, f64)> {
    match predict::lookup("thm51_bracket").ok()?.predict(n, t, c).ok()?.value {
        PredictionValue::Bracket { lower, upper } => Some((lower, upper)),
        _ => None,
    }
}

pub struct SimulateOutput {
    pub stats: EnsembleStats,
    pub stats_csv: String,
    pub hitting_csv: String,
    pub stats_path: PathBuf,
    pub hitting_path: PathBuf,
    pub summary: String,
}

pub fn stats_csv(stats: &EnsembleStats, constants: &Constants) -> Result<String, CliError> {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for cs in &stats.checkpoints {
        let inside = if stats.problem == Problem::LeadingOnes {
            bracket_at(stats.n, cs.checkpoint, constants)
                .map(|(lo, hi)| stats.inside(cs.checkpoint, lo, hi))
                .transpose()?
        } else {
            None
        };
        let q = cs.quantiles;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            cs.checkpoint,
            fmt_g(cs.mean),
            fmt_g(cs.variance),
            fmt_g(q[0]),
            fmt_g(q[1]),
            fmt_g(q[2]),
            fmt_g(q[3]),
            fmt_g(q[4]),
            inside.map(|c| c.to_string()).unwrap_or_else(|| "NA".into()),
            stats.trials
        )
        .expect("writing to a string");
    }
    Ok(out)
}

pub fn hitting_csv(stats: &EnsembleStats) -> String {
    let mut out = String::from(HITTING_HEADER);
    out.push('\n');
    for (i, h) in stats.hitting_times.iter().enumerate() {
        let (t, censored) = match *h {
            fbdrift::ea::HittingTime::Hit(t) => (t, 0),
            fbdrift::ea::HittingTime::Censored(b) => (b, 1),
        };
        writeln!(out, "{i},{t},{censored}").expect("writing to a string");
    }
    out
}

pub fn cmd_simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SimulateOutput, CliError> {
    let cfg = opts.apply(cfg);
    ensure_dir(&cfg.output_dir)?;
    let stats = run_ensemble(&ensemble_config(&cfg, opts.workers))?;
    let constants = resolved_constants(cfg.problem, cfg.n, &cfg.checkpoints, &cfg.constants)?;
    let stats_text = stats_csv(&stats, &constants)?;
    let hitting_text = hitting_csv(&stats);
    let stats_path = cfg.output_dir.join(STATS_FILE);
    let hitting_path = cfg.output_dir.join(HITTING_FILE);
    write_file(&stats_path, &stats_text)?;
    write_file(&hitting_path, &hitting_text)?;

    let hs = stats.hitting_sample();
    let mut summary = format!(
        "simulated {} trials of {} (n = {}, simulator {}, master seed {})\n",
        stats.trials, stats.problem, stats.n, stats.simulator, stats.master_seed
    );
    for cs in &stats.checkpoints {
        writeln!(summary, "  t = {:>10}: mean {} (variance {})", cs.checkpoint, fmt_g(cs.mean), fmt_g(cs.variance))
            .expect("writing to a string");
    }
    let (m, _) = hs.mean_variance();
    writeln!(
        summary,
        "  hitting time: {} hits (mean {}), {} censored",
        hs.values.len(),
        if hs.values.is_empty() { "NA".into() } else { fmt_g(m) },
        hs.censored_count
    )
    .expect("writing to a string");
    writeln!(summary, "  wrote {} and {}", stats_path.display(), hitting_path.display()).expect("writing to a string");

    Ok(SimulateOutput {
        stats,
        stats_csv: stats_text,
        hitting_csv: hitting_text,
        stats_path,
        hitting_path,
        summary,
    })
}

/// One CSV row of every prediction at `t`; `NA` where a bound does not apply
/// to the problem or `t` is outside its validity range.
fn bounds_row(problem: Problem, n: usize, t: u64, c: &Constants) -> String {
    let value = |id: &str| -> Option<BoundPrediction> {
        let p = predict::lookup(id).ok()?;
        if p.problem() != problem {
            return None;
        }
        p.predict(n, t, c).ok()
    };
    let lower = |id: &str| value(id).map(|p| p.primary());
    let bracket = value("thm51_bracket").and_then(|p| match p.value {
        PredictionValue::Bracket { lower, upper } => Some((lower, upper)),
        _ => None,
    });
    [
        t.to_string(),
        cell(lower("thm35_sqrt_e")),
        cell(lower("thm35_exp")),
        cell(lower("thm36_linear")),
        cell(lower("thm36_log")),
        cell(lower("thm43_additive")),
        cell(bracket.map(|b| b.0)),
        cell(lower("thm51_point")),
        cell(bracket.map(|b| b.1)),
    ]
    .join(",")
}

pub fn bounds_csv(problem: Problem, n: usize, ts: &[u64], given: &Constants) -> Result<String, CliError> {
    if n < 2 {
        return Err(CliError::Config("bounds need n >= 2".into()));
    }
    let c = resolved_constants(problem, n, ts, given)?;
    let mut out = String::from(BOUNDS_HEADER);
    out.push('\n');
    for &t in ts {
        out.push_str(&bounds_row(problem, n, t, &c));
        out.push('\n');
    }
    Ok(out)
}

/// Budgets `start, start + step, ...` up to `end` inclusive.
pub fn t_range(start: u64, end: u64, step: u64) -> Result<Vec<u64>, CliError> {
    if step == 0 || end < start {
        return Err(CliError::Config("t range needs step > 0 and end >= start".into()));
    }
    Ok((start..=end).step_by(step as usize).collect())
}

pub fn cmd_bounds(problem: Problem, n: usize, ts: &[u64], constants: &Constants, out: Option<&Path>) -> Result<String, CliError> {
    let text = bounds_csv(problem, n, ts, constants)?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join(BOUNDS_FILE), &text)?;
    }
    Ok(text)
}

/// Theorem 4.2 for LeadingOnes on the adjusted value (all-ones counts
/// `n + 1`): `E[V_t] >= E[V'_0] + (2/(en)) sum_{s<t} P(s<T) - P(T <= t)`,
/// where `E[V'_0] = 1` exactly under uniform initialisation.
fn additive_survival_prediction(id: &str, n: usize, t: u64, survival: &SurvivalCurve, p_hit: f64) -> BoundPrediction {
    let delta = 2.0 / (std::f64::consts::E * n as f64);
    let value = 1.0 + delta * survival.truncated(t as usize).total() - p_hit;
    BoundPrediction {
        theorem_id: id.to_string(),
        n,
        t,
        value: PredictionValue::Lower(value),
        slack: 0.0,
        constants: [("delta".to_string(), delta)].into_iter().collect(),
        evidence: Evidence::NotRejected,
    }
}

pub struct VerifyOutcome {
    pub report: ComparisonReport,
    pub text: String,
    pub path: PathBuf,
}

impl VerifyOutcome {
    pub fn all_pass(&self) -> bool {
        self.report.all_pass()
    }
}

pub fn cmd_verify(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<VerifyOutcome, CliError> {
    let cfg = opts.apply(cfg);
    ensure_dir(&cfg.output_dir)?;
    if cfg.n < 2 {
        return Err(CliError::Config("verify needs n >= 2".into()));
    }
    let stats = run_ensemble(&ensemble_config(&cfg, opts.workers))?;
    let constants = resolved_constants(cfg.problem, cfg.n, &cfg.checkpoints, &cfg.constants)?;

    let mut predictions = Vec::new();
    let mut provenance = Vec::new();
    for &t in &cfg.checkpoints {
        for p in predict::for_problem(cfg.problem) {
            if let Ok(pred) = p.predict(cfg.n, t, &constants) {
                predictions.push(pred);
            }
        }
    }
    if cfg.problem == Problem::LeadingOnes {
        if let Some(&last) = cfg.checkpoints.last() {
            let emp = empirical_survival(&stats, last as usize + 1)?;
            provenance.push(("thm42_additive_empirical", emp.provenance().as_str()));
            let djwz = survival_from_djwz(cfg.n, last + 1).ok();
            if djwz.is_some() {
                provenance.push(("thm42_additive_djwz", "djwz-lower-bound"));
            }
            for &t in &cfg.checkpoints {
                let p_hit = 1.0 - emp.probs()[t as usize];
                predictions.push(additive_survival_prediction("thm42_additive_empirical", cfg.n, t, &emp, p_hit));
                if let Some(d) = &djwz {
                    let p_hit = 1.0 - d.probs()[t as usize];
                    predictions.push(additive_survival_prediction("thm42_additive_djwz", cfg.n, t, d, p_hit));
                }
            }
        }
    }
    let report = compare_bounds(&stats, &predictions, ALPHA)?;
    let text = verify_text(&cfg, &stats, &constants, &provenance, &report);
    let path = cfg.output_dir.join(VERIFY_FILE);
    write_file(&path, &text)?;
    Ok(VerifyOutcome { report, text, path })
}

fn verify_text(
    cfg: &ExperimentConfig,
    stats: &EnsembleStats,
    constants: &Constants,
    provenance: &[(&str, &str)],
    report: &ComparisonReport,
) -> String {
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "fbdrift verify report").unwrap();
    writeln!(w, "problem: {}", cfg.problem).unwrap();
    writeln!(w, "n: {}", cfg.n).unwrap();
    writeln!(w, "trials: {}", cfg.trials).unwrap();
    match cfg.budget.0 {
        Budget::Steps(b) => writeln!(w, "budget: {b}").unwrap(),
        Budget::UntilOptimum => writeln!(w, "budget: optimum").unwrap(),
    }
    writeln!(w, "master_seed: {}", stats.master_seed).unwrap();
    writeln!(w, "simulator: {}", stats.simulator).unwrap();
    writeln!(w, "alpha: {}", fmt_g(report.alpha)).unwrap();
    writeln!(w, "constants:").unwrap();
    for (k, v) in constants {
        writeln!(w, "  {k} = {}", fmt_g(*v)).unwrap();
    }
    writeln!(w, "survival curves:").unwrap();
    if provenance.is_empty() {
        writeln!(w, "  none used").unwrap();
    }
    for (id, prov) in provenance {
        writeln!(w, "  {id}: {prov}").unwrap();
    }
    if cfg.problem == Problem::LeadingOnes {
        if let Ok(et) = expected_opt_time_lo(cfg.n) {
            writeln!(w, "expected optimization time: {}", fmt_g(et)).unwrap();
        }
    }
    writeln!(w, "results:").unwrap();
    for e in &report.entries {
        writeln!(
            w,
            "{} {} t={} mean={} se={} limit={} threshold={}{} | {}",
            e.verdict.as_str(),
            e.theorem_id,
            e.t,
            fmt_g(e.mean),
            fmt_g(e.std_error),
            fmt_g(e.limit),
            fmt_g(e.threshold),
            e.inside_fraction
                .map(|f| format!(" inside={}", fmt_g(f)))
                .unwrap_or_default(),
            e.detail
        )
        .unwrap();
    }
    writeln!(w, "overall: {}", if report.all_pass() { "PASS" } else { "FAIL" }).unwrap();
    s
}

pub struct MgfReport {
    pub checks: Vec<MgfCheck>,
    /// Largest relative deviation of a `c` from the mean of all `c`.
    pub max_rel_deviation: f64,
    pub text: String,
}

/// Allowed relative deviation of the per-`n` constants from their mean.
pub const MGF_STABILITY: f64 = 0.2;

impl MgfReport {
    pub fn stable(&self) -> bool {
        self.checks.iter().all(|c| c.c.is_finite()) && self.max_rel_deviation <= MGF_STABILITY
    }
}

/// Exact mgf scan for each `n` with `r = r_constant / n`.
pub fn cmd_mgf_check(ns: &[usize], r_constant: f64, grid_points: usize) -> Result<MgfReport, CliError> {
    if ns.is_empty() || ns.iter().any(|&n| n < 10) {
        return Err(CliError::Config("mgf-check needs at least one n, each n >= 10".into()));
    }
    if grid_points < 2 {
        return Err(CliError::Config("mgf-check needs at least two grid points".into()));
    }
    let checks = ns
        .iter()
        .map(|&n| verify_mgf_drift_bound(n, &lambda_grid(n, grid_points), r_constant / n as f64))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = checks.iter().map(|c| c.c).sum::<f64>() / checks.len() as f64;
    let max_rel_deviation = checks.iter().map(|c| (c.c - mean).abs() / mean).fold(0.0, f64::max);

    let mut text = String::new();
    writeln!(text, "mgf check: ln E[exp(lambda D)] <= c lambda^2 n, D = g(X') - g(X) + 1 + r").unwrap();
    writeln!(text, "r = {} / n, {} log-spaced lambda values in [1/n^2, 1/(2en)]", fmt_g(r_constant), grid_points).unwrap();
    writeln!(text, "n,c,c_linearized,worst_state,worst_lambda,lambda_min,lambda_max").unwrap();
    for c in &checks {
        writeln!(
            text,
            "{},{},{},{},{},{},{}",
            c.n,
            fmt_g(c.c),
            fmt_g(c.c_linearized),
            c.worst_state,
            fmt_g(c.worst_lambda),
            fmt_g(c.lambda_min),
            fmt_g(c.lambda_max)
        )
        .unwrap();
    }
    writeln!(text, "mean c = {}, max relative deviation = {}", fmt_g(mean), fmt_g(max_rel_deviation)).unwrap();
    let report = MgfReport {
        checks,
        max_rel_deviation,
        text: String::new(),
    };
    writeln!(text, "stability (within ±20%): {}", if report.stable() { "PASS" } else { "FAIL" }).unwrap();
    Ok(MgfReport { text, ..report })
}
