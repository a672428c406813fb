//! Subcommands of the `clonebound` binary.
//!
//! Every command returns an [`Outcome`] holding its output and exit code.
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Read as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clonebound_core::bounds::{
    clone_bound, estimation_bound, output_states, BoundOptions, CloneTask, CopyCount,
};
use clonebound_core::numerics::{Mat, C64};
use clonebound_core::oracle::{
    maximize_fidelity, two_state_closed_form, OracleOptions, OracleResult,
};
use clonebound_core::states::{
    gram_power, random_family, tensor_power_check, two_state_family, PureStateFamily,
};

use crate::error::{CliError, EXIT_NUMERICAL};
use crate::format::{
    significant, to_json, BoundJson, CheckJson, CopiesField, EstimationJson, OracleJson,
    OracleReportJson, TaskFile,
};
use crate::parallel::maximize_fidelity_parallel;

/// Deviation accepted by `check`.
pub const CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "clonebound",
    version,
    about = "Fidelity lower bounds for state-dependent cloning and state estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Task or family JSON file ("-" for stdin).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Report format (default: csv for sweep, json otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for random restarts and generated families.
    #[arg(long, global = true, env = "CLONEBOUND_SEED")]
    pub seed: Option<u64>,

    /// Oracle restarts (default 50 up to three states, 200 beyond).
    #[arg(long, global = true)]
    pub restarts: Option<usize>,

    /// Tolerance of the sign condition on the chosen pattern.
    #[arg(long, global = true, default_value_t = clonebound_core::bounds::FEASIBILITY_TOL)]
    pub tol: f64,

    /// Also run the numerical oracle.
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Cap on d^M for the explicit tensor-power check.
    #[arg(long, global = true, default_value_t = clonebound_core::states::DEFAULT_MAX_DIM)]
    pub max_dim: usize,

    /// Run oracle restarts on all cores.
    #[arg(long, global = true)]
    pub parallel: bool,

    /// Input copies M (overrides the file).
    #[arg(short = 'M', long = "copies-in", global = true)]
    pub copies_in: Option<u32>,

    /// Output copies N, an integer or "inf" (overrides the file).
    #[arg(short = 'N', long = "copies-out", global = true)]
    pub copies_out: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Cloning fidelity lower bound and the cloner attaining it.
    Bound,
    /// State-estimation (N = inf) lower bound.
    Estimate,
    /// Numerically maximize the global fidelity.
    Oracle,
    /// Two-state bound over a grid of real overlaps.
    Sweep(SweepArgs),
    /// Verify the tensor-power Gram identity with explicit vectors.
    Check,
    /// Emit a random family as task JSON.
    Rand(RandArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Comma-separated priors of the two states.
    #[arg(long, default_value = "0.5,0.5")]
    pub priors: String,
}

#[derive(Debug, Clone, Args)]
pub struct RandArgs {
    /// Number of states.
    #[arg(long)]
    pub states: usize,
    /// Hilbert-space dimension.
    #[arg(long)]
    pub dim: usize,
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn failed(e: &CliError) -> Self {
        Self {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Runs one command. `--output` is honored here; the caller prints whatever
/// is left in the outcome.
pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Bound => cmd_bound(cli),
        Command::Estimate => cmd_estimate(cli),
        Command::Oracle => cmd_oracle(cli),
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::Check => cmd_check(cli),
        Command::Rand(args) => cmd_rand(cli, args),
    };
    let mut outcome = match result {
        Ok(o) => o,
        Err(e) => return Outcome::failed(&e),
    };
    if let Some(path) = &cli.output {
        if let Err(e) = fs::write(path, &outcome.stdout) {
            return Outcome::failed(&CliError::Io(e));
        }
        outcome.stdout.clear();
    }
    outcome
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(0)
}

fn bound_options(cli: &Cli) -> Result<BoundOptions, CliError> {
    if !(cli.tol >= 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Input(format!(
            "--tol must be a nonnegative number (got {})",
            cli.tol
        )));
    }
    Ok(BoundOptions {
        feasibility_tol: cli.tol,
        ..BoundOptions::default()
    })
}

fn read_input(cli: &Cli) -> Result<TaskFile, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("--input is required for this command".into()))?;
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?
    };
    TaskFile::parse(&text)
}

fn copies_in(cli: &Cli, file: &TaskFile) -> Result<u32, CliError> {
    cli.copies_in
        .or(file.m_copies)
        .ok_or_else(|| CliError::Input("M is required (\"M\" in the input or -M)".into()))
}

fn copies_out(cli: &Cli, file: &TaskFile) -> Result<Option<CopyCount>, CliError> {
    match &cli.copies_out {
        Some(text) => {
            let field = match text.parse::<u32>() {
                Ok(n) => CopiesField::Finite(n),
                Err(_) => CopiesField::Text(text.clone()),
            };
            field.to_count().map(Some)
        }
        None => file
            .n_copies
            .as_ref()
            .map(CopiesField::to_count)
            .transpose(),
    }
}

/// Family and finite copy counts for the cloning commands.
fn finite_task(cli: &Cli) -> Result<(CloneTask, u32, u32), CliError> {
    let file = read_input(cli)?;
    let family = file.family()?;
    let m = copies_in(cli, &file)?;
    let n = match copies_out(cli, &file)? {
        Some(CopyCount::Finite(n)) => n,
        Some(CopyCount::Infinite) => {
            return Err(CliError::Input(
                "N is \"inf\"; use the estimate command".into(),
            ));
        }
        None => {
            return Err(CliError::Input(
                "N is required (\"N\" in the input or -N)".into(),
            ))
        }
    };
    Ok((CloneTask::new(family, m, CopyCount::Finite(n))?, m, n))
}

fn oracle_options(cli: &Cli, n_states: usize) -> Result<OracleOptions, CliError> {
    let mut opts = OracleOptions::for_states(n_states, seed(cli));
    if let Some(r) = cli.restarts {
        opts.restarts = r;
    }
    opts.bound = bound_options(cli)?;
    Ok(opts)
}

fn run_oracle(cli: &Cli, task: &CloneTask) -> Result<(OracleResult, u64), CliError> {
    let opts = oracle_options(cli, task.family().n())?;
    let result = if cli.parallel {
        maximize_fidelity_parallel(task, &opts)?
    } else {
        maximize_fidelity(task, &opts)?
    };
    Ok((result, opts.seed))
}

fn output_gram_residual(family: &PureStateFamily, m: u32, outputs: &Mat) -> Result<f64, CliError> {
    let xm = gram_power(family, m)?.x;
    Ok((&outputs.adjoint().matmul(outputs) - &xm).frobenius_norm())
}

const INFEASIBLE_WARNING: &str =
    "warning: no sign pattern satisfies the positivity condition; reporting the largest trace norm\n";

pub fn cmd_bound(cli: &Cli) -> Result<Outcome, CliError> {
    let (task, m, n) = finite_task(cli)?;
    let report = clone_bound(&task, bound_options(cli)?)?;
    let residual = output_gram_residual(task.family(), m, &output_states(&report))?;
    let mut json = BoundJson::new(&report, m, n, residual);
    if cli.oracle {
        let (result, seed) = run_oracle(cli, &task)?;
        json.oracle = Some(OracleJson::new(&result, seed));
    }
    let stdout = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "M = {m}, N = {n}, states = {}", json.lambda.len());
            let _ = writeln!(s, "fprime_opt: {}", significant(json.fprime_opt, 9));
            let _ = writeln!(
                s,
                "fidelity_lower_bound: {}",
                significant(json.fidelity_lower_bound, 9)
            );
            let _ = writeln!(s, "lambda: {:?}", json.lambda);
            let _ = writeln!(s, "feasible: {}", json.feasible);
            let _ = writeln!(s, "output Gram residual: {}", significant(residual, 9));
            if let Some(o) = &json.oracle {
                let _ = writeln!(
                    s,
                    "oracle fidelity: {} ({} restarts)",
                    significant(o.f_opt_numeric, 9),
                    o.restarts_used
                );
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("fprime_opt,fidelity_lower_bound,feasible");
            if json.oracle.is_some() {
                s.push_str(",oracle_fidelity");
            }
            s.push('\n');
            let _ = write!(
                s,
                "{},{},{}",
                significant(json.fprime_opt, 17),
                significant(json.fidelity_lower_bound, 17),
                json.feasible
            );
            if let Some(o) = &json.oracle {
                let _ = write!(s, ",{}", significant(o.f_opt_numeric, 17));
            }
            s.push('\n');
            s
        }
    };
    let mut out = Outcome::ok(stdout);
    if !report.feasible {
        out.stderr.push_str(INFEASIBLE_WARNING);
    }
    Ok(out)
}

pub fn cmd_estimate(cli: &Cli) -> Result<Outcome, CliError> {
    let file = read_input(cli)?;
    let family = file.family()?;
    let m = copies_in(cli, &file)?;
    if let Some(CopyCount::Finite(n)) = copies_out(cli, &file)? {
        return Err(CliError::Input(format!(
            "estimate needs N = \"inf\" or no N (got {n})"
        )));
    }
    let report = estimation_bound(&family, m, bound_options(cli)?)?;
    let json = EstimationJson::new(&report, m);
    let stdout = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "M = {m}, N = inf, states = {}", family.n());
            let _ = writeln!(s, "p_lower_bound: {}", significant(json.p_lower_bound, 9));
            let _ = writeln!(s, "achieved_p: {}", significant(json.achieved_p, 9));
            let probs: Vec<String> = json
                .correct_probs
                .iter()
                .map(|&p| significant(p, 9))
                .collect();
            let _ = writeln!(s, "correct_probs: [{}]", probs.join(", "));
            let _ = writeln!(s, "lambda: {:?}", json.lambda);
            let _ = writeln!(s, "feasible: {}", json.feasible);
            let _ = writeln!(s, "E residual: {}", significant(json.e_residual, 9));
            s
        }
        Format::Csv => {
            let mut s = String::from("p_lower_bound,achieved_p,feasible,e_residual\n");
            let _ = writeln!(
                s,
                "{},{},{},{}",
                significant(json.p_lower_bound, 17),
                significant(json.achieved_p, 17),
                json.feasible,
                significant(json.e_residual, 17)
            );
            s
        }
    };
    let mut out = Outcome::ok(stdout);
    if !report.feasible {
        out.stderr.push_str(INFEASIBLE_WARNING);
    }
    Ok(out)
}

pub fn cmd_oracle(cli: &Cli) -> Result<Outcome, CliError> {
    let (task, m, n) = finite_task(cli)?;
    let report = clone_bound(&task, bound_options(cli)?)?;
    let (result, seed) = run_oracle(cli, &task)?;
    let json = OracleReportJson {
        m_copies: m,
        n_copies: n,
        fidelity_lower_bound: report.fidelity_lower_bound,
        fprime_opt: report.fprime_opt,
        oracle: OracleJson::new(&result, seed),
    };
    let stdout = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Text => format!(
            "oracle fidelity: {}\nfidelity_lower_bound: {}\nrestarts: {} (best {}), converged: {}\n",
            significant(result.f_opt_numeric, 9),
            significant(report.fidelity_lower_bound, 9),
            result.restarts_used,
            result.best_restart_index,
            result.converged
        ),
        Format::Csv => format!(
            "oracle_fidelity,fidelity_lower_bound,restarts,converged\n{},{},{},{}\n",
            significant(result.f_opt_numeric, 17),
            significant(report.fidelity_lower_bound, 17),
            result.restarts_used,
            result.converged
        ),
    };
    Ok(Outcome::ok(stdout))
}

/// Grid `from, from + step, …` up to `to`.
pub fn sweep_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Input(format!(
            "sweep step must be positive (got {step})"
        )));
    }
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) || from > to {
        return Err(CliError::Input(format!(
            "sweep range must satisfy 0 ≤ from ≤ to ≤ 1 (got {from}..{to})"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| (from + k as f64 * step).min(to))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub fprime_opt: f64,
    pub fidelity_lower_bound: f64,
    pub oracle_fidelity: Option<f64>,
    pub closed_form: Option<f64>,
}

pub fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<Outcome, CliError> {
    let priors: Vec<f64> = args
        .priors
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("cannot parse priors: {e}")))?;
    let priors: [f64; 2] = priors
        .try_into()
        .map_err(|_| CliError::Input("sweep needs exactly two priors".into()))?;
    let m = cli.copies_in.unwrap_or(1);
    let n = match &cli.copies_out {
        None => 2,
        Some(t) => t
            .parse::<u32>()
            .map_err(|_| CliError::Input(format!("sweep needs a finite N (got {t:?})")))?,
    };
    let equal_priors = priors[0] == priors[1];
    let opts = bound_options(cli)?;

    let mut rows = Vec::new();
    for s in sweep_grid(args.from, args.to, args.step)? {
        let family = two_state_family(C64::new(s, 0.0), priors)?;
        let task = CloneTask::new(family, m, CopyCount::Finite(n))?;
        let report = clone_bound(&task, opts)?;
        let oracle_fidelity = if cli.oracle {
            Some(run_oracle(cli, &task)?.0.f_opt_numeric)
        } else {
            None
        };
        let closed_form = if equal_priors {
            Some(two_state_closed_form(s, m, n)?.1)
        } else {
            None
        };
        rows.push(SweepRow {
            s,
            fprime_opt: report.fprime_opt,
            fidelity_lower_bound: report.fidelity_lower_bound,
            oracle_fidelity,
            closed_form,
        });
    }

    let stdout = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => {
            let digits = if cli.format == Some(Format::Text) {
                9
            } else {
                17
            };
            let mut s = String::from("s,fprime_opt,fidelity_lower_bound");
            if cli.oracle {
                s.push_str(",oracle_fidelity");
            }
            if equal_priors {
                s.push_str(",closed_form");
            }
            s.push('\n');
            for row in &rows {
                let mut fields = vec![
                    significant(row.s, digits),
                    significant(row.fprime_opt, digits),
                    significant(row.fidelity_lower_bound, digits),
                ];
                fields.extend(row.oracle_fidelity.map(|x| significant(x, digits)));
                fields.extend(row.closed_form.map(|x| significant(x, digits)));
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let values: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let mut v = serde_json::json!({
                        "s": r.s,
                        "fprime_opt": r.fprime_opt,
                        "fidelity_lower_bound": r.fidelity_lower_bound,
                    });
                    if let Some(o) = r.oracle_fidelity {
                        v["oracle_fidelity"] = o.into();
                    }
                    if let Some(c) = r.closed_form {
                        v["closed_form"] = c.into();
                    }
                    v
                })
                .collect();
            to_json(&values)
        }
    };
    Ok(Outcome::ok(stdout))
}

pub fn cmd_check(cli: &Cli) -> Result<Outcome, CliError> {
    let file = read_input(cli)?;
    let family = file.family()?;
    let m = copies_in(cli, &file)?;
    let deviation = tensor_power_check(&family, m, cli.max_dim)?;
    let json = CheckJson {
        m_copies: m,
        dimension: family.dim().expect("check requires vectors"),
        max_deviation: deviation,
        passed: deviation <= CHECK_TOL,
    };
    let stdout = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Text => format!("max deviation: {}\n", significant(deviation, 9)),
        Format::Csv => format!(
            "M,dimension,max_deviation,passed\n{},{},{},{}\n",
            m,
            json.dimension,
            significant(deviation, 17),
            json.passed
        ),
    };
    let mut out = Outcome::ok(stdout);
    if !json.passed {
        out.code = EXIT_NUMERICAL;
        out.stderr = format!("error: deviation {deviation:e} exceeds {CHECK_TOL:e}\n");
    }
    Ok(out)
}

pub fn cmd_rand(cli: &Cli, args: &RandArgs) -> Result<Outcome, CliError> {
    if args.states < 1 || args.dim < 1 {
        return Err(CliError::Input(
            "--states and --dim must be at least 1".into(),
        ));
    }
    let family = random_family(seed(cli), args.states, args.dim);
    let m = cli.copies_in.unwrap_or(1);
    let n = match &cli.copies_out {
        None => CopyCount::Finite(2),
        Some(t) => CopiesField::Text(t.clone()).to_count().or_else(|_| {
            t.parse::<u32>().map(CopyCount::Finite).map_err(|_| {
                CliError::Input(format!("N must be an integer or \"inf\" (got {t:?})"))
            })
        })?,
    };
    Ok(Outcome::ok(to_json(&TaskFile::from_family(
        &family,
        Some(m),
        Some(n),
    ))))
}
