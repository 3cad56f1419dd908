//! Batch experiment driver.
//!
//! Subcommands: `solve`, `converge`, `noise-study`, `dsm`, `verify`. Settings
//! resolve with precedence flags > config file > defaults; the config file is
//! JSON with the same field names as the flags. Exit codes: 0 success,
//! 1 verification failure, 2 usage/config error, 3 numerical abort.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::{self, AnyOperator, AnyVector, ConvergenceRow, NoiseStudyRow, TraceRow};
use crate::operator::{LinearOperator, RegParam};
use crate::oracle::{decompose_default, SpectralDecomposition, DEFAULT_RANK_TOL};
use crate::problems;
use crate::solvers::{
    dsm_solve, iterate_fixed_point, iterate_selfadjoint, tikhonov_minimizer, DsmSchedule,
};
use crate::stopping::{self, error_envelope, stopping_index, NoisyData, ScheduleParams};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "regsolve",
    version,
    about = "Batch experiments with regularized solvers for ill-conditioned linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver on a problem and emit a summary (plus files under --out)
    Solve(CommonArgs),
    /// Emit the per-step convergence table of the fixed-point iteration
    Converge(ConvergeArgs),
    /// Sweep noise levels with schedule-based stopping and emit the study table
    #[command(name = "noise-study")]
    NoiseStudy(NoiseArgs),
    /// Integrate the continuous regularization flow, optionally with noisy data
    Dsm(DsmArgs),
    /// Run the named invariant suites and exit nonzero on any failure
    Verify,
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// Problem spec: `rank_deficient:M,N,R[,seed=S]`, `hilbert:N`,
    /// `discretized_derivative:N`, `symmetric_singular:N[,seed=S]`,
    /// or `file:A.txt,f.txt`
    #[arg(long)]
    problem: Option<String>,

    /// Solution method: eq5 | tikhonov | selfadjoint | dsm
    #[arg(long)]
    method: Option<String>,

    /// Regularization shift a > 0
    #[arg(long)]
    a: Option<f64>,

    /// Noise level added to the right-hand side
    #[arg(long)]
    delta: Option<f64>,

    /// Seed for noise and any seeded generator defaults
    #[arg(long)]
    seed: Option<u64>,

    /// Output location (directory for solve/dsm, CSV file otherwise)
    #[arg(long)]
    out: Option<PathBuf>,

    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,

    /// Successive-difference stopping tolerance for iterative methods
    #[arg(long)]
    tol: Option<f64>,

    /// Step cap for iterative methods
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ConvergeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Number of iteration steps to tabulate
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated noise levels, e.g. `1e-1,1e-2,1e-3`
    #[arg(long)]
    deltas: Option<String>,

    /// Schedule exponent in (0, 1)
    #[arg(long)]
    gamma: Option<f64>,

    /// Schedule constant c > 0
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct DsmArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Initial shift of the decay schedule
    #[arg(long)]
    eps0: Option<f64>,

    /// Decay exponent in (0, 1]
    #[arg(long)]
    p: Option<f64>,

    /// Integration horizon
    #[arg(long)]
    tmax: Option<f64>,

    /// RK4 step size in (0, 0.1]
    #[arg(long)]
    h: Option<f64>,

    /// Discrepancy constant C > 1
    #[arg(long = "discrepancy-C")]
    discrepancy_c: Option<f64>,
}

/// Config-file counterpart of the flags.
#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<String>,
    method: Option<String>,
    a: Option<f64>,
    delta: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    tol: Option<f64>,
    max_steps: Option<usize>,
    steps: Option<usize>,
    deltas: Option<Vec<f64>>,
    gamma: Option<f64>,
    c: Option<f64>,
    eps0: Option<f64>,
    p: Option<f64>,
    tmax: Option<f64>,
    h: Option<f64>,
    discrepancy_c: Option<f64>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", p.display())))
        }
    }
}

/// A problem as the CLI sees it: operator, data, and when known the reference
/// minimal-norm solution (exact for generators, oracle-computed for files).
struct LoadedProblem {
    label: String,
    operator: AnyOperator,
    data: AnyVector,
    reference: Option<DVector<f64>>,
    /// `|A y_oracle - f|` for file problems; exact zero expected for generated ones.
    consistency: Option<f64>,
}

fn parse_problem_spec(spec: &str, default_seed: u64) -> Result<LoadedProblem> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::param(format!("problem spec '{spec}' must look like 'kind:args'")))?;

    let mut positional: Vec<&str> = Vec::new();
    let mut seed = default_seed;
    for part in rest.split(',').filter(|s| !s.is_empty()) {
        if let Some(v) = part.strip_prefix("seed=") {
            seed = v
                .parse()
                .map_err(|_| Error::param(format!("bad seed '{v}' in problem spec '{spec}'")))?;
        } else {
            positional.push(part);
        }
    }
    let dim = |i: usize, what: &str| -> Result<usize> {
        positional
            .get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::param(format!("problem spec '{spec}': missing or bad {what}")))
    };

    let from_test_problem = |p: problems::TestProblem| -> LoadedProblem {
        LoadedProblem {
            label: p.label().to_string(),
            reference: Some(p.solution().clone()),
            data: AnyVector::Real(p.rhs().clone()),
            operator: AnyOperator::Real(p.operator().clone()),
            consistency: Some(0.0),
        }
    };

    match kind {
        "rank_deficient" => {
            let p = problems::rank_deficient(dim(0, "m")?, dim(1, "n")?, dim(2, "r")?, seed)?;
            Ok(from_test_problem(p))
        }
        "hilbert" => Ok(from_test_problem(problems::hilbert(dim(0, "n")?)?)),
        "discretized_derivative" => {
            Ok(from_test_problem(problems::discretized_derivative(dim(0, "n")?)?))
        }
        "symmetric_singular" => {
            Ok(from_test_problem(problems::symmetric_singular(dim(0, "n")?, seed)?))
        }
        "file" => {
            if positional.len() != 2 {
                return Err(Error::param(format!(
                    "problem spec '{spec}': expected 'file:A.txt,f.txt'"
                )));
            }
            let operator = io::read_operator(Path::new(positional[0]))?;
            let data = io::read_vector(Path::new(positional[1]))?;
            if data.len() != operator.nrows() {
                return Err(Error::dim(format!(
                    "data has length {} but operator has {} rows",
                    data.len(),
                    operator.nrows()
                )));
            }
            let (reference, consistency) = match (&operator, &data) {
                (AnyOperator::Real(a), AnyVector::Real(f)) => {
                    let (y, cons) = crate::oracle::minimal_norm_solution(a, f, DEFAULT_RANK_TOL)?;
                    (Some(y), Some(cons))
                }
                _ => (None, None),
            };
            Ok(LoadedProblem {
                label: format!("file:{},{}", positional[0], positional[1]),
                operator,
                data,
                reference,
                consistency,
            })
        }
        other => Err(Error::param(format!(
            "unknown problem kind '{other}'; expected rank_deficient, hilbert, \
             discretized_derivative, symmetric_singular, or file"
        ))),
    }
}

fn classify_error(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::NonFinite(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (excluding the binary name is not required) and runs the
/// requested command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; keep its exit semantics (0 for
            // --help/--version, 2 for usage errors)
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Converge(args) => cmd_converge(args),
        Command::NoiseStudy(args) => cmd_noise_study(args),
        Command::Dsm(args) => cmd_dsm(args),
        Command::Verify => return cmd_verify(),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify_error(&e)
        }
    }
}

struct ResolvedCommon {
    problem: LoadedProblem,
    method: String,
    a: Option<f64>,
    delta: f64,
    seed: u64,
    out: Option<PathBuf>,
    tol: f64,
    max_steps: usize,
    cfg: FileConfig,
}

fn resolve_common(args: &CommonArgs, need_method: bool) -> Result<ResolvedCommon> {
    let cfg = load_config(args.config.as_deref())?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let spec = args
        .problem
        .clone()
        .or_else(|| cfg.problem.clone())
        .ok_or_else(|| Error::param("--problem is required"))?;
    let problem = parse_problem_spec(&spec, seed)?;
    let method = match args.method.clone().or_else(|| cfg.method.clone()) {
        Some(m) => m,
        None if need_method => return Err(Error::param("--method is required")),
        None => String::new(),
    };
    if need_method && !["eq5", "tikhonov", "selfadjoint", "dsm"].contains(&method.as_str()) {
        return Err(Error::param(format!(
            "unknown method '{method}'; expected eq5, tikhonov, selfadjoint, or dsm"
        )));
    }
    Ok(ResolvedCommon {
        problem,
        method,
        a: args.a.or(cfg.a),
        delta: args.delta.or(cfg.delta).unwrap_or(0.0),
        seed,
        out: args.out.clone().or_else(|| cfg.out.clone()),
        tol: args.tol.or(cfg.tol).unwrap_or(1e-10),
        max_steps: args.max_steps.or(cfg.max_steps).unwrap_or(10_000),
        cfg,
    })
}

fn require_shift(a: Option<f64>, method: &str) -> Result<f64> {
    let a = a.ok_or_else(|| Error::param(format!("--a is required for method {method}")))?;
    RegParam::real(a)?;
    Ok(a)
}

/// Applies noise to the data when `delta > 0`; only real data can be perturbed.
fn apply_noise(data: &AnyVector, delta: f64, seed: u64) -> Result<(AnyVector, Option<NoisyData>)> {
    if delta == 0.0 {
        return Ok((data.clone(), None));
    }
    match data {
        AnyVector::Real(f) => {
            let noisy = problems::add_noise(f, delta, seed)?;
            Ok((AnyVector::Real(noisy.data().clone()), Some(noisy)))
        }
        AnyVector::Complex(_) => {
            Err(Error::param("noise injection requires real data"))
        }
    }
}

/// Smoothing-norm bound report for the chosen shift, computed from the
/// operator's singular values.
fn smoothing_bound_report(dec: &SpectralDecomposition<f64>, a: f64) -> serde_json::Value {
    let reg = RegParam::real(a).expect("validated above");
    let exact = dec.smoothing_norm_exact(&reg);
    let bound = reg.smoothing_bound();
    serde_json::json!({
        "a": a,
        "exact_norm": exact,
        "bound": bound,
        "within_bound": exact <= bound * (1.0 + 1e-12),
    })
}

struct SolveOutcome {
    solution: AnyVector,
    residual: f64,
    error_vs_reference: Option<f64>,
    steps_or_time: serde_json::Value,
    converged: bool,
    trace_rows: Option<Vec<TraceRow>>,
}

fn run_method(rc: &ResolvedCommon, dsm_args: Option<&DsmArgs>) -> Result<SolveOutcome> {
    let (data, _noisy) = apply_noise(&rc.problem.data, rc.delta, rc.seed)?;
    match (&rc.problem.operator, &data) {
        (AnyOperator::Real(a_op), AnyVector::Real(f)) => {
            run_method_real(rc, a_op, f, rc.problem.reference.as_ref(), dsm_args)
        }
        (op, data) => run_method_complex(rc, &op.to_complex_operator(), &data.to_complex_vector(), dsm_args),
    }
}

fn run_method_real(
    rc: &ResolvedCommon,
    a_op: &LinearOperator<f64>,
    f: &DVector<f64>,
    reference: Option<&DVector<f64>>,
    dsm_args: Option<&DsmArgs>,
) -> Result<SolveOutcome> {
    match rc.method.as_str() {
        "tikhonov" => {
            let a = require_shift(rc.a, "tikhonov")?;
            let z = tikhonov_minimizer(a_op, a, f)?;
            Ok(SolveOutcome {
                residual: (a_op.apply(&z)? - f).norm(),
                error_vs_reference: reference.map(|y| (&z - y).norm()),
                solution: AnyVector::Real(z),
                steps_or_time: serde_json::json!({"steps": 1}),
                converged: true,
                trace_rows: None,
            })
        }
        "eq5" => {
            let a = require_shift(rc.a, "eq5")?;
            let u1 = DVector::zeros(a_op.ncols());
            let trace = iterate_fixed_point(a_op, a, f, &u1, rc.max_steps, rc.tol, reference)?;
            Ok(SolveOutcome {
                residual: *trace.residuals().last().expect("non-empty trace"),
                error_vs_reference: trace.errors().last().copied(),
                solution: AnyVector::Real(trace.final_iterate().clone()),
                steps_or_time: serde_json::json!({"steps": trace.steps() - 1}),
                converged: trace.converged(),
                trace_rows: Some(io::trace_rows_from_iteration(&trace)),
            })
        }
        "selfadjoint" => {
            let a = require_shift(rc.a, "selfadjoint")?;
            let u1 = DVector::zeros(a_op.ncols());
            let trace = iterate_selfadjoint(a_op, a, f, &u1, rc.max_steps, rc.tol, reference)?;
            let (real, imag_norm) = trace.realize_final();
            Ok(SolveOutcome {
                residual: *trace.residuals().last().expect("non-empty trace"),
                error_vs_reference: reference.map(|y| (&real - y).norm().hypot(imag_norm)),
                solution: AnyVector::Real(real),
                steps_or_time: serde_json::json!({
                    "steps": trace.steps() - 1,
                    "imaginary_norm": imag_norm,
                }),
                converged: trace.converged(),
                trace_rows: Some(io::trace_rows_from_iteration(&trace)),
            })
        }
        "dsm" => {
            let sched = DsmSchedule::new(
                dsm_args.and_then(|d| d.eps0).or(rc.cfg.eps0).unwrap_or(1.0),
                dsm_args.and_then(|d| d.p).or(rc.cfg.p).unwrap_or(0.5),
            )?;
            let tmax = dsm_args.and_then(|d| d.tmax).or(rc.cfg.tmax).unwrap_or(30.0);
            let h = dsm_args.and_then(|d| d.h).or(rc.cfg.h).unwrap_or(0.01);
            let u0 = DVector::zeros(a_op.ncols());
            let trace = dsm_solve(a_op, f, &sched, &u0, tmax, h, reference)?;
            Ok(SolveOutcome {
                residual: *trace.residuals().last().expect("non-empty trace"),
                error_vs_reference: trace.errors().last().copied(),
                solution: AnyVector::Real(trace.final_state().clone()),
                steps_or_time: serde_json::json!({"t_max": trace.final_time()}),
                converged: true,
                trace_rows: Some(io::trace_rows_from_dsm(&trace)),
            })
        }
        other => Err(Error::param(format!("unknown method '{other}'"))),
    }
}

fn run_method_complex(
    rc: &ResolvedCommon,
    a_op: &LinearOperator<num_complex::Complex64>,
    f: &DVector<num_complex::Complex64>,
    dsm_args: Option<&DsmArgs>,
) -> Result<SolveOutcome> {
    match rc.method.as_str() {
        "tikhonov" => {
            let a = require_shift(rc.a, "tikhonov")?;
            let z = tikhonov_minimizer(a_op, a, f)?;
            Ok(SolveOutcome {
                residual: (a_op.apply(&z)? - f).norm(),
                error_vs_reference: None,
                solution: AnyVector::Complex(z),
                steps_or_time: serde_json::json!({"steps": 1}),
                converged: true,
                trace_rows: None,
            })
        }
        "eq5" => {
            let a = require_shift(rc.a, "eq5")?;
            let u1 = DVector::zeros(a_op.ncols());
            let trace = iterate_fixed_point(a_op, a, f, &u1, rc.max_steps, rc.tol, None)?;
            Ok(SolveOutcome {
                residual: *trace.residuals().last().expect("non-empty trace"),
                error_vs_reference: None,
                solution: AnyVector::Complex(trace.final_iterate().clone()),
                steps_or_time: serde_json::json!({"steps": trace.steps() - 1}),
                converged: trace.converged(),
                trace_rows: Some(io::trace_rows_from_iteration(&trace)),
            })
        }
        "selfadjoint" => {
            let a = require_shift(rc.a, "selfadjoint")?;
            let u1 = DVector::zeros(a_op.ncols());
            let trace = iterate_selfadjoint(a_op, a, f, &u1, rc.max_steps, rc.tol, None)?;
            Ok(SolveOutcome {
                residual: *trace.residuals().last().expect("non-empty trace"),
                error_vs_reference: None,
                solution: AnyVector::Complex(trace.final_iterate().clone()),
                steps_or_time: serde_json::json!({"steps": trace.steps() - 1}),
                converged: trace.converged(),
                trace_rows: Some(io::trace_rows_from_iteration(&trace)),
            })
        }
        "dsm" => {
            let sched = DsmSchedule::new(
                dsm_args.and_then(|d| d.eps0).or(rc.cfg.eps0).unwrap_or(1.0),
                dsm_args.and_then(|d| d.p).or(rc.cfg.p).unwrap_or(0.5),
            )?;
            let tmax = dsm_args.and_then(|d| d.tmax).or(rc.cfg.tmax).unwrap_or(30.0);
            let h = dsm_args.and_then(|d| d.h).or(rc.cfg.h).unwrap_or(0.01);
            let u0 = DVector::zeros(a_op.ncols());
            let trace = dsm_solve(a_op, f, &sched, &u0, tmax, h, None)?;
            Ok(SolveOutcome {
                residual: *trace.residuals().last().expect("non-empty trace"),
                error_vs_reference: None,
                solution: AnyVector::Complex(trace.final_state().clone()),
                steps_or_time: serde_json::json!({"t_max": trace.final_time()}),
                converged: true,
                trace_rows: Some(io::trace_rows_from_dsm(&trace)),
            })
        }
        other => Err(Error::param(format!("unknown method '{other}'"))),
    }
}

fn cmd_solve(args: CommonArgs) -> Result<i32> {
    let rc = resolve_common(&args, true)?;
    let outcome = run_method(&rc, None)?;

    let bound_report = match &rc.problem.operator {
        AnyOperator::Real(a_op) => rc.a.map(|a| smoothing_bound_report(&decompose_default(a_op), a)),
        AnyOperator::Complex(a_op) => rc.a.map(|a| {
            let dec = decompose_default(a_op);
            let reg = RegParam::real(a).expect("validated");
            let exact = dec.smoothing_norm_exact(&reg);
            serde_json::json!({
                "a": a,
                "exact_norm": exact,
                "bound": reg.smoothing_bound(),
                "within_bound": exact <= reg.smoothing_bound() * (1.0 + 1e-12),
            })
        }),
    };

    let summary = serde_json::json!({
        "label": rc.problem.label,
        "method": rc.method,
        "m": rc.problem.operator.nrows(),
        "n": rc.problem.operator.ncols(),
        "a": rc.a,
        "delta": rc.delta,
        "seed": rc.seed,
        "run": outcome.steps_or_time,
        "converged": outcome.converged,
        "residual": outcome.residual,
        "error_vs_oracle": outcome.error_vs_reference,
        "oracle_consistency": rc.problem.consistency,
        "smoothing_norm_check": bound_report,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));

    if let Some(dir) = &rc.out {
        fs::create_dir_all(dir)?;
        io::write_vector(&outcome.solution, &dir.join("solution.txt"))?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("serializable"))?;
        if let Some(rows) = &outcome.trace_rows {
            let file = fs::File::create(dir.join("trace.csv"))?;
            io::write_trace_csv(file, rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_converge(args: ConvergeArgs) -> Result<i32> {
    let rc = resolve_common(&args.common, false)?;
    if !rc.method.is_empty() && rc.method != "eq5" {
        return Err(Error::param(format!(
            "converge tabulates the eq5 iteration; got method '{}'",
            rc.method
        )));
    }
    let a = require_shift(rc.a, "eq5")?;
    let steps = args.steps.or(rc.cfg.steps).unwrap_or(50);

    let (a_op, f) = match (&rc.problem.operator, &rc.problem.data) {
        (AnyOperator::Real(a_op), AnyVector::Real(f)) => (a_op, f),
        _ => return Err(Error::param("converge requires a real problem")),
    };
    let (data, _noisy) = apply_noise(&rc.problem.data, rc.delta, rc.seed)?;
    let f_used = match &data {
        AnyVector::Real(v) => v.clone(),
        AnyVector::Complex(_) => unreachable!("real data stays real"),
    };
    let _ = f;

    let dec = decompose_default(a_op);
    let reference = match &rc.problem.reference {
        Some(y) => y.clone(),
        None => dec.pseudoinverse_apply(&f_used)?,
    };
    let u1 = DVector::zeros(a_op.ncols());
    let w = &u1 - &reference;

    let trace = iterate_fixed_point(a_op, a, &f_used, &u1, steps, 0.0, Some(&reference))?;
    let rows: Vec<ConvergenceRow> = (0..trace.steps())
        .map(|n| -> Result<ConvergenceRow> {
            Ok(ConvergenceRow {
                n,
                error: trace.errors()[n],
                residual: trace.residuals()[n],
                spectral_prediction: dec.iteration_error(a, &w, n)?,
            })
        })
        .collect::<Result<_>>()?;

    match &rc.out {
        Some(path) => {
            let file = fs::File::create(path)?;
            io::write_convergence_csv(file, &rows)?;
        }
        None => {
            let stdout = std::io::stdout();
            io::write_convergence_csv(stdout.lock(), &rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_noise_study(args: NoiseArgs) -> Result<i32> {
    let rc = resolve_common(&args.common, false)?;
    let a = require_shift(rc.a, "the noise study")?;
    let params = ScheduleParams::new(
        args.gamma.or(rc.cfg.gamma).unwrap_or(0.5),
        args.c.or(rc.cfg.c).unwrap_or(1.0),
    )?;
    let deltas: Vec<f64> = match &args.deltas {
        Some(text) => text
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::param(format!("bad noise level '{s}' in --deltas")))
            })
            .collect::<Result<_>>()?,
        None => rc.cfg.deltas.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]),
    };
    if deltas.is_empty() {
        return Err(Error::param("the noise study needs at least one noise level"));
    }

    let (a_op, f, y) = match (&rc.problem.operator, &rc.problem.data, &rc.problem.reference) {
        (AnyOperator::Real(a_op), AnyVector::Real(f), Some(y)) => (a_op, f, y.clone()),
        (AnyOperator::Real(a_op), AnyVector::Real(f), None) => {
            let (y, _) = crate::oracle::minimal_norm_solution(a_op, f, DEFAULT_RANK_TOL)?;
            (a_op, f, y)
        }
        _ => return Err(Error::param("the noise study requires a real problem")),
    };
    let dec = decompose_default(a_op);
    let u1 = DVector::zeros(a_op.ncols());
    let w = &u1 - &y;

    let mut order: Vec<f64> = deltas.clone();
    order.sort_by(|x, y| y.partial_cmp(x).expect("finite noise levels"));

    let mut rows = Vec::new();
    for delta in order {
        let n_delta = stopping_index(delta, &params)?;
        let noisy = problems::add_noise(f, delta, rc.seed)?;
        let trace = iterate_fixed_point(a_op, a, noisy.data(), &u1, n_delta, 0.0, Some(&y))?;
        let error_stopped = *trace.errors().last().expect("non-empty trace");
        let clean_term = dec.iteration_error(a, &w, n_delta)?;
        let envelope = error_envelope(delta, n_delta - 1, a, clean_term);
        rows.push(NoiseStudyRow { delta, n_delta, error_stopped, envelope });
    }

    match &rc.out {
        Some(path) => {
            let file = fs::File::create(path)?;
            io::write_noise_study_csv(file, &rows)?;
        }
        None => {
            let stdout = std::io::stdout();
            io::write_noise_study_csv(stdout.lock(), &rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_dsm(args: DsmArgs) -> Result<i32> {
    let rc = resolve_common(&args.common, false)?;
    let sched = DsmSchedule::new(
        args.eps0.or(rc.cfg.eps0).unwrap_or(1.0),
        args.p.or(rc.cfg.p).unwrap_or(0.5),
    )?;
    let tmax = args.tmax.or(rc.cfg.tmax).unwrap_or(30.0);
    let h = args.h.or(rc.cfg.h).unwrap_or(0.01);
    let c = args.discrepancy_c.or(rc.cfg.discrepancy_c).unwrap_or(stopping::DEFAULT_DISCREPANCY_C);

    let (a_op, f) = match (&rc.problem.operator, &rc.problem.data) {
        (AnyOperator::Real(a_op), AnyVector::Real(f)) => (a_op, f),
        _ => return Err(Error::param("dsm runs on real problems; use solve --method dsm for complex data")),
    };
    let (data, noisy) = apply_noise(&rc.problem.data, rc.delta, rc.seed)?;
    let f_used = match &data {
        AnyVector::Real(v) => v.clone(),
        AnyVector::Complex(_) => unreachable!("real data stays real"),
    };
    let _ = f;

    let u0 = DVector::zeros(a_op.ncols());
    let trace = dsm_solve(a_op, &f_used, &sched, &u0, tmax, h, rc.problem.reference.as_ref())?;

    let discrepancy = match &noisy {
        Some(nd) => {
            let (stop, t_stop) = trace.discrepancy_stop(nd, c)?;
            let error_at_stop = rc
                .problem
                .reference
                .as_ref()
                .map(|y| (&trace.states()[stop.index] - y).norm());
            Some(serde_json::json!({
                "C": c,
                "threshold": c * nd.delta(),
                "t_stop": t_stop,
                "reached": stop.reached,
                "residual_at_stop": stop.residual,
                "error_at_stop": error_at_stop,
            }))
        }
        None => None,
    };

    let summary = serde_json::json!({
        "label": rc.problem.label,
        "method": "dsm",
        "eps0": sched.eps0(),
        "p": sched.decay(),
        "t_max": trace.final_time(),
        "h": h,
        "delta": rc.delta,
        "seed": rc.seed,
        "residual": trace.residuals().last(),
        "error_vs_oracle": trace.errors().last(),
        "discrepancy": discrepancy,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));

    if let Some(dir) = &rc.out {
        fs::create_dir_all(dir)?;
        io::write_vector(&AnyVector::Real(trace.final_state().clone()), &dir.join("solution.txt"))?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("serializable"))?;
        let file = fs::File::create(dir.join("trace.csv"))?;
        io::write_trace_csv(file, &io::trace_rows_from_dsm(&trace))?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify() -> i32 {
    let report = verify::run_all();
    let mut stdout = std::io::stdout();
    let _ = stdout.write_all(report.render().as_bytes());
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_spec_parsing() {
        let p = parse_problem_spec("rank_deficient:6,5,3,seed=9", 0).unwrap();
        assert_eq!(p.operator.nrows(), 6);
        assert_eq!(p.operator.ncols(), 5);
        assert!(p.reference.is_some());

        let p = parse_problem_spec("hilbert:4", 0).unwrap();
        assert_eq!(p.operator.nrows(), 4);

        assert!(parse_problem_spec("nope:3", 0).is_err());
        assert!(parse_problem_spec("rank_deficient:6,5", 0).is_err());
        assert!(parse_problem_spec("hilbert", 0).is_err());
        assert!(parse_problem_spec("file:only_one", 0).is_err());
    }

    #[test]
    fn unknown_method_is_usage_error() {
        let code = run(["regsolve", "solve", "--problem", "hilbert:3", "--method", "qr", "--a", "1.0"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_shift_is_usage_error() {
        let code = run(["regsolve", "solve", "--problem", "hilbert:3", "--method", "eq5"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
