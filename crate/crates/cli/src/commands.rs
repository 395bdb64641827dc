use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use driftlab::drift::{construct, default_params, ConstructionWarning, DriftConstruction, DriftParams};
use driftlab::ea::default_max_evaluations;
use driftlab::experiments::runs::{estimate_nu, instance_seed, run_seed, NuEstimate, NuSource, Summary};
use driftlab::experiments::{
    canonical_json, generate_family, lower_bound_experiment, scaling_experiment, tail_experiment, write_runs_csv,
    FamilySpec, RunRow,
};
use driftlab::verify::{
    check_definition_conditions, check_weight_lemmas, verify_feasibility, DefinitionReport, FeasibilityReport,
    LemmaKind, LemmaReport, VerifyMode, VerifyOptions, EXHAUSTIVE_CAP,
};
use driftlab::{run_ea, LinearObjective, MutationParams, RunRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] driftlab::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

/// Construction, verification and runtime experiments for drift functions of
/// the (1+1) EA on linear functions.
///
/// Reports are canonical JSON (sorted keys, floats as shortest round-trip
/// strings). Without --output the report goes to stdout and the summary line
/// to stderr; with --output the report goes to the file and the summary line
/// to stdout.
///
/// Exit codes: 0 success, 2 invalid input, 3 construction warning (problem
/// size below the guarantee threshold), 4 a check found a violation,
/// 5 inconclusive (truncated runs).
#[derive(Debug, Parser)]
#[command(name = "driftlab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (at least 1; results do not depend on it).
    #[arg(long, global = true, env = "DRIFTLAB_THREADS")]
    pub threads: Option<usize>,

    /// Report file; when set, stdout carries only the summary line.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Report format; csv (one row per run) is available for run, scaling,
    /// tail and lower-bound.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the block structure, weights and fitness partition.
    Construct {
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        drift: DriftArgs,
    },
    /// Check the drift condition on every state (exhaustive) or on a sample.
    Verify {
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        drift: DriftArgs,
        /// exhaustive needs n <= 12; default: exhaustive when n <= 12, else sampled.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Maximum number of states in sampled mode (at least 1).
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// Monte Carlo samples per state for n > 20 (at least 1000).
        #[arg(long, default_value_t = 100_000)]
        mc_samples: u64,
    },
    /// Evaluate the weight-sum inequalities on the constructed weights.
    Lemmas {
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        drift: DriftArgs,
    },
    /// Run the EA repeatedly and report optimisation times.
    Run {
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        mutation: MutationArgs,
        /// Number of runs (at least 1).
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Evaluation cap per run (at least 1); default 50·max(1, e^c/c)·n ln n.
        #[arg(long)]
        max_evaluations: Option<u64>,
    },
    /// Median T/(n ln n) over a size grid for each c; checks the plateau.
    Scaling {
        /// onemax, binval, uniform_random, lognormal_random or mixed_regime.
        #[arg(long, default_value = "onemax")]
        family: String,
        /// Strictly increasing problem sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        /// Mutation constants, comma separated (0 < c <= n).
        #[arg(long, value_delimiter = ',', required = true)]
        c_list: Vec<f64>,
        /// Runs per cell (at least 30).
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical tail frequencies against the drift-theorem bound.
    Tail {
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        drift: DriftArgs,
        /// Number of runs (at least 1).
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Positive tail parameters, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        lambda: Vec<f64>,
        /// Drift constant; default: measured exhaustively (extrapolated linearly above n = 12).
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Counts runs that finish within n ln n / (2(max(1, c) + 1)) evaluations.
    LowerBound {
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        mutation: MutationArgs,
        /// Number of runs (at least 100).
        #[arg(long, default_value_t = 200)]
        reps: usize,
    },
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    /// onemax, binval, uniform_random, lognormal_random, mixed_regime or explicit.
    #[arg(long, default_value = "onemax")]
    pub family: String,
    /// Explicit coefficients, comma separated (selects the explicit family).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coefficients: Option<Vec<f64>>,
    /// Problem size (at least 1); defaults to the number of explicit coefficients.
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed for random instances and runs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    /// Mutation constant (0 < c <= n).
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Accuracy parameter in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// log2 K (positive); default: the smallest admissible power of two.
    #[arg(long)]
    pub log2_k: Option<f64>,
    /// Long-block fraction in (0, 1); default: derived from c, epsilon and K.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MutationArgs {
    /// Mutation constant (0 < c <= n).
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Warning,
    Violation,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Warning => 3,
            Outcome::Violation => 4,
            Outcome::Inconclusive => 5,
        }
    }
}

struct Report {
    json: String,
    csv: Option<Vec<RunRow>>,
    summary: String,
    outcome: Outcome,
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot configure threads: {e}")))?;
    }
    let report = match &cli.command {
        Command::Construct { objective, drift } => cmd_construct(objective, drift)?,
        Command::Verify { objective, drift, mode, budget, mc_samples } => {
            cmd_verify(objective, drift, *mode, *budget, *mc_samples)?
        }
        Command::Lemmas { objective, drift } => cmd_lemmas(objective, drift)?,
        Command::Run { objective, mutation, reps, max_evaluations } => {
            cmd_run(objective, mutation, *reps, *max_evaluations)?
        }
        Command::Scaling { family, n_grid, c_list, reps, seed } => cmd_scaling(family, n_grid, c_list, *reps, *seed)?,
        Command::Tail { objective, drift, reps, lambda, nu } => cmd_tail(objective, drift, *reps, lambda, *nu)?,
        Command::LowerBound { objective, mutation, reps } => cmd_lower_bound(objective, mutation, *reps)?,
    };
    emit(cli, report)
}

fn emit(cli: &Cli, report: Report) -> Result<Outcome> {
    let body = match cli.format {
        Format::Json => report.json.into_bytes(),
        Format::Csv => {
            let rows = report.csv.ok_or_else(|| {
                CliError::Invalid("--format csv is available for run, scaling, tail and lower-bound".into())
            })?;
            let mut buf = Vec::new();
            write_runs_csv(&mut buf, &rows)?;
            buf
        }
    };
    match &cli.output {
        Some(path) => {
            fs::write(path, body)?;
            println!("{}", report.summary);
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&body)?;
            out.flush()?;
            eprintln!("{}", report.summary);
        }
    }
    Ok(report.outcome)
}

struct Instance {
    spec: FamilySpec,
    n: usize,
    objective: LinearObjective,
}

fn family_spec(args: &ObjectiveArgs) -> Result<FamilySpec> {
    match &args.coefficients {
        Some(coefficients) => {
            if args.family != "explicit" && args.family != "onemax" {
                return Err(CliError::Invalid(format!(
                    "--coefficients selects the explicit family; got --family {}",
                    args.family
                )));
            }
            Ok(FamilySpec::Explicit { coefficients: coefficients.clone() })
        }
        None if args.family == "explicit" => Err(CliError::Invalid("--family explicit needs --coefficients".into())),
        None => Ok(args.family.parse()?),
    }
}

fn instance(args: &ObjectiveArgs) -> Result<Instance> {
    let spec = family_spec(args)?;
    spec.validate()?;
    let n = match (&spec, args.n) {
        (_, Some(0)) => return Err(CliError::Invalid("--n must be at least 1".into())),
        (_, Some(n)) => n,
        (FamilySpec::Explicit { .. }, None) => 0,
        (_, None) => return Err(CliError::Invalid("--n is required".into())),
    };
    let objective = generate_family(&spec, n, instance_seed(args.seed, n))?;
    Ok(Instance { n: objective.n(), spec, objective })
}

fn drift_params(args: &DriftArgs) -> Result<DriftParams> {
    let ln_k = match args.log2_k {
        Some(m) if !(m > 0.0 && m.is_finite()) => {
            return Err(CliError::Invalid(format!("--log2-k must be positive, got {m}")))
        }
        Some(m) => Some(m * std::f64::consts::LN_2),
        None => None,
    };
    Ok(match args.gamma {
        Some(gamma) => {
            let ln_k = match ln_k {
                Some(l) => l,
                None => driftlab::drift::params::default_log2_k(args.c, args.epsilon) as f64 * std::f64::consts::LN_2,
            };
            DriftParams::manual(args.c, args.epsilon, ln_k, gamma)?
        }
        None => default_params(args.c, args.epsilon, ln_k)?,
    })
}

fn check_c(c: f64, n: usize) -> Result<MutationParams> {
    Ok(MutationParams::new(c, n)?)
}

fn below_minimum(warnings: &[ConstructionWarning]) -> bool {
    warnings.iter().any(|w| matches!(w, ConstructionWarning::BelowMinimumSize { .. }))
}

#[derive(Serialize)]
struct ConstructReport<'a> {
    family: &'a FamilySpec,
    n: usize,
    seed: u64,
    ln_phi_max: f64,
    construction: &'a DriftConstruction,
}

fn cmd_construct(obj: &ObjectiveArgs, drift: &DriftArgs) -> Result<Report> {
    let inst = instance(obj)?;
    let params = drift_params(drift)?;
    check_c(params.c, inst.n)?;
    let built = construct(&inst.objective, &params)?;
    let s = &built.structure;
    let summary = format!(
        "construct: family={} n={} blocks={} long={} jumps={} parts={} warnings={}",
        inst.spec,
        inst.n,
        s.blocks.len(),
        s.blocks.iter().filter(|b| b.is_long).count(),
        built.partition.jumps.len(),
        built.partition.parts.len(),
        built.warnings.len()
    );
    let outcome = if below_minimum(&built.warnings) { Outcome::Warning } else { Outcome::Ok };
    let json = canonical_json(
        "construct",
        &ConstructReport {
            family: &inst.spec,
            n: inst.n,
            seed: obj.seed,
            ln_phi_max: built.ln_phi_max(),
            construction: &built,
        },
    )?;
    Ok(Report { json, csv: None, summary, outcome })
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    family: &'a FamilySpec,
    n: usize,
    seed: u64,
    params: DriftParams,
    warnings: &'a [ConstructionWarning],
    definition: DefinitionReport,
    feasibility: FeasibilityReport,
}

fn cmd_verify(
    obj: &ObjectiveArgs,
    drift: &DriftArgs,
    mode: Option<ModeArg>,
    budget: usize,
    mc_samples: u64,
) -> Result<Report> {
    let inst = instance(obj)?;
    let params = drift_params(drift)?;
    check_c(params.c, inst.n)?;
    let mode = match mode {
        Some(ModeArg::Exhaustive) => VerifyMode::Exhaustive,
        Some(ModeArg::Sampled) => VerifyMode::Sampled,
        None if inst.n <= EXHAUSTIVE_CAP => VerifyMode::Exhaustive,
        None => VerifyMode::Sampled,
    };
    if mode == VerifyMode::Sampled && budget == 0 {
        return Err(CliError::Invalid("--budget must be at least 1".into()));
    }
    if mc_samples < driftlab::verify::monte_carlo::MIN_SAMPLES {
        return Err(CliError::Invalid("--mc-samples must be at least 1000".into()));
    }
    let built = construct(&inst.objective, &params)?;
    let options = VerifyOptions { mode, budget, seed: obj.seed, epsilon: params.epsilon, mc_samples };
    let feasibility = verify_feasibility(&inst.objective, &built.weights, params.c, Some(&built.partition), &options)?;
    let definition = check_definition_conditions(&built.weights);
    let passed = feasibility.passed() && definition.passed();
    let summary = format!(
        "verify: family={} n={} c={} mode={} states={} min_drift_factor={:e} implied_nu={} {}{}{}",
        inst.spec,
        inst.n,
        params.c,
        if mode == VerifyMode::Exhaustive { "exhaustive" } else { "sampled" },
        feasibility.states_checked,
        feasibility.min_drift_factor,
        feasibility.implied_nu.map_or("none".to_string(), |v| format!("{v:.6}")),
        if passed { "PASS" } else { "VIOLATION" },
        if feasibility.informational { " (informational: n below n0)" } else { "" },
        if feasibility.partial { " (partial)" } else { "" },
    );
    let json = canonical_json(
        "verify",
        &VerifyReport {
            family: &inst.spec,
            n: inst.n,
            seed: obj.seed,
            params,
            warnings: &built.warnings,
            definition,
            feasibility,
        },
    )?;
    Ok(Report { json, csv: None, summary, outcome: if passed { Outcome::Ok } else { Outcome::Violation } })
}

#[derive(Serialize)]
struct LemmaCount {
    kind: LemmaKind,
    checked: usize,
    min_slack: Option<f64>,
}

#[derive(Serialize)]
struct LemmasReport<'a> {
    family: &'a FamilySpec,
    n: usize,
    seed: u64,
    params: DriftParams,
    counts: Vec<LemmaCount>,
    all_hold: bool,
    report: &'a LemmaReport,
}

fn cmd_lemmas(obj: &ObjectiveArgs, drift: &DriftArgs) -> Result<Report> {
    let inst = instance(obj)?;
    let params = drift_params(drift)?;
    check_c(params.c, inst.n)?;
    let built = construct(&inst.objective, &params)?;
    let report = check_weight_lemmas(&built.weights, &built.structure)?;
    let counts: Vec<LemmaCount> = [
        LemmaKind::DampedRunSum,
        LemmaKind::DampedBlockGrowth,
        LemmaKind::DampedRunLeftEnd,
        LemmaKind::ShortBlockPrefix,
    ]
    .into_iter()
    .map(|kind| LemmaCount { kind, checked: report.count(kind), min_slack: report.min_slack(kind) })
    .collect();
    let all_hold = report.all_hold();
    let summary = format!(
        "lemmas: family={} n={} checks={} failures={} skipped={} {}",
        inst.spec,
        inst.n,
        report.checks.len(),
        report.failures().count(),
        report.skipped.iter().map(|s| s.1).sum::<usize>(),
        if all_hold { "PASS" } else { "VIOLATION" }
    );
    let json = canonical_json(
        "lemmas",
        &LemmasReport { family: &inst.spec, n: inst.n, seed: obj.seed, params, counts, all_hold, report: &report },
    )?;
    Ok(Report { json, csv: None, summary, outcome: if all_hold { Outcome::Ok } else { Outcome::Violation } })
}

#[derive(Serialize)]
struct RunReport<'a> {
    family: &'a FamilySpec,
    n: usize,
    c: f64,
    seed: u64,
    max_evaluations: u64,
    truncations: usize,
    summary: Summary,
    records: &'a [RunRecord],
}

fn cmd_run(obj: &ObjectiveArgs, mutation: &MutationArgs, reps: usize, max_evaluations: Option<u64>) -> Result<Report> {
    use rayon::prelude::*;
    let inst = instance(obj)?;
    let params = check_c(mutation.c, inst.n)?;
    if reps == 0 {
        return Err(CliError::Invalid("--reps must be at least 1".into()));
    }
    let cap = match max_evaluations {
        Some(0) => return Err(CliError::Invalid("--max-evaluations must be at least 1".into())),
        Some(m) => m,
        None => default_max_evaluations(inst.n, mutation.c),
    };
    let records: Vec<RunRecord> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| run_ea(&inst.objective, &params, run_seed(obj.seed, 0, rep), cap))
        .collect::<driftlab::Result<_>>()?;
    let times: Vec<u64> = records.iter().map(|r| r.optimisation_time).collect();
    let summary = Summary::of(&times);
    let truncations = records.iter().filter(|r| r.truncated).count();
    let line = format!(
        "run: family={} n={} c={} reps={} median_T={} mean_T={:.2} truncated={}",
        inst.spec, inst.n, mutation.c, reps, summary.median, summary.mean, truncations
    );
    let rows = records.iter().map(|r| RunRow::new(inst.spec.name(), inst.n, mutation.c, r)).collect();
    let json = canonical_json(
        "run",
        &RunReport {
            family: &inst.spec,
            n: inst.n,
            c: mutation.c,
            seed: obj.seed,
            max_evaluations: cap,
            truncations,
            summary,
            records: &records,
        },
    )?;
    let outcome = if truncations > 0 { Outcome::Inconclusive } else { Outcome::Ok };
    Ok(Report { json, csv: Some(rows), summary: line, outcome })
}

fn cmd_scaling(family: &str, n_grid: &[usize], c_list: &[f64], reps: usize, seed: u64) -> Result<Report> {
    let spec: FamilySpec = family.parse()?;
    if n_grid.contains(&0) {
        return Err(CliError::Invalid("--n-grid entries must be at least 1".into()));
    }
    let result = scaling_experiment(&spec, c_list, n_grid, reps, seed)?;
    let plateaus: Vec<String> = result.plateaus.iter().map(|p| format!("c={}:{:.3}", p.c, p.ratio)).collect();
    let summary = format!(
        "scaling: family={} cells={} plateau_ratios=[{}] {}",
        spec,
        result.cells.len(),
        plateaus.join(" "),
        if result.inconclusive() {
            "INCONCLUSIVE"
        } else if result.passed() {
            "PASS"
        } else {
            "VIOLATION"
        }
    );
    let rows = result
        .cells
        .iter()
        .flat_map(|cell| cell.records.iter().map(|r| RunRow::new(spec.name(), cell.n, cell.c, r)))
        .collect();
    let outcome = if result.inconclusive() {
        Outcome::Inconclusive
    } else if result.passed() {
        Outcome::Ok
    } else {
        Outcome::Violation
    };
    Ok(Report { json: canonical_json("scaling", &result)?, csv: Some(rows), summary, outcome })
}

fn cmd_tail(obj: &ObjectiveArgs, drift: &DriftArgs, reps: usize, lambdas: &[f64], nu: Option<f64>) -> Result<Report> {
    let inst = instance(obj)?;
    let params = drift_params(drift)?;
    check_c(params.c, inst.n)?;
    let built = construct(&inst.objective, &params)?;
    let nu = match nu {
        Some(v) if !(v >= 1.0 && v.is_finite()) => {
            return Err(CliError::Invalid(format!("--nu must be at least 1, got {v}")))
        }
        Some(v) => NuEstimate { nu: v, source: NuSource::Given, measured_at: inst.n },
        None => {
            if matches!(inst.spec, FamilySpec::Explicit { .. }) && inst.n > EXHAUSTIVE_CAP {
                return Err(CliError::Invalid(format!("explicit objectives above n = {EXHAUSTIVE_CAP} need --nu")));
            }
            estimate_nu(&inst.spec, inst.n, params.c, &params, obj.seed)?
        }
    };
    let result = tail_experiment(&inst.spec, inst.n, params.c, reps, lambdas, obj.seed, nu, built.ln_phi_max())?;
    let rows: Vec<String> =
        result.rows.iter().map(|r| format!("lambda={}:{}/{}", r.lambda, r.exceedances, result.reps)).collect();
    let summary = format!(
        "tail: family={} n={} c={} nu={:.6} exceedances=[{}] truncated={} {}",
        inst.spec,
        inst.n,
        params.c,
        result.nu.nu,
        rows.join(" "),
        result.truncations,
        if result.passed() { "PASS" } else { "VIOLATION" }
    );
    let csv = result.records.iter().map(|r| RunRow::new(inst.spec.name(), inst.n, params.c, r)).collect();
    let outcome = if !result.passed() {
        Outcome::Violation
    } else if result.truncations > 0 {
        Outcome::Inconclusive
    } else {
        Outcome::Ok
    };
    Ok(Report { json: canonical_json("tail", &result)?, csv: Some(csv), summary, outcome })
}

fn cmd_lower_bound(obj: &ObjectiveArgs, mutation: &MutationArgs, reps: usize) -> Result<Report> {
    let inst = instance(obj)?;
    check_c(mutation.c, inst.n)?;
    let result = lower_bound_experiment(&inst.spec, inst.n, mutation.c, reps, obj.seed)?;
    let summary = format!(
        "lower-bound: family={} n={} c={} threshold={:.1} successes={}/{} {}{}",
        inst.spec,
        inst.n,
        mutation.c,
        result.threshold,
        result.successes_by_threshold,
        reps,
        if result.passed() { "PASS" } else { "VIOLATION" },
        if result.informational { " (informational)" } else { "" }
    );
    let csv = result.records.iter().map(|r| RunRow::new(inst.spec.name(), inst.n, mutation.c, r)).collect();
    let outcome = if result.passed() { Outcome::Ok } else { Outcome::Violation };
    Ok(Report { json: canonical_json("lower-bound", &result)?, csv: Some(csv), summary, outcome })
}
