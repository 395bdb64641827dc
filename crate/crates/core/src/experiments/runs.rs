//! Batch EA experiments: runtime scaling, tail frequencies, lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{generate_family, FamilySpec};
use crate::drift::{construct, default_params, DriftParams};
use crate::ea::{default_max_evaluations, run_ea, MutationParams, RunRecord};
use crate::error::{Error, Result};
use crate::objective::LinearObjective;
use crate::rng::derive_seed;
use crate::verify::{verify_feasibility, VerifyMode, VerifyOptions, EXHAUSTIVE_CAP};

/// Largest allowed ratio of the per-`c` maximum and minimum median
/// `T / (n ln n)` across the size grid.
pub const PLATEAU_TOLERANCE: f64 = 2.0;
/// Largest truncation rate of a conclusive cell.
pub const MAX_TRUNCATION_RATE: f64 = 0.01;

/// Seed of the objective instance at size `n` (shared by all `c`).
pub fn instance_seed(master_seed: u64, n: usize) -> u64 {
    derive_seed(master_seed, u64::MAX - n as u64)
}

/// Seed of repetition `rep` in cell `cell`.
pub fn run_seed(master_seed: u64, cell: u64, rep: u64) -> u64 {
    derive_seed(derive_seed(master_seed, cell), rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub min: u64,
    pub max: u64,
}

impl Summary {
    pub fn of(times: &[u64]) -> Summary {
        let mut sorted = times.to_vec();
        sorted.sort_unstable();
        let quantile = |q: f64| {
            // linear interpolation between order statistics
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] as f64 + (sorted[hi] as f64 - sorted[lo] as f64) * (pos - lo as f64)
        };
        Summary {
            mean: sorted.iter().map(|&t| t as f64).sum::<f64>() / sorted.len() as f64,
            median: quantile(0.5),
            q10: quantile(0.1),
            q90: quantile(0.9),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub family: String,
    pub n: usize,
    pub c: f64,
    pub cell: u64,
    pub max_evaluations: u64,
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    /// `median T / (n ln n)`.
    pub normalized_median: f64,
    pub truncations: usize,
    /// Truncation rate above 1%.
    pub inconclusive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub c: f64,
    pub min_normalized: f64,
    pub max_normalized: f64,
    pub ratio: f64,
    pub within_tolerance: bool,
    pub inconclusive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub family: FamilySpec,
    pub master_seed: u64,
    pub reps: usize,
    pub cells: Vec<CellResult>,
    pub plateaus: Vec<Plateau>,
}

impl ScalingResult {
    pub fn inconclusive(&self) -> bool {
        self.cells.iter().any(|c| c.inconclusive)
    }

    pub fn passed(&self) -> bool {
        !self.inconclusive() && self.plateaus.iter().all(|p| p.within_tolerance)
    }
}

fn check_grid(c_list: &[f64], n_grid: &[usize]) -> Result<()> {
    if c_list.is_empty() || n_grid.is_empty() {
        return Err(Error::InvalidArgument("empty c list or n grid".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n grid must be strictly increasing".into()));
    }
    for &c in c_list {
        for &n in n_grid {
            MutationParams::new(c, n)?;
        }
    }
    Ok(())
}

/// Runs every `(c, n)` cell `reps` times. Cells are indexed `c`-major;
/// repetition `r` of cell `k` uses [`run_seed`]`(master, k, r)`.
pub fn scaling_experiment(
    spec: &FamilySpec,
    c_list: &[f64],
    n_grid: &[usize],
    reps: usize,
    master_seed: u64,
) -> Result<ScalingResult> {
    if reps < 30 {
        return Err(Error::InvalidArgument(format!("scaling needs at least 30 repetitions, got {reps}")));
    }
    check_grid(c_list, n_grid)?;
    let objectives: Vec<LinearObjective> =
        n_grid.iter().map(|&n| generate_family(spec, n, instance_seed(master_seed, n))).collect::<Result<_>>()?;

    let mut tasks = Vec::new();
    for (ci, &c) in c_list.iter().enumerate() {
        for (ni, &n) in n_grid.iter().enumerate() {
            let cell = (ci * n_grid.len() + ni) as u64;
            for rep in 0..reps {
                tasks.push((ci, ni, cell, rep as u64, c, n));
            }
        }
    }
    let records: Vec<RunRecord> = tasks
        .par_iter()
        .map(|&(_, ni, cell, rep, c, n)| {
            let params = MutationParams::new(c, n)?;
            run_ea(&objectives[ni], &params, run_seed(master_seed, cell, rep), default_max_evaluations(n, c))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (k, chunk) in records.chunks(reps).enumerate() {
        let (_, _, cell, _, c, n) = tasks[k * reps];
        let times: Vec<u64> = chunk.iter().map(|r| r.optimisation_time).collect();
        let summary = Summary::of(&times);
        let truncations = chunk.iter().filter(|r| r.truncated).count();
        let nf = n as f64;
        cells.push(CellResult {
            family: spec.name().into(),
            n,
            c,
            cell,
            max_evaluations: default_max_evaluations(n, c),
            records: chunk.to_vec(),
            normalized_median: summary.median / (nf * nf.ln()),
            summary,
            truncations,
            inconclusive: truncations as f64 > MAX_TRUNCATION_RATE * reps as f64,
        });
    }

    let plateaus = c_list
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let row = &cells[ci * n_grid.len()..(ci + 1) * n_grid.len()];
            let min = row.iter().map(|x| x.normalized_median).fold(f64::INFINITY, f64::min);
            let max = row.iter().map(|x| x.normalized_median).fold(f64::NEG_INFINITY, f64::max);
            Plateau {
                c,
                min_normalized: min,
                max_normalized: max,
                ratio: max / min,
                within_tolerance: max / min <= PLATEAU_TOLERANCE,
                inconclusive: row.iter().any(|x| x.inconclusive),
            }
        })
        .collect();

    Ok(ScalingResult { family: spec.clone(), master_seed, reps, cells, plateaus })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuSource {
    /// Exhaustive verification at the target size.
    Exhaustive,
    /// `ν(n) = α n` with `α` measured exhaustively at the largest enumerable size.
    Extrapolated,
    /// Supplied by the caller.
    Given,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub nu: f64,
    pub source: NuSource,
    /// Size at which the drift factor was measured.
    pub measured_at: usize,
}

/// `ν` for the constructed drift function of `spec` at size `n`.
pub fn estimate_nu(spec: &FamilySpec, n: usize, c: f64, params: &DriftParams, seed: u64) -> Result<NuEstimate> {
    let at = n.min(EXHAUSTIVE_CAP);
    if (at as f64) < c.max(1.0) {
        return Err(Error::InvalidArgument(format!("cannot measure nu below n = {}", c.ceil())));
    }
    let f = generate_family(spec, at, instance_seed(seed, at))?;
    let built = construct(&f, params)?;
    let options = VerifyOptions { mode: VerifyMode::Exhaustive, epsilon: params.epsilon, ..VerifyOptions::default() };
    let report = verify_feasibility(&f, &built.weights, c, Some(&built.partition), &options)?;
    let nu = report
        .implied_nu
        .ok_or_else(|| Error::Unachievable(format!("non-positive drift at n = {at}; no finite nu")))?;
    if at == n {
        Ok(NuEstimate { nu, source: NuSource::Exhaustive, measured_at: at })
    } else {
        Ok(NuEstimate { nu: nu / at as f64 * n as f64, source: NuSource::Extrapolated, measured_at: at })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub lambda: f64,
    /// `⌈ν (ln Φ_max + λ)⌉`.
    pub threshold: f64,
    pub exceedances: usize,
    pub frequency: f64,
    /// `e^{-λ}`.
    pub bound: f64,
    /// `sqrt(e^{-λ} (1 - e^{-λ}) / reps)`.
    pub sigma: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailResult {
    pub family: FamilySpec,
    pub n: usize,
    pub c: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub nu: NuEstimate,
    pub ln_phi_max: f64,
    pub max_evaluations: u64,
    pub truncations: usize,
    pub rows: Vec<TailRow>,
    pub records: Vec<RunRecord>,
}

impl TailResult {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passes)
    }
}

/// Empirical frequency of `T > ⌈ν (ln Φ_max + λ)⌉` for each `λ`, against
/// `e^{-λ} + 3σ`. Runs are capped at `⌈200 n ln n⌉` evaluations, far above
/// every threshold used in practice; a truncated run counts as exceeding.
#[allow(clippy::too_many_arguments)]
pub fn tail_experiment(
    spec: &FamilySpec,
    n: usize,
    c: f64,
    reps: usize,
    lambdas: &[f64],
    master_seed: u64,
    nu: NuEstimate,
    ln_phi_max: f64,
) -> Result<TailResult> {
    let params = MutationParams::new(c, n)?;
    if reps == 0 || lambdas.is_empty() {
        return Err(Error::InvalidArgument("tail experiment needs repetitions and a lambda grid".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
    }
    let f = generate_family(spec, n, instance_seed(master_seed, n))?;
    let nf = n as f64;
    let cap = ((200.0 * nf * nf.ln()).ceil() as u64).max(1000);
    let records: Vec<RunRecord> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| run_ea(&f, &params, run_seed(master_seed, 0, rep), cap))
        .collect::<Result<_>>()?;
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let threshold = (nu.nu * (ln_phi_max + lambda)).ceil();
            let exceedances = records.iter().filter(|r| r.truncated || r.optimisation_time as f64 > threshold).count();
            let frequency = exceedances as f64 / reps as f64;
            let bound = (-lambda).exp();
            let sigma = (bound * (1.0 - bound) / reps as f64).sqrt();
            TailRow {
                lambda,
                threshold,
                exceedances,
                frequency,
                bound,
                sigma,
                passes: frequency <= bound + 3.0 * sigma,
            }
        })
        .collect();
    Ok(TailResult {
        family: spec.clone(),
        n,
        c,
        reps,
        master_seed,
        nu,
        ln_phi_max,
        max_evaluations: cap,
        truncations: records.iter().filter(|r| r.truncated).count(),
        rows,
        records,
    })
}

/// Default drift parameters for `c` at `ε = 1/2`.
pub fn experiment_params(c: f64) -> Result<DriftParams> {
    default_params(c, 0.5, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub family: FamilySpec,
    pub n: usize,
    pub c: f64,
    /// `max(1, c)`.
    pub c_tilde: f64,
    /// `n ln n / (2 (c̃ + 1))`.
    pub threshold: f64,
    pub reps: usize,
    pub master_seed: u64,
    /// Runs whose optimisation time is at most the threshold.
    pub successes_by_threshold: usize,
    /// `e^{-n/36} + e^{-√n/3}`, the per-run success probability bound.
    pub bound: f64,
    /// Smallest size from which the bound is claimed:
    /// `(1 - c̃/n)^n >= e^{-(c̃+1)}`.
    pub n0: u64,
    /// Set when `n < n0` or the bound is vacuous.
    pub informational: bool,
    pub records: Vec<RunRecord>,
}

impl LowerBoundResult {
    pub fn passed(&self) -> bool {
        self.informational || self.successes_by_threshold == 0
    }
}

/// Smallest `n > c̃` with `(1 - c̃/n)^n >= e^{-(c̃+1)}`.
pub fn lower_bound_min_size(c_tilde: f64) -> u64 {
    let holds = |n: u64| {
        let nf = n as f64;
        nf > c_tilde && nf * (-c_tilde / nf).ln_1p() >= -(c_tilde + 1.0)
    };
    (1..).find(|&n| holds(n)).expect("the limit e^{-c} exceeds e^{-(c+1)}")
}

/// Counts runs that reach the optimum within `n ln n / (2(c̃+1))`
/// evaluations. Each run stops at that budget.
pub fn lower_bound_experiment(
    spec: &FamilySpec,
    n: usize,
    c: f64,
    reps: usize,
    master_seed: u64,
) -> Result<LowerBoundResult> {
    let params = MutationParams::new(c, n)?;
    if reps < 100 {
        return Err(Error::InvalidArgument(format!("lower bound needs at least 100 repetitions, got {reps}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("lower bound needs n >= 2".into()));
    }
    let f = generate_family(spec, n, instance_seed(master_seed, n))?;
    let c_tilde = c.max(1.0);
    let nf = n as f64;
    let threshold = nf * nf.ln() / (2.0 * (c_tilde + 1.0));
    let budget = (threshold.floor() as u64).max(1);
    let records: Vec<RunRecord> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| run_ea(&f, &params, run_seed(master_seed, 0, rep), budget))
        .collect::<Result<_>>()?;
    let successes = records.iter().filter(|r| !r.truncated && r.optimisation_time as f64 <= threshold).count();
    let bound = (-nf / 36.0).exp() + (-nf.sqrt() / 3.0).exp();
    let n0 = lower_bound_min_size(c_tilde);
    Ok(LowerBoundResult {
        family: spec.clone(),
        n,
        c,
        c_tilde,
        threshold,
        reps,
        master_seed,
        successes_by_threshold: successes,
        bound,
        n0,
        informational: (n as u64) < n0 || bound >= 1.0,
        records,
    })
}
