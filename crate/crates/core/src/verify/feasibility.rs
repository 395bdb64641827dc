//! Drift-condition verification over whole state sets.

use std::collections::HashSet;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::{DriftEstimate, ExactOracle, EXHAUSTIVE_CAP, MASK_CAP};
use super::monte_carlo::mc_drift_estimate;
use crate::bits::BitString;
use crate::drift::{min_problem_size, target_delta, DriftWeights, FitnessPartition};
use crate::error::{Error, Result};
use crate::objective::LinearObjective;
use crate::rng::{below, derive_seed, run_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// Every non-optimal state with every mask; `n <= 12`.
    Exhaustive,
    /// Stratified state sample; exact per state up to `n = 20`, sampled
    /// beyond.
    Sampled,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: VerifyMode,
    /// Maximum number of states to check in sampled mode.
    pub budget: usize,
    pub seed: u64,
    /// `ε`, used for the reference constant `c e^{-3c} (1-ε)^2`.
    pub epsilon: f64,
    /// Samples per state when the state is too large for enumeration.
    pub mc_samples: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mode: VerifyMode::Exhaustive, budget: 2000, seed: 0, epsilon: 0.5, mc_samples: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub n: usize,
    pub c: f64,
    pub mode: VerifyMode,
    pub states_checked: u64,
    pub min_drift_factor: f64,
    pub argmin_state: Option<BitString>,
    /// `1 / min_drift_factor`; `None` when the minimum is not positive.
    pub implied_nu: Option<f64>,
    pub target_delta: f64,
    /// `n / target_delta`, the size-dependent constant the drift analysis
    /// guarantees for large `n`.
    pub reference_nu: f64,
    /// States with a non-positive drift factor.
    pub violations: Vec<BitString>,
    pub n0: u64,
    /// Set when `n < n0`: results are not held against the asymptotic claim.
    pub informational: bool,
    /// Set when the state budget cut the sample short.
    pub partial: bool,
}

impl FeasibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.min_drift_factor > 0.0
    }
}

pub fn verify_feasibility(
    f: &LinearObjective,
    weights: &DriftWeights,
    c: f64,
    partition: Option<&FitnessPartition>,
    options: &VerifyOptions,
) -> Result<FeasibilityReport> {
    let n = f.n();
    crate::ea::MutationParams::new(c, n)?;
    let (estimates, partial) = match options.mode {
        VerifyMode::Exhaustive => {
            if n > EXHAUSTIVE_CAP {
                return Err(Error::EnumerationCap { n, cap: EXHAUSTIVE_CAP });
            }
            let oracle = ExactOracle::new(f, weights, c)?;
            let states: Vec<u64> = (1..1u64 << n).collect();
            (states.par_iter().map(|&s| oracle.estimate(s)).collect::<Vec<_>>(), false)
        }
        VerifyMode::Sampled => {
            let (states, partial) = sample_states(n, partition, options.budget, options.seed);
            let estimates = if n <= MASK_CAP {
                let oracle = ExactOracle::new(f, weights, c)?;
                states.par_iter().map(|x| oracle.estimate(x.to_mask())).collect()
            } else {
                states
                    .par_iter()
                    .enumerate()
                    .map(|(k, x)| {
                        mc_drift_estimate(f, weights, x, c, options.mc_samples, derive_seed(options.seed, k as u64))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            (estimates, partial)
        }
    };
    Ok(summarize(n, c, options, estimates, partial))
}

fn summarize(
    n: usize,
    c: f64,
    options: &VerifyOptions,
    estimates: Vec<DriftEstimate>,
    partial: bool,
) -> FeasibilityReport {
    let mut min = f64::INFINITY;
    let mut argmin = None;
    let mut violations = Vec::new();
    for e in &estimates {
        if e.drift_factor < min {
            min = e.drift_factor;
            argmin = Some(e.state.clone());
        }
        if e.drift_factor <= 0.0 {
            violations.push(e.state.clone());
        }
    }
    let delta = target_delta(c, options.epsilon);
    let n0 = min_problem_size(c, options.epsilon);
    FeasibilityReport {
        n,
        c,
        mode: options.mode,
        states_checked: estimates.len() as u64,
        min_drift_factor: min,
        argmin_state: argmin,
        implied_nu: (min > 0.0).then(|| 1.0 / min),
        target_delta: delta,
        reference_nu: n as f64 / delta,
        violations,
        n0,
        informational: (n as u64) < n0,
        partial,
    }
}

/// States for sampled verification, in a fixed order: all-ones, single-bit
/// strings, part extremes, Hamming-weight strata `{1, 2, n/2, n-1, n}`, then
/// uniform strings until `budget` states are collected.
pub fn sample_states(
    n: usize,
    partition: Option<&FitnessPartition>,
    budget: usize,
    seed: u64,
) -> (Vec<BitString>, bool) {
    let mut rng = run_rng(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |x: BitString, out: &mut Vec<BitString>| {
        if !x.is_zero() && seen.insert(x.clone()) {
            out.push(x);
        }
    };

    let mut fixed = vec![BitString::ones(n)];
    fixed.extend((1..=n).map(|i| BitString::from_positions(n, [i])));
    if let Some(p) = partition {
        for part in &p.parts {
            fixed.push(BitString::from_positions(n, [part.lo]));
            fixed.push(BitString::from_positions(n, 1..=part.hi));
        }
    }
    let mut weights = vec![1, 2, n / 2, n.saturating_sub(1), n];
    weights.retain(|&k| k >= 1 && k <= n);
    weights.dedup();
    for &k in &weights {
        for _ in 0..4 {
            fixed.push(random_with_weight(n, k, &mut rng));
        }
    }
    for x in fixed {
        push(x, &mut out);
    }
    let partial = out.len() > budget;
    out.truncate(budget);
    let mut attempts = 0;
    while out.len() < budget && attempts < 4 * budget {
        attempts += 1;
        let words = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
        let x = BitString::from_words(n, words);
        push(x, &mut out);
    }
    (out, partial)
}

fn random_with_weight<R: RngCore>(n: usize, k: usize, rng: &mut R) -> BitString {
    // partial Fisher-Yates over the positions
    let mut pos: Vec<usize> = (1..=n).collect();
    for j in 0..k {
        let r = j + below(rng, (n - j) as u64) as usize;
        pos.swap(j, r);
    }
    BitString::from_positions(n, pos[..k].iter().copied())
}
