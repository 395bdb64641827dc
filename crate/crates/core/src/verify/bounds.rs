//! Drift-theorem runtime bounds and the basic potential conditions.

use serde::{Deserialize, Serialize};

use crate::drift::{BlockStructure, DriftWeights, FitnessPartition, Regime};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    /// `ν (ln Φ_max + 1)`.
    pub expected_bound: f64,
    /// `⌈ν (ln Φ_max + λ)⌉`, when `λ` is given.
    pub tail_threshold: Option<f64>,
    /// `e^{-λ}`, when `λ` is given.
    pub tail_prob_bound: Option<f64>,
}

fn check_nu_lambda(nu: f64, lambda: Option<f64>) -> Result<()> {
    if !(nu >= 1.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!("nu must be at least 1, got {nu}")));
    }
    if let Some(l) = lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
        }
    }
    Ok(())
}

/// Bounds for a potential with maximum `Φ_max` given as `ln Φ_max`.
pub fn theorem_bound_ln(nu: f64, ln_phi_max: f64, lambda: Option<f64>) -> Result<TheoremBound> {
    check_nu_lambda(nu, lambda)?;
    if !(ln_phi_max >= 0.0 && ln_phi_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("phi_max must be at least 1 (ln = {ln_phi_max})")));
    }
    Ok(TheoremBound {
        expected_bound: nu * (ln_phi_max + 1.0),
        tail_threshold: lambda.map(|l| (nu * (ln_phi_max + l)).ceil()),
        tail_prob_bound: lambda.map(|l| (-l).exp()),
    })
}

pub fn theorem_bound(nu: f64, phi_max: f64, lambda: Option<f64>) -> Result<TheoremBound> {
    theorem_bound_ln(nu, phi_max.ln(), lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseBound {
    /// `ν Σ_j (ln max Φ(M_j) - ln min Φ(M_j) + 1)`.
    pub expected_bound: f64,
    /// `Σ_j ⌈ν (ln max Φ(M_j) - ln min Φ(M_j) + λ)⌉`.
    pub tail_threshold_sum: Option<f64>,
    /// `k e^{-λ}` with `k` the number of non-empty parts.
    pub tail_prob_bound: Option<f64>,
    pub parts: usize,
}

pub fn piecewise_bound(nu: f64, partition: &FitnessPartition, lambda: Option<f64>) -> Result<PiecewiseBound> {
    check_nu_lambda(nu, lambda)?;
    if partition.parts.is_empty() {
        return Err(Error::InvalidArgument("partition has no parts".into()));
    }
    let k = partition.parts.len();
    let expected_bound = nu * partition.parts.iter().map(|p| p.log_ratio() + 1.0).sum::<f64>();
    let tail_threshold_sum = lambda.map(|l| partition.parts.iter().map(|p| (nu * (p.log_ratio() + l)).ceil()).sum());
    Ok(PiecewiseBound {
        expected_bound,
        tail_threshold_sum,
        tail_prob_bound: lambda.map(|l| k as f64 * (-l).exp()),
        parts: k,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitionReport {
    /// `Φ(0)`.
    pub phi_at_optimum: f64,
    /// `min_{x ≠ 0} Φ(x) = min_i w_i`.
    pub min_nonzero_phi: f64,
    pub optimum_is_zero: bool,
    pub nonzero_at_least_one: bool,
}

impl DefinitionReport {
    pub fn passed(&self) -> bool {
        self.optimum_is_zero && self.nonzero_at_least_one
    }
}

/// `Φ(0) = 0` and `Φ(x) >= 1` for every `x ≠ 0`.
pub fn check_definition_conditions(weights: &DriftWeights) -> DefinitionReport {
    let ln_min = weights.ln_weights().iter().copied().fold(f64::INFINITY, f64::min);
    DefinitionReport {
        phi_at_optimum: 0.0,
        min_nonzero_phi: ln_min.exp(),
        optimum_is_zero: true,
        nonzero_at_least_one: ln_min >= 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartPolynomiality {
    pub lo: usize,
    pub hi: usize,
    /// `ln max Φ(M_j) - ln min Φ(M_j)`.
    pub log_ratio: f64,
    /// `log_ratio / ln n`.
    pub exponent: f64,
    /// `1 + 4 m + c ln K / ln n`, with `m` the number of copy-regime
    /// miniblocks meeting the part: each contributes at most `n^4`, the
    /// damped positions together at most `K^c`, and the sum at most `n`.
    pub exponent_bound: f64,
    /// `max Φ(M_j) <= n w_hi`.
    pub max_within_n_w_hi: bool,
    pub holds: bool,
}

pub fn check_partition_polynomiality(
    weights: &DriftWeights,
    structure: &BlockStructure,
    partition: &FitnessPartition,
) -> Result<Vec<PartPolynomiality>> {
    let params = weights
        .params()
        .ok_or_else(|| Error::InvalidWeights("constructed weights (with parameters) required".into()))?;
    let n = weights.n();
    let ln_n = (n as f64).ln();
    let tol = 1e-9;
    Ok(partition
        .parts
        .iter()
        .map(|p| {
            let copy_miniblocks = structure
                .miniblocks
                .iter()
                .filter(|m| m.rightmost.max(p.lo) < m.leftmost.min(p.hi))
                .filter(|m| structure.regime_of(m.leftmost) == Regime::Copy)
                .count();
            let log_ratio = p.log_ratio();
            let (exponent, exponent_bound) = if n > 1 {
                (log_ratio / ln_n, 1.0 + 4.0 * copy_miniblocks as f64 + params.c * params.ln_k / ln_n)
            } else {
                (0.0, 0.0)
            };
            let cap = ln_n + weights.ln_weight(p.hi);
            let max_within = p.ln_max_phi <= cap + tol * cap.abs().max(1.0);
            PartPolynomiality {
                lo: p.lo,
                hi: p.hi,
                log_ratio,
                exponent,
                exponent_bound,
                max_within_n_w_hi: max_within,
                holds: max_within && exponent <= exponent_bound + tol * exponent_bound.max(1.0),
            }
        })
        .collect())
}
