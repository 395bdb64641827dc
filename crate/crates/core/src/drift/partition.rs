//! Jumps and the fitness-based partition they induce.

use serde::{Deserialize, Serialize};

use super::blocks::{BlockStructure, Regime};
use super::weights::DriftWeights;
use crate::bits::BitString;
use crate::objective::LinearObjective;

/// One part `N_j = {lo..=hi}` of the bit positions. `M_j` is the set of
/// strings whose leftmost one lies in `N_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub lo: usize,
    pub hi: usize,
    /// `ln min Φ(M_j) = ln w_lo`.
    pub ln_min_phi: f64,
    /// `ln max Φ(M_j) = ln Σ_{i <= hi} w_i`.
    pub ln_max_phi: f64,
}

impl Part {
    pub fn log_ratio(&self) -> f64 {
        self.ln_max_phi - self.ln_min_phi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessPartition {
    pub n: usize,
    pub jumps: Vec<usize>,
    /// `M_1, M_2, ...`; `M_0` is the all-zero string and is implicit.
    pub parts: Vec<Part>,
    /// `6⌈1/γ⌉ + 1`.
    pub k_bound: u64,
}

impl FitnessPartition {
    /// Index `j >= 1` of the part containing `x`, or 0 for the all-zero string.
    pub fn part_of(&self, x: &BitString) -> usize {
        match x.leftmost_one() {
            None => 0,
            Some(i) => self.jumps.partition_point(|&jump| jump <= i) + 1,
        }
    }
}

/// Positions `i >= 2` in a copy regime with `w_i / w_{i-1} > n²`.
///
/// Inside a copy-regime block `w_i / w_{i-1} = a_i / a_{i-1}`, so the test
/// is an exact coefficient comparison.
pub fn find_jumps(f: &LinearObjective, structure: &BlockStructure) -> Vec<usize> {
    let n = f.n();
    let n2 = (n as u128) * (n as u128);
    (2..=n)
        .filter(|&i| structure.regime_of(i) == Regime::Copy && f.coefficient(i).gt_scaled(&f.coefficient(i - 1), n2))
        .collect()
}

/// `k = 6⌈1/γ⌉ + 1`.
pub fn k_bound(gamma: f64) -> u64 {
    6 * (1.0 / gamma).ceil() as u64 + 1
}

pub fn build_partition(jumps: &[usize], weights: &DriftWeights, gamma: f64) -> FitnessPartition {
    let n = weights.n();
    let mut bounds = Vec::with_capacity(jumps.len() + 2);
    bounds.push(1);
    bounds.extend_from_slice(jumps);
    bounds.push(n + 1);
    let parts = bounds
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1] - 1);
            Part { lo, hi, ln_min_phi: weights.ln_weight(lo), ln_max_phi: weights.ln_total(hi) }
        })
        .collect();
    FitnessPartition { n, jumps: jumps.to_vec(), parts, k_bound: k_bound(gamma) }
}
