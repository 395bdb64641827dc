//! Exact one-step drift by enumerating all `2^n` mutation masks.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::drift::DriftWeights;
use crate::error::{Error, Result};
use crate::objective::LinearObjective;
use crate::wide::{signed_sum_sign, SignedTerm};

/// Largest `n` for single-state mask enumeration.
pub const MASK_CAP: usize = 20;
/// Largest `n` for enumerating every state and every mask.
pub const EXHAUSTIVE_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub state: BitString,
    pub phi_value: f64,
    pub expected_phi_next: f64,
    /// `1 - E[Φ(x_new)] / Φ(x)`.
    pub drift_factor: f64,
    pub method: Method,
    pub samples: u64,
    pub ci_halfwidth: Option<f64>,
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `p^k (1-p)^{n-k}` for `k = 0..=n`, `p = c/n`.
pub fn mask_probabilities(n: usize, c: f64) -> Vec<f64> {
    let p = c / n as f64;
    (0..=n)
        .map(|k| {
            let q = (n - k) as f64;
            let kf = k as f64;
            let ln_p = if k == 0 { 0.0 } else { kf * p.ln() };
            let ln_q = if k == n { 0.0 } else { q * (-p).ln_1p() };
            (ln_p + ln_q).exp()
        })
        .collect()
}

/// Total probability of all `2^n` masks, summed mask by mask.
pub fn mask_probability_total(n: usize, c: f64) -> f64 {
    let probs = mask_probabilities(n, c);
    let mut acc = CompensatedSum::default();
    for mask in 0u64..(1u64 << n) {
        acc.add(probs[mask.count_ones() as usize]);
    }
    acc.value()
}

/// Precomputed tables for exact drift computations on one objective.
///
/// `Φ` values are stored divided by `exp(scale)` so that steep weight
/// vectors stay finite; drift factors do not depend on the scale.
pub struct ExactOracle<'a> {
    f: &'a LinearObjective,
    n: usize,
    probs: Vec<f64>,
    phi: Vec<f64>,
    ln_scale: f64,
    /// Fitness rank of every state (equal values share a rank); only for
    /// `n <= EXHAUSTIVE_CAP`.
    rank: Option<Vec<u32>>,
}

impl<'a> ExactOracle<'a> {
    pub fn new(f: &'a LinearObjective, weights: &DriftWeights, c: f64) -> Result<ExactOracle<'a>> {
        let n = f.n();
        if n > MASK_CAP {
            return Err(Error::EnumerationCap { n, cap: MASK_CAP });
        }
        if weights.n() != n {
            return Err(Error::LengthMismatch { expected: n, actual: weights.n() });
        }
        if !(c > 0.0 && c <= n as f64) {
            return Err(Error::InvalidMutation(format!("c = {c} must lie in (0, n]")));
        }
        let ln_total = weights.ln_total(n);
        let ln_scale = if ln_total > 600.0 { weights.ln_weight(n) } else { 0.0 };
        let w: Vec<f64> = (1..=n).map(|i| (weights.ln_weight(i) - ln_scale).exp()).collect();
        let size = 1usize << n;
        let mut phi = vec![0.0; size];
        for m in 1..size {
            let low = m.trailing_zeros() as usize;
            phi[m] = phi[m & (m - 1)] + w[low];
        }
        let rank = (n <= EXHAUSTIVE_CAP).then(|| fitness_ranks(f));
        Ok(ExactOracle { f, n, probs: mask_probabilities(n, c), phi, ln_scale, rank })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Φ(x) / exp(scale)`.
    pub fn scaled_phi(&self, state: u64) -> f64 {
        self.phi[state as usize]
    }

    fn unscale(&self, v: f64) -> f64 {
        if self.ln_scale == 0.0 {
            v
        } else {
            v * self.ln_scale.exp()
        }
    }

    /// Scaled `E[Φ(x_new)]` for the state given as a mask.
    pub fn scaled_expected_next(&self, state: u64) -> f64 {
        if state == 0 {
            return 0.0;
        }
        let mut acc = CompensatedSum::default();
        match &self.rank {
            Some(rank) => {
                let r = rank[state as usize];
                for mask in 0u64..(1u64 << self.n) {
                    let y = state ^ mask;
                    let next = if rank[y as usize] <= r { y } else { state };
                    acc.add(self.probs[mask.count_ones() as usize] * self.phi[next as usize]);
                }
            }
            None => {
                let mut scratch: Vec<SignedTerm> = Vec::new();
                for mask in 0u64..(1u64 << self.n) {
                    let next = if self.f.accepts_mask(state, mask, &mut scratch) { state ^ mask } else { state };
                    acc.add(self.probs[mask.count_ones() as usize] * self.phi[next as usize]);
                }
            }
        }
        acc.value()
    }

    /// Exact estimate for a non-zero state.
    pub fn estimate(&self, state: u64) -> DriftEstimate {
        let phi = self.scaled_phi(state);
        let next = self.scaled_expected_next(state);
        DriftEstimate {
            state: BitString::from_mask(self.n, state),
            phi_value: self.unscale(phi),
            expected_phi_next: self.unscale(next),
            drift_factor: 1.0 - next / phi,
            method: Method::Exact,
            samples: 1u64 << self.n,
            ci_halfwidth: None,
        }
    }
}

/// Dense fitness ranks of all `2^n` states using exact comparisons.
fn fitness_ranks(f: &LinearObjective) -> Vec<u32> {
    let n = f.n();
    let mut scratch: Vec<SignedTerm> = Vec::new();
    let mut cmp = |a: u64, b: u64| {
        scratch.clear();
        let mut diff = a ^ b;
        while diff != 0 {
            let k = diff.trailing_zeros() as usize;
            diff &= diff - 1;
            scratch.push(SignedTerm { value: f.coefficient(k + 1), negative: b >> k & 1 == 1 });
        }
        signed_sum_sign(&scratch)
    };
    let mut order: Vec<u64> = (0..1u64 << n).collect();
    order.sort_by(|&a, &b| cmp(a, b));
    let mut rank = vec![0u32; order.len()];
    let mut current = 0u32;
    for k in 1..order.len() {
        if cmp(order[k - 1], order[k]) == Ordering::Less {
            current += 1;
        }
        rank[order[k] as usize] = current;
    }
    rank
}

fn state_mask(f: &LinearObjective, x: &BitString) -> Result<u64> {
    if x.len() != f.n() {
        return Err(Error::LengthMismatch { expected: f.n(), actual: x.len() });
    }
    if f.n() > MASK_CAP {
        return Err(Error::EnumerationCap { n: f.n(), cap: MASK_CAP });
    }
    Ok(x.to_mask())
}

/// `Σ_y p^{|y|} (1-p)^{n-|y|} Φ(select(f, x, x ⊕ y))` over all masks `y`.
pub fn exact_expected_phi_next(f: &LinearObjective, weights: &DriftWeights, x: &BitString, c: f64) -> Result<f64> {
    let state = state_mask(f, x)?;
    let oracle = ExactOracle::new(f, weights, c)?;
    Ok(oracle.unscale(oracle.scaled_expected_next(state)))
}

pub fn exact_drift_factor(f: &LinearObjective, weights: &DriftWeights, x: &BitString, c: f64) -> Result<DriftEstimate> {
    let state = state_mask(f, x)?;
    if state == 0 {
        return Err(Error::InvalidArgument("the drift factor is undefined at the optimum".into()));
    }
    Ok(ExactOracle::new(f, weights, c)?.estimate(state))
}
