//! Sampled one-step drift for problem sizes beyond mask enumeration.

use super::exact::{DriftEstimate, Method};
use crate::bits::BitString;
use crate::drift::DriftWeights;
use crate::ea::{FlipSampler, MutationParams};
use crate::error::{Error, Result};
use crate::objective::LinearObjective;
use crate::rng::run_rng;
use crate::wide::SignedTerm;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

pub const MIN_SAMPLES: u64 = 1000;

/// Mean of `Φ(select(f, x, mutate(x)))` over `samples` draws with a 99%
/// normal-approximation confidence half-width. Deterministic given `seed`.
pub fn mc_drift_estimate(
    f: &LinearObjective,
    weights: &DriftWeights,
    x: &BitString,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<DriftEstimate> {
    let n = f.n();
    if x.len() != n || weights.n() != n {
        return Err(Error::LengthMismatch { expected: n, actual: x.len() });
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("at least {MIN_SAMPLES} samples required, got {samples}")));
    }
    if x.is_zero() {
        return Err(Error::InvalidArgument("the drift factor is undefined at the optimum".into()));
    }
    let params = MutationParams::new(c, n)?;
    let sampler = FlipSampler::new(&params);
    let mut rng = run_rng(seed);

    // work relative to Φ(x) so that steep weights stay finite
    let ln_phi = weights.ln_phi(x)?;
    let rel = |i: usize| (weights.ln_weight(i) - ln_phi).exp();

    let mut flips = Vec::new();
    let mut scratch: Vec<SignedTerm> = Vec::new();
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 1..=samples {
        sampler.sample(&mut rng, &mut flips);
        let mut ratio = 1.0;
        if !flips.is_empty() && f.accepts_flips(x, &flips, &mut scratch) {
            for &i in &flips {
                if x.get(i) {
                    ratio -= rel(i);
                } else {
                    ratio += rel(i);
                }
            }
            ratio = ratio.max(0.0);
        }
        // Welford update
        let delta = ratio - mean;
        mean += delta / k as f64;
        m2 += delta * (ratio - mean);
    }
    let variance = m2 / (samples - 1) as f64;
    let half = Z_99 * (variance / samples as f64).sqrt();
    let phi = ln_phi.exp();
    Ok(DriftEstimate {
        state: x.clone(),
        phi_value: phi,
        expected_phi_next: mean * phi,
        drift_factor: 1.0 - mean,
        method: Method::MonteCarlo,
        samples,
        ci_halfwidth: Some(half * phi),
    })
}
