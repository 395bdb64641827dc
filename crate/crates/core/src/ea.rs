//! The (1+1) EA with independent bit mutation at rate `c/n`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::objective::LinearObjective;
use crate::rng::{below, run_rng, unit_f64};
use crate::wide::SignedTerm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationParams {
    c: f64,
    n: usize,
    rate: f64,
}

impl MutationParams {
    /// Rejects `c <= 0`, non-finite `c`, `n == 0` and `c/n > 1`.
    pub fn new(c: f64, n: usize) -> Result<MutationParams> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidMutation(format!("c must be a positive finite real, got {c}")));
        }
        if n == 0 {
            return Err(Error::InvalidMutation("problem size must be at least 1".into()));
        }
        let rate = c / n as f64;
        if rate > 1.0 {
            return Err(Error::InvalidMutation(format!("c/n = {rate} exceeds 1 (c = {c}, n = {n})")));
        }
        Ok(MutationParams { c, n, rate })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p_n = c/n`.
    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Flips each bit independently with probability `p_n`, consuming exactly
/// `n` draws (one per position, position 1 first). Bit `i` flips iff the
/// `i`-th uniform draw is below `p_n`.
pub fn mutate<R: RngCore + ?Sized>(x: &BitString, params: &MutationParams, rng: &mut R) -> BitString {
    let mut out = x.clone();
    for i in 1..=x.len() {
        if unit_f64(rng) < params.rate {
            out.flip(i);
        }
    }
    out
}

/// Returns `offspring` iff `f(offspring) <= f(parent)`.
pub fn select(f: &LinearObjective, parent: &BitString, offspring: &BitString) -> Result<BitString> {
    Ok(match f.compare(offspring, parent)? {
        std::cmp::Ordering::Greater => parent.clone(),
        _ => offspring.clone(),
    })
}

/// Draws the set of flipped positions of one independent-bit mutation.
///
/// For `p_n <= 1/4` the number of flips is drawn from the binomial law by
/// inverting a precomputed CDF (one draw) and the positions are drawn
/// uniformly without replacement; otherwise one draw per position is used.
/// The mask distribution equals that of [`mutate`]; the draw sequence does
/// not.
#[derive(Clone, Debug)]
pub struct FlipSampler {
    n: usize,
    rate: f64,
    cdf: Vec<f64>,
}

impl FlipSampler {
    const BINOMIAL_MAX_RATE: f64 = 0.25;

    pub fn new(params: &MutationParams) -> FlipSampler {
        let n = params.n;
        let p = params.rate;
        let mut cdf = Vec::new();
        if p <= Self::BINOMIAL_MAX_RATE {
            let ratio = p / (1.0 - p);
            let mut pmf = (n as f64 * (-p).ln_1p()).exp();
            let mut acc = 0.0;
            for k in 0..=n {
                acc += pmf;
                cdf.push(acc);
                if 1.0 - acc < 1e-18 {
                    break;
                }
                pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
            }
        }
        FlipSampler { n, rate: p, cdf }
    }

    /// Fills `flips` with distinct positions in `1..=n`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, flips: &mut Vec<usize>) {
        flips.clear();
        if self.cdf.is_empty() {
            for i in 1..=self.n {
                if unit_f64(rng) < self.rate {
                    flips.push(i);
                }
            }
            return;
        }
        let u = unit_f64(rng);
        let k = self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1);
        while flips.len() < k {
            let i = below(rng, self.n as u64) as usize + 1;
            if !flips.contains(&i) {
                flips.push(i);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Objective evaluations up to and including the first evaluation of the
    /// optimum; the initial evaluation counts.
    pub optimisation_time: u64,
    pub initial_ones: usize,
    pub truncated: bool,
}

/// `⌈50 · max(1, e^c/c) · n ln n⌉`, at least 1000 evaluations.
///
/// The `e^c/c` factor tracks the leading constant of the OneMax runtime so
/// that large `c` does not hit the cap.
pub fn default_max_evaluations(n: usize, c: f64) -> u64 {
    let n = n as f64;
    let scale = (c.exp() / c).max(1.0);
    ((50.0 * scale * n * n.ln()).ceil() as u64).max(1000)
}

/// Runs the EA from a uniformly random initial string drawn from the run's
/// own stream. `max_evaluations` caps the evaluation count (initial one
/// included); hitting it sets `truncated`.
pub fn run_ea(f: &LinearObjective, params: &MutationParams, seed: u64, max_evaluations: u64) -> Result<RunRecord> {
    run_ea_observed(f, params, seed, max_evaluations, None, |_, _| {})
}

/// Like [`run_ea`] but starting from `initial`.
pub fn run_ea_from(
    f: &LinearObjective,
    params: &MutationParams,
    initial: &BitString,
    seed: u64,
    max_evaluations: u64,
) -> Result<RunRecord> {
    run_ea_observed(f, params, seed, max_evaluations, Some(initial), |_, _| {})
}

/// Full run with an observer called with `(state, evaluations)` after the
/// initial evaluation and after every iteration.
pub fn run_ea_observed<F>(
    f: &LinearObjective,
    params: &MutationParams,
    seed: u64,
    max_evaluations: u64,
    initial: Option<&BitString>,
    mut observe: F,
) -> Result<RunRecord>
where
    F: FnMut(&BitString, u64),
{
    let n = f.n();
    if params.n() != n {
        return Err(Error::LengthMismatch { expected: n, actual: params.n() });
    }
    if max_evaluations == 0 {
        return Err(Error::InvalidArgument("max_evaluations must be at least 1".into()));
    }
    let mut rng = run_rng(seed);
    let mut x = match initial {
        Some(x0) => {
            if x0.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: x0.len() });
            }
            x0.clone()
        }
        None => {
            let words = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
            BitString::from_words(n, words)
        }
    };
    let initial_ones = x.count_ones();
    let mut ones = initial_ones;
    let mut evaluations = 1u64;
    observe(&x, evaluations);
    let done = |evaluations| RunRecord { seed, optimisation_time: evaluations, initial_ones, truncated: false };
    if ones == 0 {
        return Ok(done(evaluations));
    }

    let sampler = FlipSampler::new(params);
    let mut flips = Vec::new();
    let mut scratch = Vec::<SignedTerm>::new();
    while evaluations < max_evaluations {
        sampler.sample(&mut rng, &mut flips);
        evaluations += 1;
        if f.accepts_flips(&x, &flips, &mut scratch) {
            for &i in &flips {
                if x.get(i) {
                    ones -= 1;
                } else {
                    ones += 1;
                }
                x.flip(i);
            }
        }
        observe(&x, evaluations);
        if ones == 0 {
            return Ok(done(evaluations));
        }
    }
    Ok(RunRecord { seed, optimisation_time: evaluations, initial_ones, truncated: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::run_rng;

    /// Always returns the same word.
    struct ConstRng(u64);

    impl RngCore for ConstRng {
        fn next_u32(&mut self) -> u32 {
            self.0 as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(self.0 as u8)
        }
    }

    /// Counts draws.
    struct Counting<R>(R, usize);

    impl<R: RngCore> RngCore for Counting<R> {
        fn next_u32(&mut self) -> u32 {
            self.1 += 1;
            self.0.next_u32()
        }
        fn next_u64(&mut self) -> u64 {
            self.1 += 1;
            self.0.next_u64()
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            self.0.fill_bytes(dst)
        }
    }

    #[test]
    fn params_validation() {
        assert!(MutationParams::new(0.0, 5).is_err());
        assert!(MutationParams::new(-1.0, 5).is_err());
        assert!(MutationParams::new(6.0, 5).is_err());
        assert!(MutationParams::new(f64::NAN, 5).is_err());
        assert_eq!(MutationParams::new(5.0, 5).unwrap().rate(), 1.0);
    }

    #[test]
    fn forced_streams() {
        let p = MutationParams::new(1.0, 6).unwrap();
        let x: BitString = "101100".parse().unwrap();
        assert_eq!(mutate(&x, &p, &mut ConstRng(u64::MAX)), x);
        assert_eq!(mutate(&x, &p, &mut ConstRng(0)), x.complement());
    }

    #[test]
    fn mutate_consumes_n_draws() {
        let p = MutationParams::new(1.0, 37).unwrap();
        let mut rng = Counting(run_rng(3), 0);
        let x = BitString::zeros(37);
        let _ = mutate(&x, &p, &mut rng);
        assert_eq!(rng.1, 37);
    }

    #[test]
    fn mean_hamming_distance_is_c() {
        let p = MutationParams::new(1.0, 4).unwrap();
        let x: BitString = "1010".parse().unwrap();
        let mut rng = run_rng(11);
        let total: usize = (0..100_000).map(|_| mutate(&x, &p, &mut rng).hamming(&x).unwrap()).sum();
        let mean = total as f64 / 1e5;
        assert!((mean - 1.0).abs() <= 0.03, "mean {mean}");
    }

    #[test]
    fn per_position_flip_frequency() {
        let n = 8;
        let p = MutationParams::new(2.0, n).unwrap();
        let x = BitString::zeros(n);
        let trials = 200_000;
        let mut per_bit = vec![0usize; n];
        let mut per_bit_sampler = vec![0usize; n];
        let sampler = FlipSampler::new(&p);
        let mut rng = run_rng(5);
        let mut flips = Vec::new();
        for _ in 0..trials {
            for i in mutate(&x, &p, &mut rng).ones_positions() {
                per_bit[i - 1] += 1;
            }
            sampler.sample(&mut rng, &mut flips);
            for &i in &flips {
                per_bit_sampler[i - 1] += 1;
            }
        }
        let rate = p.rate();
        let tol = 4.0 * (rate * (1.0 - rate) / trials as f64).sqrt();
        for k in 0..n {
            for counts in [&per_bit, &per_bit_sampler] {
                let freq = counts[k] as f64 / trials as f64;
                assert!((freq - rate).abs() <= tol, "position {} freq {freq}", k + 1);
            }
        }
    }

    #[test]
    fn sampler_flip_count_matches_binomial_mean_and_variance() {
        let p = MutationParams::new(3.0, 50).unwrap();
        let sampler = FlipSampler::new(&p);
        let mut rng = run_rng(9);
        let mut flips = Vec::new();
        let trials = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..trials {
            sampler.sample(&mut rng, &mut flips);
            let k = flips.len() as f64;
            s += k;
            s2 += k * k;
            let mut sorted = flips.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), flips.len());
        }
        let mean = s / trials as f64;
        let var = s2 / trials as f64 - mean * mean;
        assert!((mean - 3.0).abs() < 0.02, "mean {mean}");
        assert!((var - 3.0 * (1.0 - 0.06)).abs() < 0.05, "var {var}");
    }

    #[test]
    fn select_examples() {
        let f = LinearObjective::binval(3);
        let x: BitString = "100".parse().unwrap();
        let y: BitString = "011".parse().unwrap();
        assert_eq!(select(&f, &x, &y).unwrap(), y);
        assert_eq!(select(&f, &y, &x).unwrap(), y);
        let g = LinearObjective::onemax(3);
        assert_eq!(select(&g, &x, &"010".parse().unwrap()).unwrap().to_string(), "010");
        assert_eq!(select(&f, &x, &BitString::zeros(3)).unwrap(), BitString::zeros(3));
    }

    #[test]
    fn starting_at_optimum_costs_one_evaluation() {
        let f = LinearObjective::onemax(1);
        let p = MutationParams::new(1.0, 1).unwrap();
        let r = run_ea_from(&f, &p, &BitString::zeros(1), 0, 10).unwrap();
        assert_eq!(r.optimisation_time, 1);
        assert!(!r.truncated);
        let r = run_ea(&f, &p, 4, 1000).unwrap();
        assert!(r.optimisation_time <= 2);
    }

    #[test]
    fn runs_are_deterministic() {
        let f = LinearObjective::binval(40);
        let p = MutationParams::new(2.0, 40).unwrap();
        let a = run_ea(&f, &p, 99, 100_000).unwrap();
        let b = run_ea(&f, &p, 99, 100_000).unwrap();
        assert_eq!(a, b);
        assert!(!a.truncated);
    }

    #[test]
    fn truncation_is_flagged() {
        let f = LinearObjective::onemax(200);
        let p = MutationParams::new(1.0, 200).unwrap();
        let r = run_ea(&f, &p, 1, 5).unwrap();
        assert!(r.truncated);
        assert_eq!(r.optimisation_time, 5);
        assert!(run_ea(&f, &p, 1, 0).is_err());
    }

    #[test]
    fn trace_is_monotone_and_absorbing() {
        let f = LinearObjective::normalize(&[1.0, 3.0, 3.0, 7.5, 100.0, 2.0, 9.0, 9.0]).unwrap();
        let p = MutationParams::new(2.0, 8).unwrap();
        for seed in 0..50 {
            let mut prev: Option<BitString> = None;
            run_ea_observed(&f, &p, seed, 10_000, None, |x, _| {
                if let Some(prev) = &prev {
                    assert_ne!(f.compare(x, prev).unwrap(), std::cmp::Ordering::Greater);
                    if prev.is_zero() {
                        assert!(x.is_zero());
                    }
                }
                prev = Some(x.clone());
            })
            .unwrap();
        }
    }
}
