use driftlab::ea::{default_max_evaluations, run_ea_observed, FlipSampler};
use driftlab::rng::run_rng;
use driftlab::{mutate, run_ea, run_ea_from, select, BitString, LinearObjective, MutationParams};
use proptest::prelude::*;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Expected optimisation time of the EA on OneMax from a uniform start,
/// from the Markov chain on the number of ones.
fn onemax_expected_time(n: usize, c: f64) -> f64 {
    let p = c / n as f64;
    let q = 1.0 - p;
    let mut e = vec![0.0; n + 1];
    for k in 1..=n {
        // flip a of the k ones and b of the n-k zeros; only b < a changes the state
        let (mut leave, mut acc) = (0.0, 1.0);
        for a in 1..=k {
            for b in 0..a.min(n - k + 1) {
                let pr = binom(k, a)
                    * p.powi(a as i32)
                    * q.powi((k - a) as i32)
                    * binom(n - k, b)
                    * p.powi(b as i32)
                    * q.powi((n - k - b) as i32);
                leave += pr;
                acc += pr * e[k - a + b];
            }
        }
        e[k] = acc / leave;
    }
    1.0 + (0..=n).map(|k| binom(n, k) / 2f64.powi(n as i32) * e[k]).sum::<f64>()
}

#[test]
fn evaluation_examples() {
    let b = LinearObjective::binval(3);
    assert_eq!(b.evaluate(&"101".parse().unwrap()).unwrap().to_f64(), 5.0);
    assert_eq!(LinearObjective::onemax(5).evaluate(&BitString::ones(5)).unwrap().to_f64(), 5.0);
    assert!(b.evaluate(&BitString::zeros(3)).unwrap().is_zero());
    assert!(b.evaluate(&BitString::zeros(4)).is_err());
}

#[test]
fn normalization_examples() {
    let f = LinearObjective::normalize(&[3.0, 1.0, 2.0]).unwrap();
    assert_eq!(f.coefficients_f64().unwrap(), vec![1.0, 2.0, 3.0]);
    assert_eq!(f.provenance().permutation, vec![1, 2, 0]);
    assert!(LinearObjective::normalize(&[1.0, 1.0, 1.0]).unwrap().provenance().is_identity());
    let f = LinearObjective::normalize(&[0.0, -2.0, 5.0]).unwrap();
    assert_eq!(f.coefficients_f64().unwrap(), vec![2.0, 5.0]);
    assert_eq!(f.provenance().dropped, vec![0]);
    assert_eq!(f.provenance().sign_flipped, vec![1]);
    assert!(LinearObjective::normalize(&[0.0, 0.0]).is_err());
}

#[test]
fn selection_examples() {
    let f = LinearObjective::binval(3);
    let x: BitString = "100".parse().unwrap();
    let y: BitString = "011".parse().unwrap();
    assert_eq!(select(&f, &x, &y).unwrap(), y);
    assert_eq!(select(&f, &y, &x).unwrap(), y);
    assert_eq!(select(&f, &x, &BitString::zeros(3)).unwrap(), BitString::zeros(3));
    let g = LinearObjective::onemax(3);
    let z: BitString = "010".parse().unwrap();
    assert_eq!(select(&g, &x, &z).unwrap(), z);
}

#[test]
fn mutation_rate_validation() {
    assert!(MutationParams::new(0.0, 10).is_err());
    assert!(MutationParams::new(11.0, 10).is_err());
    assert!(MutationParams::new(f64::NAN, 10).is_err());
    assert!(MutationParams::new(10.0, 10).is_ok());
}

#[test]
fn mean_hamming_distance_of_mutation() {
    let params = MutationParams::new(1.0, 4).unwrap();
    let x: BitString = "1010".parse().unwrap();
    let mut rng = run_rng(11);
    let trials = 100_000;
    let total: usize = (0..trials).map(|_| mutate(&x, &params, &mut rng).hamming(&x).unwrap()).sum();
    assert!((total as f64 / trials as f64 - 1.0).abs() <= 0.03);
}

#[test]
fn flip_sampler_matches_independent_flips() {
    // per-position frequencies and the flip-count distribution
    for (n, c) in [(12, 1.0), (30, 4.0), (8, 3.0)] {
        let params = MutationParams::new(c, n).unwrap();
        let sampler = FlipSampler::new(&params);
        let p = c / n as f64;
        let trials = 200_000;
        let mut rng = run_rng(5);
        let mut per_pos = vec![0usize; n + 1];
        let mut counts = vec![0usize; n + 1];
        let mut flips = Vec::new();
        for _ in 0..trials {
            sampler.sample(&mut rng, &mut flips);
            counts[flips.len()] += 1;
            let mut sorted = flips.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), flips.len());
            for &i in &flips {
                assert!((1..=n).contains(&i));
                per_pos[i] += 1;
            }
        }
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        for &hits in &per_pos[1..] {
            assert!((hits as f64 / trials as f64 - p).abs() <= 4.0 * sd, "n={n} c={c}");
        }
        for (k, &count) in counts.iter().enumerate().take(6) {
            let pk = binom(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            let sd = (pk * (1.0 - pk) / trials as f64).sqrt();
            assert!((count as f64 / trials as f64 - pk).abs() <= 4.0 * sd + 1e-12, "n={n} c={c} k={k}");
        }
    }
}

#[test]
fn small_onemax_mean_time_matches_markov_chain() {
    for (n, c) in [(3, 1.0), (6, 2.0)] {
        let f = LinearObjective::onemax(n);
        let params = MutationParams::new(c, n).unwrap();
        let reps = 20_000u64;
        let times: Vec<f64> =
            (0..reps).map(|s| run_ea(&f, &params, s, 1_000_000).unwrap().optimisation_time as f64).collect();
        let mean = times.iter().sum::<f64>() / reps as f64;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let expected = onemax_expected_time(n, c);
        assert!((mean - expected).abs() <= 4.0 * (var / reps as f64).sqrt(), "n={n}: {mean} vs {expected}");
    }
}

#[test]
fn onemax_64_mean_time_is_order_n_log_n() {
    let n = 64;
    let f = LinearObjective::onemax(n);
    let params = MutationParams::new(1.0, n).unwrap();
    let mean = (0..1000u64)
        .map(|s| run_ea(&f, &params, s, default_max_evaluations(n, 1.0)).unwrap().optimisation_time as f64)
        .sum::<f64>()
        / 1000.0;
    let nlogn = n as f64 * (n as f64).ln();
    assert!(mean >= nlogn && mean <= 6.0 * nlogn, "mean {mean}");
}

#[test]
fn start_at_optimum_and_single_bit() {
    let f = LinearObjective::onemax(1);
    let params = MutationParams::new(1.0, 1).unwrap();
    let r = run_ea_from(&f, &params, &BitString::zeros(1), 1, 10).unwrap();
    assert_eq!(r.optimisation_time, 1);
    assert!(!r.truncated);
    // with n = 1 and c = 1 the bit always flips
    assert!(run_ea(&f, &params, 2, 10).unwrap().optimisation_time <= 2);
    assert!(run_ea(&f, &params, 2, 0).is_err());
}

#[test]
fn truncated_runs_stop_at_the_cap() {
    let f = LinearObjective::binval(200);
    let params = MutationParams::new(1.0, 200).unwrap();
    let r = run_ea(&f, &params, 9, 50).unwrap();
    assert!(r.truncated);
    assert_eq!(r.optimisation_time, 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traces_are_monotone_absorbing_and_reproducible(seed in any::<u64>(), n in 1usize..40, c in 0.2f64..3.0) {
        prop_assume!(c <= n as f64);
        let f = LinearObjective::binval(n);
        let params = MutationParams::new(c, n).unwrap();
        let mut trace = Vec::new();
        let r = run_ea_observed(&f, &params, seed, 20_000, None, |x, _| trace.push(x.clone())).unwrap();
        for w in trace.windows(2) {
            prop_assert!(f.compare(&w[1], &w[0]).unwrap() != std::cmp::Ordering::Greater);
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            }
        }
        prop_assert_eq!(trace.len() as u64, r.optimisation_time);
        prop_assert_eq!(r, run_ea(&f, &params, seed, 20_000).unwrap());
    }

    #[test]
    fn selection_never_worsens(bits in prop::collection::vec(any::<bool>(), 1..60), seed in any::<u64>()) {
        let n = bits.len();
        let ln: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).floor()).collect();
        let f = LinearObjective::from_sorted(ln.into_iter().map(driftlab::WideReal::from_ln).collect()).unwrap();
        let x = BitString::from_bits(&bits);
        let params = MutationParams::new(1.0, n).unwrap();
        let y = mutate(&x, &params, &mut run_rng(seed));
        let z = select(&f, &x, &y).unwrap();
        prop_assert!(z == x || z == y);
        prop_assert!(f.compare(&z, &x).unwrap() != std::cmp::Ordering::Greater);
    }
}
