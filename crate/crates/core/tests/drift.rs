use driftlab::drift::invariants::{check_construction, check_partition, check_structure, check_weights};
use driftlab::drift::partition::k_bound;
use driftlab::drift::{
    assign_regimes, build_blocks_ordered, build_miniblocks, construct, default_params, DriftParams, MergeOrder, Regime,
};
use driftlab::{BitString, LinearObjective, WideReal};
use proptest::prelude::*;

/// Objective from per-position log steps `ln a_{i+1} - ln a_i`, starting at `a_1 = 1`.
fn from_steps(steps: &[f64]) -> LinearObjective {
    let mut ln = vec![0.0];
    for s in steps {
        ln.push(ln.last().unwrap() + s);
    }
    LinearObjective::from_sorted(ln.into_iter().map(WideReal::from_ln).collect()).unwrap()
}

/// Steps that are mostly flat with occasional steep stretches, so that
/// miniblocks of very different lengths appear.
fn steps_strategy() -> impl Strategy<Value = Vec<f64>> {
    (4usize..90).prop_flat_map(|n| {
        let ln_n = (n as f64).ln();
        prop::collection::vec(
            prop_oneof![
                4 => Just(0.0),
                2 => 0.0..0.5f64,
                2 => 0.5 * ln_n..3.0 * ln_n,
                1 => 5.0 * ln_n..8.0 * ln_n,
            ],
            n - 1,
        )
    })
}

fn manual(c: f64, log2_k: f64, gamma: f64) -> DriftParams {
    DriftParams::manual(c, 0.5, log2_k * std::f64::consts::LN_2, gamma).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn long_short_classification_ignores_merge_order(steps in steps_strategy(), gamma in 0.02f64..0.6) {
        let f = from_steps(&steps);
        let mini = build_miniblocks(&f);
        let a = assign_regimes(build_blocks_ordered(&mini, gamma, f.n(), MergeOrder::LeftmostFirst));
        let b = assign_regimes(build_blocks_ordered(&mini, gamma, f.n(), MergeOrder::RightmostFirst));
        prop_assert_eq!(a.blocks, b.blocks);
        prop_assert_eq!(a.merge_log.len(), b.merge_log.len());
    }

    #[test]
    fn random_constructions_satisfy_invariants(
        steps in steps_strategy(),
        c in 0.3f64..3.0,
        log2_k in 2.0f64..24.0,
        gamma in 0.02f64..0.6,
    ) {
        let f = from_steps(&steps);
        let built = construct(&f, &manual(c, log2_k, gamma)).unwrap();
        let bad = check_construction(&f, &built);
        prop_assert!(bad.is_empty(), "{:?}", bad);
        prop_assert!(built.partition.jumps.len() as u64 <= 6 * (1.0 / gamma).ceil() as u64);
    }

    #[test]
    fn phi_is_zero_only_at_optimum_and_at_least_one_elsewhere(
        steps in steps_strategy(),
        bits in prop::collection::vec(any::<bool>(), 90),
    ) {
        let f = from_steps(&steps);
        let n = f.n();
        let built = construct(&f, &manual(1.0, 12.0, 0.1)).unwrap();
        let x = BitString::from_bits(&bits[..n]);
        let phi = built.weights.ln_phi(&x).unwrap();
        if x.is_zero() {
            prop_assert_eq!(phi, f64::NEG_INFINITY);
        } else {
            prop_assert!(phi >= 0.0);
        }
    }
}

#[test]
fn onemax_weights_are_all_one() {
    for n in [2, 10, 100] {
        let built = construct(&LinearObjective::onemax(n), &manual(1.0, 16.0, 0.25)).unwrap();
        assert!(built.weights.ln_weights().iter().all(|&w| w == 0.0));
        assert_eq!(built.structure.blocks.len(), 1);
        assert!(built.partition.jumps.is_empty());
        assert!(check_construction(&LinearObjective::onemax(n), &built).is_empty());
    }
}

#[test]
fn binval_small_copies_coefficients() {
    let f = LinearObjective::binval(16);
    let built = construct(&f, &default_params(1.0, 0.5, None).unwrap()).unwrap();
    for i in 1..=16 {
        assert!((built.weights.ln_weight(i) - ((i - 1) as f64) * std::f64::consts::LN_2).abs() < 1e-12);
    }
}

#[test]
fn damped_block_grows_geometrically_then_caps() {
    // one long flat run, then a steep region split into short damped blocks
    let n = 200;
    let ln_n = (n as f64).ln();
    let mut steps = vec![0.0; 119];
    steps.extend(std::iter::repeat_n(0.6 * ln_n, 80));
    let f = from_steps(&steps);
    let p = manual(1.0, 8.0, 0.5);
    let built = construct(&f, &p).unwrap();
    assert!(check_construction(&f, &built).is_empty());
    let s = &built.structure;
    let step = p.c * p.ln_k / n as f64;
    let mut damped_seen = false;
    for b in &s.blocks {
        if b.regime != Regime::Damped {
            continue;
        }
        damped_seen = true;
        for i in b.rightmost + 1..=b.leftmost {
            let geometric = built.weights.ln_weight(b.rightmost) + (i - b.rightmost) as f64 * step;
            let copy = built.weights.ln_weight(b.rightmost) + f.ln_coefficient(i) - f.ln_coefficient(b.rightmost);
            assert!((built.weights.ln_weight(i) - geometric.min(copy)).abs() < 1e-9);
        }
    }
    assert!(damped_seen);
}

#[test]
fn jump_splits_partition_and_parts_are_separated() {
    // a_i = 1 below position 11, n^5 from there on
    let n = 20usize;
    let mut steps = vec![0.0; n - 1];
    steps[9] = 5.0 * (n as f64).ln();
    let f = from_steps(&steps);
    let built = construct(&f, &manual(1.0, 16.0, 0.25)).unwrap();
    assert_eq!(built.partition.jumps, vec![11]);
    assert_eq!(built.partition.parts.len(), 2);
    assert_eq!(k_bound(0.25), 25);
    assert!(check_partition(&f, &built.weights, &built.partition).is_empty());
    // every string with a one at or above the jump is fitter than every string below it
    let high = BitString::from_positions(n, [11]);
    let low = BitString::from_positions(n, 1..=10);
    assert_eq!(f.compare(&low, &high).unwrap(), std::cmp::Ordering::Less);
    assert_eq!(built.partition.part_of(&high), 2);
    assert_eq!(built.partition.part_of(&low), 1);
    assert_eq!(built.partition.part_of(&BitString::zeros(n)), 0);
}

#[test]
fn invariant_checks_detect_tampering() {
    let f = LinearObjective::binval(40);
    let built = construct(&f, &manual(1.0, 16.0, 0.1)).unwrap();
    assert!(check_structure(&f, &built.structure).is_empty());

    let mut s = built.structure.clone();
    s.blocks[0].is_long = !s.blocks[0].is_long;
    assert!(!check_structure(&f, &s).is_empty());

    let mut ln = built.weights.ln_weights().to_vec();
    ln.swap(3, 4);
    let w = driftlab::drift::DriftWeights::from_ln(ln, Some(built.params)).unwrap();
    assert!(!check_weights(&f, &built.structure, &w).is_empty());
}
