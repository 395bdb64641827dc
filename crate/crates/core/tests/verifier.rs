use driftlab::drift::{construct, default_params, DriftParams, DriftWeights, Regime};
use driftlab::verify::{
    check_definition_conditions, check_partition_polynomiality, check_weight_lemmas, exact_drift_factor,
    exact_expected_phi_next, mask_probability_total, mc_drift_estimate, piecewise_bound, sample_states, theorem_bound,
    verify_feasibility, LemmaKind, Method, VerifyMode, VerifyOptions,
};
use driftlab::{BitString, Error, LinearObjective, WideReal};
use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    case: String,
    coefficients: Vec<f64>,
    weights: Vec<f64>,
    c: f64,
    state: String,
    expected_phi_next: String,
    drift_factor: String,
}

#[derive(Deserialize)]
struct Goldens {
    cases: Vec<Golden>,
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

#[test]
fn exact_oracle_matches_rational_enumeration() {
    let goldens: Goldens = serde_json::from_str(include_str!("fixtures/exact_goldens.json")).unwrap();
    assert!(goldens.cases.len() > 100);
    for g in &goldens.cases {
        let f = LinearObjective::from_sorted_f64(&g.coefficients).unwrap();
        let w = DriftWeights::from_values(&g.weights).unwrap();
        let x = bits(&g.state);
        let expected: f64 = g.expected_phi_next.parse().unwrap();
        let got = exact_expected_phi_next(&f, &w, &x, g.c).unwrap();
        assert!(rel_close(got, expected, 1e-12), "{} {}: {got} vs {expected}", g.case, g.state);
        let est = exact_drift_factor(&f, &w, &x, g.c).unwrap();
        let factor: f64 = g.drift_factor.parse().unwrap();
        assert!((est.drift_factor - factor).abs() <= 1e-12, "{} {}", g.case, g.state);
        assert_eq!(est.method, Method::Exact);
        assert_eq!(est.samples, 1 << f.n());
    }
}

#[test]
fn two_bit_onemax_examples() {
    let f = LinearObjective::onemax(2);
    let w = DriftWeights::from_values(&[1.0, 1.0]).unwrap();
    assert!((exact_expected_phi_next(&f, &w, &bits("11"), 1.0).unwrap() - 1.0).abs() < 1e-12);
    assert!((exact_expected_phi_next(&f, &w, &bits("01"), 1.0).unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(exact_expected_phi_next(&f, &w, &bits("00"), 1.0).unwrap(), 0.0);
    assert!((exact_drift_factor(&f, &w, &bits("11"), 1.0).unwrap().drift_factor - 0.5).abs() < 1e-12);
    assert!((exact_drift_factor(&f, &w, &bits("01"), 1.0).unwrap().drift_factor - 0.25).abs() < 1e-12);
    assert!(exact_drift_factor(&f, &w, &bits("00"), 1.0).is_err());
}

#[test]
fn exact_oracle_rejects_sizes_above_cap() {
    let f = LinearObjective::onemax(21);
    let w = DriftWeights::from_values(&[1.0; 21]).unwrap();
    assert!(matches!(exact_expected_phi_next(&f, &w, &BitString::ones(21), 1.0), Err(Error::EnumerationCap { .. })));
}

#[test]
fn mask_probabilities_sum_to_one() {
    for n in [1, 5, 12, 20] {
        for c in [0.5, 1.0, 4.0].into_iter().filter(|&c| c <= n as f64) {
            assert!((mask_probability_total(n, c) - 1.0).abs() <= 1e-12, "n={n} c={c}");
        }
    }
}

#[test]
fn single_low_bit_drift_is_at_least_the_lone_flip_probability() {
    for (f, c) in [
        (LinearObjective::onemax(9), 1.0f64),
        (LinearObjective::binval(9), 2.0),
        (LinearObjective::from_sorted_f64(&[1.0, 1.0, 2.0, 3.0, 50.0, 51.0, 900.0]).unwrap(), 0.5),
    ] {
        let n = f.n();
        let built = construct(&f, &default_params(c.max(1.0), 0.5, None).unwrap()).unwrap();
        let est = exact_drift_factor(&f, &built.weights, &BitString::from_positions(n, [1]), c).unwrap();
        let p = c / n as f64;
        assert!(est.drift_factor >= p * (1.0 - p).powi(n as i32 - 1) * (1.0 - 1e-12));
    }
}

#[test]
fn onemax_drift_matches_the_plain_fitness_potential_constant() {
    // with Φ = f, the worst state is a single one: n·drift = c (1 - c/n)^{n-1}
    for n in 2..=10 {
        for c in [0.5, 1.0, 2.0] {
            if (n as f64) < c {
                continue;
            }
            let f = LinearObjective::onemax(n);
            let w = DriftWeights::from_values(&vec![1.0; n]).unwrap();
            let report = verify_feasibility(&f, &w, c, None, &VerifyOptions::default()).unwrap();
            let floor = c * (1.0 - c / n as f64).powi(n as i32 - 1);
            assert!(n as f64 * report.min_drift_factor >= floor * (1.0 - 1e-9), "n={n} c={c}");
            assert_eq!(report.states_checked, (1 << n) - 1);
        }
    }
}

#[test]
fn exhaustive_reports_for_small_constructions() {
    let opts = VerifyOptions::default();
    for f in [LinearObjective::onemax(8), LinearObjective::binval(10)] {
        let built = construct(&f, &default_params(1.0, 0.5, None).unwrap()).unwrap();
        let report = verify_feasibility(&f, &built.weights, 1.0, Some(&built.partition), &opts).unwrap();
        assert!(report.passed());
        assert!(report.violations.is_empty());
        assert_eq!(report.mode, VerifyMode::Exhaustive);
        assert_eq!(report.informational, (f.n() as u64) < report.n0);
    }
    let f = LinearObjective::onemax(8);
    let built = construct(&f, &default_params(1.0, 0.5, None).unwrap()).unwrap();
    let report = verify_feasibility(&f, &built.weights, 1.0, None, &opts).unwrap();
    assert!(report.implied_nu.unwrap() <= 32.0);
}

#[test]
fn onemax_eight_implied_nu_golden() {
    // the single-one state is the minimiser: drift = p (1-p)^{n-1} with p = 1/8
    let f = LinearObjective::onemax(8);
    let built = construct(&f, &default_params(1.0, 0.5, None).unwrap()).unwrap();
    let report = verify_feasibility(&f, &built.weights, 1.0, None, &VerifyOptions::default()).unwrap();
    let closed_form = 8.0 * (8.0f64 / 7.0).powi(7);
    let nu = report.implied_nu.unwrap();
    assert!(rel_close(nu, closed_form, 1e-12), "{nu} vs {closed_form}");
    assert!(rel_close(nu, 20.371997576325843, 1e-12));
    assert_eq!(report.argmin_state.unwrap().count_ones(), 1);
}

#[test]
fn exhaustive_mode_needs_small_n() {
    let f = LinearObjective::onemax(13);
    let w = DriftWeights::from_values(&[1.0; 13]).unwrap();
    assert!(verify_feasibility(&f, &w, 1.0, None, &VerifyOptions::default()).is_err());
}

#[test]
fn sampled_mode_is_deterministic_and_flags_partial_budgets() {
    let f = LinearObjective::binval(40);
    let built = construct(&f, &DriftParams::manual(1.0, 0.5, 16.0 * std::f64::consts::LN_2, 0.1).unwrap()).unwrap();
    let opts = VerifyOptions { mode: VerifyMode::Sampled, budget: 30, seed: 3, mc_samples: 2000, ..Default::default() };
    let a = verify_feasibility(&f, &built.weights, 1.0, Some(&built.partition), &opts).unwrap();
    let b = verify_feasibility(&f, &built.weights, 1.0, Some(&built.partition), &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.partial);
    assert_eq!(a.states_checked, 30);

    let (states, partial) = sample_states(40, Some(&built.partition), 500, 1);
    assert!(!partial);
    assert_eq!(states[0], BitString::ones(40));
    assert!(states.iter().all(|x| !x.is_zero()));
}

#[test]
fn monte_carlo_two_bit_example_and_determinism() {
    let f = LinearObjective::onemax(2);
    let w = DriftWeights::from_values(&[1.0, 1.0]).unwrap();
    let est = mc_drift_estimate(&f, &w, &bits("11"), 1.0, 100_000, 7).unwrap();
    assert!((est.expected_phi_next - 1.0).abs() <= 0.02);
    assert_eq!(est.method, Method::MonteCarlo);
    assert_eq!(est, mc_drift_estimate(&f, &w, &bits("11"), 1.0, 100_000, 7).unwrap());
    assert!(mc_drift_estimate(&f, &w, &bits("11"), 1.0, 999, 7).is_err());
}

#[test]
fn monte_carlo_interval_shrinks_with_root_samples() {
    let f = LinearObjective::binval(8);
    let w = DriftWeights::from_values(&[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]).unwrap();
    let x = bits("10110101");
    let small = mc_drift_estimate(&f, &w, &x, 1.0, 1_000, 1).unwrap().ci_halfwidth.unwrap();
    let large = mc_drift_estimate(&f, &w, &x, 1.0, 1_000_000, 1).unwrap().ci_halfwidth.unwrap();
    let ratio = large / small;
    assert!((ratio - 1000f64.sqrt().recip()).abs() < 0.01, "ratio {ratio}");
}

#[test]
fn all_ones_sanity() {
    let f = LinearObjective::binval(10);
    let built = construct(&f, &default_params(2.0, 0.5, None).unwrap()).unwrap();
    let est = exact_drift_factor(&f, &built.weights, &BitString::ones(10), 2.0).unwrap();
    assert!(est.drift_factor <= 1.0);
    assert!(est.expected_phi_next >= 0.0);
}

#[test]
fn theorem_bound_examples() {
    let e2 = 2f64.exp();
    assert!((theorem_bound(10.0, e2, None).unwrap().expected_bound - 30.0).abs() < 1e-12);
    let b = theorem_bound(10.0, e2, Some(3.0)).unwrap();
    assert_eq!(b.tail_threshold, Some(50.0));
    assert!((b.tail_prob_bound.unwrap() - 0.049787068367863944).abs() < 1e-15);
    assert_eq!(theorem_bound(7.0, 1.0, None).unwrap().expected_bound, 7.0);
    assert!(theorem_bound(10.0, e2, Some(0.0)).is_err());
    assert!(theorem_bound(10.0, e2, Some(-1.0)).is_err());
    assert!(theorem_bound(0.5, e2, None).is_err());
    assert!(theorem_bound(10.0, 0.5, None).is_err());
}

#[test]
fn piecewise_bound_sums_part_bounds() {
    let f = LinearObjective::binval(16);
    let built = construct(&f, &default_params(1.0, 0.5, None).unwrap()).unwrap();
    assert_eq!(built.partition.parts.len(), 1);
    let pw = piecewise_bound(5.0, &built.partition, Some(2.0)).unwrap();
    let single = theorem_bound(5.0, built.ln_phi_max().exp(), Some(2.0)).unwrap();
    assert!(rel_close(pw.expected_bound, single.expected_bound, 1e-12));
    assert_eq!(pw.tail_threshold_sum, single.tail_threshold);

    // two parts split by a jump at position 11
    let n = 20;
    let ln: Vec<f64> = (1..=n).map(|i| if i >= 11 { 5.0 * (n as f64).ln() } else { 0.0 }).collect();
    let f = LinearObjective::from_sorted(ln.into_iter().map(WideReal::from_ln).collect()).unwrap();
    let built = construct(&f, &DriftParams::manual(1.0, 0.5, 16.0 * std::f64::consts::LN_2, 0.25).unwrap()).unwrap();
    let parts = &built.partition.parts;
    assert_eq!(parts.len(), 2);
    let pw = piecewise_bound(3.0, &built.partition, Some(1.0)).unwrap();
    let by_part: f64 = parts.iter().map(|p| 3.0 * (p.ln_max_phi - p.ln_min_phi + 1.0)).sum();
    assert!(rel_close(pw.expected_bound, by_part, 1e-12));
    assert!((pw.tail_prob_bound.unwrap() - 2.0 * (-1f64).exp()).abs() < 1e-15);
    for part in check_partition_polynomiality(&built.weights, &built.structure, &built.partition).unwrap() {
        assert!(part.holds, "{part:?}");
    }
}

#[test]
fn definition_conditions() {
    let built = construct(&LinearObjective::binval(30), &default_params(1.0, 0.5, None).unwrap()).unwrap();
    assert!(check_definition_conditions(&built.weights).passed());
    let bad = DriftWeights::from_values(&[0.5, 1.0, 2.0]).unwrap();
    let report = check_definition_conditions(&bad);
    assert!(!report.passed());
    assert!(!report.nonzero_at_least_one);
    assert!(DriftWeights::from_values(&[1.0, -2.0]).is_err());
}

fn all_damped_instance(n: usize) -> LinearObjective {
    // every step multiplies by n^{0.6}, so miniblocks have four positions and
    // no block reaches the long threshold
    let step = 0.6 * (n as f64).ln();
    LinearObjective::from_sorted((0..n).map(|i| WideReal::from_ln(i as f64 * step)).collect()).unwrap()
}

#[test]
fn lemmas_hold_on_an_all_damped_instance() {
    let n = 200;
    let f = all_damped_instance(n);
    let params = DriftParams::manual(1.0, 0.5, 8.0 * std::f64::consts::LN_2, 0.25).unwrap();
    let built = construct(&f, &params).unwrap();
    assert!(built.structure.blocks.iter().all(|b| b.regime == Regime::Damped));
    let report = check_weight_lemmas(&built.weights, &built.structure).unwrap();
    assert!(report.all_hold(), "{:?}", report.failures().next());
    for kind in [LemmaKind::DampedRunSum, LemmaKind::DampedBlockGrowth, LemmaKind::DampedRunLeftEnd] {
        assert!(report.count(kind) > 0, "{kind:?}");
    }
    assert!(report.min_slack(LemmaKind::DampedRunSum).unwrap() > 0.0);
    assert!(report.min_slack(LemmaKind::DampedRunLeftEnd).unwrap() > 0.0);
    // the growth equality is tight up to rounding
    assert!(report.min_slack(LemmaKind::DampedBlockGrowth).unwrap() > -1e-9);
}

#[test]
fn lemmas_are_vacuous_for_onemax() {
    let built = construct(&LinearObjective::onemax(50), &default_params(1.0, 0.5, None).unwrap()).unwrap();
    let report = check_weight_lemmas(&built.weights, &built.structure).unwrap();
    assert!(report.checks.is_empty());
    assert!(report.skipped.is_empty());
}

#[test]
fn lemmas_need_constructed_weights() {
    let f = LinearObjective::onemax(3);
    let built = construct(&f, &default_params(1.0, 0.5, None).unwrap()).unwrap();
    let plain = DriftWeights::from_values(&[1.0, 1.0, 1.0]).unwrap();
    assert!(check_weight_lemmas(&plain, &built.structure).is_err());
}
