//! Structural checks on a finished construction. Each check returns the list
//! of violated properties; an empty list means the construction conforms.

use super::blocks::{BlockStructure, Regime};
use super::partition::FitnessPartition;
use super::weights::DriftWeights;
use super::DriftConstruction;
use crate::objective::LinearObjective;
use crate::wide::{signed_sum_sign, SignedTerm};

/// Relative tolerance for comparisons of log weights.
const LOG_TOL: f64 = 1e-12;

pub fn check_structure(f: &LinearObjective, s: &BlockStructure) -> Vec<String> {
    let n = f.n();
    let mut bad = Vec::new();
    let n2 = (n as u128).pow(2);
    let n4 = n2 * n2;

    check_tiling("miniblock", s.miniblocks.iter().map(|m| (m.rightmost, m.leftmost)), n, &mut bad);
    check_tiling("block", s.blocks.iter().map(|b| (b.rightmost, b.leftmost)), n, &mut bad);

    for (k, m) in s.miniblocks.iter().enumerate() {
        let (j, i) = (m.rightmost, m.leftmost);
        let last = k + 1 == s.miniblocks.len();
        let closed = f.coefficient(i).ge_scaled(&f.coefficient(j), n2);
        if !last && !closed {
            bad.push(format!("miniblock {j}..{i} closed below the n^2 ratio"));
        }
        if closed && i > j + 1 && f.coefficient(i - 1).ge_scaled(&f.coefficient(j), n2) {
            bad.push(format!("miniblock {j}..{i} is not minimal"));
        }
    }

    let threshold = s.long_threshold;
    let mut since_long: Option<usize> = None;
    for (k, b) in s.blocks.iter().enumerate() {
        if b.is_long != (b.len() as f64 >= threshold) {
            bad.push(format!("block {}..{} has a wrong long flag", b.rightmost, b.leftmost));
        }
        if b.is_long {
            if let Some(gap) = since_long {
                if gap < 3 {
                    bad.push(format!(
                        "long block {}..{} has only {gap} short blocks to its right",
                        b.rightmost, b.leftmost
                    ));
                }
            }
            since_long = Some(0);
        } else if let Some(gap) = since_long.as_mut() {
            *gap += 1;
        }
        let copy = b.is_long || (k > 0 && s.blocks[k - 1].is_long);
        if (b.regime == Regime::Copy) != copy {
            bad.push(format!("block {}..{} has a wrong regime", b.rightmost, b.leftmost));
        }
        if k + 1 < s.blocks.len() && !f.coefficient(b.leftmost).ge_scaled(&f.coefficient(b.rightmost), n4) {
            bad.push(format!("block {}..{} spans a ratio below n^4", b.rightmost, b.leftmost));
        }
    }
    bad
}

fn check_tiling(what: &str, intervals: impl Iterator<Item = (usize, usize)>, n: usize, bad: &mut Vec<String>) {
    let mut expected_right = 1;
    let mut last_left = 0;
    let mut count = 0;
    for (r, l) in intervals {
        if r != expected_right || l < r || (n > 1 && l == r) {
            bad.push(format!("{what} {r}..{l} breaks the tiling"));
        }
        expected_right = l;
        last_left = l;
        count += 1;
    }
    if count == 0 || last_left != n {
        bad.push(format!("{what}s do not cover 1..{n}"));
    }
}

pub fn check_weights(f: &LinearObjective, s: &BlockStructure, w: &DriftWeights) -> Vec<String> {
    let mut bad = Vec::new();
    let n = f.n();
    if w.n() != n {
        bad.push("weight count differs from n".into());
        return bad;
    }
    if w.ln_weight(1) != 0.0 {
        bad.push(format!("w_1 = {} instead of 1", w.weight(1)));
    }
    let tol = |x: f64| LOG_TOL * x.abs().max(1.0);
    for i in 2..=n {
        if w.ln_weight(i) < w.ln_weight(i - 1) - tol(w.ln_weight(i)) {
            bad.push(format!("w_{i} < w_{}", i - 1));
        }
    }
    let params = w.params();
    for b in &s.blocks {
        let r = b.rightmost;
        for i in r + 1..=b.leftmost {
            let copy = w.ln_weight(r) + f.ln_coefficient(i) - f.ln_coefficient(r);
            let expected = match (b.regime, params) {
                (Regime::Copy, _) => copy,
                (Regime::Damped, Some(p)) => {
                    w.ln_weight(r) + ((i - r) as f64 * p.c * p.ln_k / n as f64).min(copy - w.ln_weight(r))
                }
                (Regime::Damped, None) => continue,
            };
            if (w.ln_weight(i) - expected).abs() > tol(expected) {
                bad.push(format!("w_{i} does not follow its block's regime"));
            }
            if w.ln_weight(i) > copy + tol(copy) {
                bad.push(format!("w_{i} exceeds its copy value"));
            }
        }
    }
    bad
}

pub fn check_partition(f: &LinearObjective, w: &DriftWeights, p: &FitnessPartition) -> Vec<String> {
    let mut bad = Vec::new();
    let n = f.n();
    if p.jumps.len() as u64 > p.k_bound - 1 {
        bad.push(format!("{} jumps exceed the bound {}", p.jumps.len(), p.k_bound - 1));
    }
    if p.jumps.windows(2).any(|j| j[0] >= j[1]) || p.jumps.iter().any(|&j| j < 2 || j > n) {
        bad.push("jumps are not increasing positions in 2..n".into());
    }
    let mut expected_lo = 1;
    for part in &p.parts {
        if part.lo != expected_lo || part.hi < part.lo {
            bad.push(format!("part {}..{} breaks the partition", part.lo, part.hi));
        }
        expected_lo = part.hi + 1;
        if (part.ln_min_phi - w.ln_weight(part.lo)).abs() > LOG_TOL * part.ln_min_phi.abs().max(1.0) {
            bad.push(format!("part {}..{} min potential is not w_lo", part.lo, part.hi));
        }
        let cap = (n as f64).ln() + w.ln_weight(part.hi);
        if part.ln_max_phi > cap + LOG_TOL * cap.abs().max(1.0) {
            bad.push(format!("part {}..{} max potential exceeds n w_hi", part.lo, part.hi));
        }
    }
    if expected_lo != n + 1 {
        bad.push("parts do not cover 1..n".into());
    }
    // strings led by a later part are strictly worse: Σ_{i < jump} a_i < a_jump
    let mut terms: Vec<SignedTerm> = Vec::new();
    for &j in &p.jumps {
        terms.clear();
        terms.push(SignedTerm { value: f.coefficient(j), negative: false });
        terms.extend((1..j).map(|i| SignedTerm { value: f.coefficient(i), negative: true }));
        if signed_sum_sign(&terms) != std::cmp::Ordering::Greater {
            bad.push(format!("jump {j} does not separate fitness levels"));
        }
    }
    bad
}

/// All structural, weight and partition checks.
pub fn check_construction(f: &LinearObjective, c: &DriftConstruction) -> Vec<String> {
    let mut bad = check_structure(f, &c.structure);
    bad.extend(check_weights(f, &c.structure, &c.weights));
    bad.extend(check_partition(f, &c.weights, &c.partition));
    bad
}
