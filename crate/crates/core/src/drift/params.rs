use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the drift construction.
///
/// `K` is stored as `ln K` because the defaults for larger `c` exceed the
/// `f64` range by a wide margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub epsilon: f64,
    pub ln_k: f64,
    pub gamma: f64,
    pub c: f64,
    /// Smallest `n` with `(1 - c/n)^{3n} >= (1 - ε) e^{-3c}`.
    pub n0: u64,
}

impl DriftParams {
    /// Explicit parameters; `n0` is derived from `c` and `ε`.
    pub fn manual(c: f64, epsilon: f64, ln_k: f64, gamma: f64) -> Result<DriftParams> {
        check_c_eps(c, epsilon)?;
        if !ln_k.is_finite() || ln_k <= 0.0 {
            return Err(Error::InvalidParams(format!("K must exceed 1 (ln K = {ln_k})")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParams(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        Ok(DriftParams { epsilon, ln_k, gamma, c, n0: min_problem_size(c, epsilon) })
    }

    /// `log2 K` when `K` is a power of two.
    pub fn log2_k(&self) -> f64 {
        self.ln_k / std::f64::consts::LN_2
    }

    /// Minimum length of a long block at problem size `n`: `max(γn, 2)`.
    pub fn long_threshold(&self, n: usize) -> f64 {
        (self.gamma * n as f64).max(2.0)
    }

    /// `c e^{-3c} (1-ε)^2`, the per-step drift constant (times `1/n`).
    pub fn target_delta(&self) -> f64 {
        target_delta(self.c, self.epsilon)
    }

    /// `2 K^{2cγ} / ln K`.
    pub fn case_one_term(&self) -> f64 {
        2.0 * (2.0 * self.c * self.gamma * self.ln_k).exp() / self.ln_k
    }
}

pub fn target_delta(c: f64, epsilon: f64) -> f64 {
    c * (-3.0 * c).exp() * (1.0 - epsilon).powi(2)
}

fn check_c_eps(c: f64, epsilon: f64) -> Result<()> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidParams(format!("c must be positive, got {c}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// `ln((ε/16) e^{-c} ln K) / (2c ln K)`, unclamped. This choice makes
/// `2 K^{2cγ} / ln K` equal to `e^{-c} ε / 8`.
pub fn gamma_formula(c: f64, epsilon: f64, ln_k: f64) -> f64 {
    (epsilon / 16.0 * (-c).exp() * ln_k).ln() / (2.0 * c * ln_k)
}

/// Smallest integer `m >= 0` with `2/(m ln 2) <= e^{-c} ε / 16`, i.e. the
/// exponent of the smallest admissible power of two.
pub fn default_log2_k(c: f64, epsilon: f64) -> u64 {
    let need_ln = 32.0 / (epsilon * (-c).exp());
    let m = (need_ln / std::f64::consts::LN_2).ceil().max(1.0) as u64;
    // guard against rounding at the boundary
    if 2.0 / (m as f64 * std::f64::consts::LN_2) > (-c).exp() * epsilon / 16.0 {
        m + 1
    } else {
        m
    }
}

/// Smallest `n > c` with `(1 - c/n)^{3n} >= (1 - ε) e^{-3c}`.
pub fn min_problem_size(c: f64, epsilon: f64) -> u64 {
    let target = (1.0 - epsilon).ln() - 3.0 * c;
    let holds = |n: u64| {
        let nf = n as f64;
        c < nf && 3.0 * nf * (-c / nf).ln_1p() >= target
    };
    // the left side increases in n; bracket then bisect
    let mut hi = (c.floor() as u64).max(1);
    while !holds(hi) {
        hi = hi.saturating_mul(2);
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if holds(lo) && lo > 0 {
        lo
    } else {
        hi
    }
}

/// Default parameters for mutation constant `c` and accuracy `ε`.
///
/// Without an override, `K` is the smallest power of two with
/// `2/ln K <= e^{-c} ε / 16`. `γ` follows [`gamma_formula`] clamped into
/// `(0, 1/2]`; a non-positive formula value (possible with a small `K`
/// override) is an [`Error::Unachievable`].
pub fn default_params(c: f64, epsilon: f64, ln_k_override: Option<f64>) -> Result<DriftParams> {
    check_c_eps(c, epsilon)?;
    let ln_k = match ln_k_override {
        Some(l) => l,
        None => default_log2_k(c, epsilon) as f64 * std::f64::consts::LN_2,
    };
    if !ln_k.is_finite() || ln_k <= 0.0 {
        return Err(Error::InvalidParams(format!("K must exceed 1 (ln K = {ln_k})")));
    }
    let raw = gamma_formula(c, epsilon, ln_k);
    if !(raw > 0.0) {
        return Err(Error::Unachievable(format!(
            "gamma formula gives {raw} for c = {c}, epsilon = {epsilon}, ln K = {ln_k}; \
             (epsilon/16) e^-c ln K = {} must exceed 1; supply gamma manually",
            epsilon / 16.0 * (-c).exp() * ln_k
        )));
    }
    DriftParams::manual(c, epsilon, ln_k, raw.min(0.5))
}
