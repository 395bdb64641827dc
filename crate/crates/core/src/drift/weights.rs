//! Drift weights `w_1..w_n` and the potential `Φ(x) = Σ w_i x_i`.
//!
//! Weights are held as natural logarithms. Steep objectives push `w_n` far
//! beyond the `f64` range (BinVal at `n = 1100` already has
//! `w_n = 2^1099`); linear-domain values are produced on request and only
//! when they fit.

use serde::{Deserialize, Serialize};

use super::blocks::{BlockStructure, Regime};
use super::params::DriftParams;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::objective::LinearObjective;

/// Above this natural log the linear value is not representable.
pub const LN_F64_MAX: f64 = 709.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DriftWeights {
    ln_w: Vec<f64>,
    params: Option<DriftParams>,
}

/// A weight in sign + log-magnitude form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_value: f64,
    pub sign: i8,
}

impl DriftWeights {
    /// Hand-built weights; every entry must be positive and finite.
    pub fn from_values(values: &[f64]) -> Result<DriftWeights> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeights(format!("w_{} = {v} is not a positive real", k + 1)));
        }
        Ok(DriftWeights { ln_w: values.iter().map(|v| v.ln()).collect(), params: None })
    }

    pub fn from_ln(ln_w: Vec<f64>, params: Option<DriftParams>) -> Result<DriftWeights> {
        if ln_w.is_empty() || ln_w.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidWeights("log weights must be finite".into()));
        }
        Ok(DriftWeights { ln_w, params })
    }

    pub fn n(&self) -> usize {
        self.ln_w.len()
    }

    pub fn params(&self) -> Option<&DriftParams> {
        self.params.as_ref()
    }

    /// `ln w_i`, `1 <= i <= n`.
    #[inline]
    pub fn ln_weight(&self, i: usize) -> f64 {
        self.ln_w[i - 1]
    }

    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_w
    }

    /// `w_i`; `+inf` when it exceeds the `f64` range.
    pub fn weight(&self, i: usize) -> f64 {
        self.ln_w[i - 1].exp()
    }

    /// All weights in the linear domain, or [`Error::WeightRange`] if
    /// `Σ w_i` would overflow.
    pub fn values(&self) -> Result<Vec<f64>> {
        let total = self.ln_total(self.n());
        if total > LN_F64_MAX {
            return Err(Error::WeightRange(total));
        }
        Ok(self.ln_w.iter().map(|l| l.exp()).collect())
    }

    pub fn log_values(&self) -> Vec<LogValue> {
        self.ln_w.iter().map(|&l| LogValue { log_value: l, sign: 1 }).collect()
    }

    /// `ln Σ_{i <= upto} w_i`.
    pub fn ln_total(&self, upto: usize) -> f64 {
        ln_sum(self.ln_w[..upto].iter().copied())
    }

    /// `Φ(x)` in the linear domain (`+inf` on overflow).
    pub fn phi(&self, x: &BitString) -> Result<f64> {
        self.check(x)?;
        Ok(x.ones_positions().map(|i| self.weight(i)).sum())
    }

    /// `ln Φ(x)`; `-inf` for the all-zero string.
    pub fn ln_phi(&self, x: &BitString) -> Result<f64> {
        self.check(x)?;
        Ok(ln_sum(x.ones_positions().map(|i| self.ln_weight(i))))
    }

    fn check(&self, x: &BitString) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), actual: x.len() });
        }
        Ok(())
    }
}

/// `ln Σ exp(v)`, stable and single pass; `-inf` for an empty sequence.
pub fn ln_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0f64;
    for v in values {
        if v == f64::NEG_INFINITY {
            continue;
        }
        if v <= max {
            acc += (v - max).exp();
        } else {
            acc = acc * (max - v).exp() + 1.0;
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        max
    } else {
        max + acc.ln()
    }
}

/// Computes the weights block by block from the right: `w_1 = 1`, then for
/// `r_B < i <= ℓ_B`
///
/// * copy regime: `w_i = w_{r_B} a_i / a_{r_B}`
/// * damped regime: `w_i = w_{r_B} min(K^{(i - r_B)c/n}, a_i / a_{r_B})`
pub fn build_weights(f: &LinearObjective, structure: &BlockStructure, params: &DriftParams) -> Result<DriftWeights> {
    let n = f.n();
    if structure.n != n {
        return Err(Error::LengthMismatch { expected: n, actual: structure.n });
    }
    let step = params.c / n as f64 * params.ln_k;
    let mut ln_w = vec![0.0; n];
    for b in &structure.blocks {
        let r = b.rightmost;
        let base = ln_w[r - 1];
        let ln_ar = f.ln_coefficient(r);
        for i in r + 1..=b.leftmost {
            let ratio = f.ln_coefficient(i) - ln_ar;
            ln_w[i - 1] = base
                + match b.regime {
                    Regime::Copy => ratio,
                    Regime::Damped => ((i - r) as f64 * step).min(ratio),
                };
        }
    }
    DriftWeights::from_ln(ln_w, Some(*params))
}

impl Serialize for DriftWeights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.log_values().serialize(s)
    }
}
