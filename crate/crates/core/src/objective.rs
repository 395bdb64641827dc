//! Linear pseudo-Boolean objectives `f(x) = Σ a_i x_i` with sorted positive
//! coefficients, minimised by the EA.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::wide::{signed_sum_sign, SignedTerm, WideReal};

/// How a raw coefficient vector was mapped onto the normalized form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// Length of the raw input.
    pub original_len: usize,
    /// `permutation[i-1]` is the raw index (0-based) that became position `i`.
    pub permutation: Vec<usize>,
    /// Raw indices whose coefficient was negative; the corresponding bit is
    /// complemented when mapping into normalized space.
    pub sign_flipped: Vec<usize>,
    /// Raw indices with a zero coefficient (they never affect `f`).
    pub dropped: Vec<usize>,
}

impl Normalization {
    fn identity(n: usize) -> Normalization {
        Normalization { original_len: n, permutation: (0..n).collect(), sign_flipped: Vec::new(), dropped: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.sign_flipped.is_empty()
            && self.dropped.is_empty()
            && self.permutation.iter().enumerate().all(|(i, &p)| i == p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ObjectiveRepr", into = "ObjectiveRepr")]
pub struct LinearObjective {
    coefficients: Vec<WideReal>,
    ln_coefficients: Vec<f64>,
    provenance: Normalization,
}

impl LinearObjective {
    /// Accepts coefficients that are already positive and non-decreasing.
    pub fn from_sorted(coefficients: Vec<WideReal>) -> Result<LinearObjective> {
        if coefficients.is_empty() {
            return Err(Error::EmptyObjective);
        }
        for (k, a) in coefficients.iter().enumerate() {
            if a.is_zero() {
                return Err(Error::UnsortedCoefficients(k + 1));
            }
            if k > 0 && coefficients[k - 1] > *a {
                return Err(Error::UnsortedCoefficients(k + 1));
            }
        }
        let n = coefficients.len();
        Ok(Self::assemble(coefficients, Normalization::identity(n)))
    }

    pub fn from_sorted_f64(coefficients: &[f64]) -> Result<LinearObjective> {
        let wide = coefficients
            .iter()
            .enumerate()
            .map(|(index, &value)| WideReal::from_f64(value).ok_or(Error::InvalidCoefficient { index, value }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_sorted(wide)
    }

    fn assemble(coefficients: Vec<WideReal>, provenance: Normalization) -> LinearObjective {
        let ln_coefficients = coefficients.iter().map(WideReal::ln).collect();
        LinearObjective { coefficients, ln_coefficients, provenance }
    }

    /// Drops zeros, sign-flips negatives (complementing their bit) and sorts
    /// ascending; ties keep their raw order.
    pub fn normalize(raw: &[f64]) -> Result<LinearObjective> {
        if raw.is_empty() {
            return Err(Error::EmptyObjective);
        }
        let mut kept: Vec<(WideReal, usize)> = Vec::with_capacity(raw.len());
        let mut sign_flipped = Vec::new();
        let mut dropped = Vec::new();
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::InvalidCoefficient { index, value });
            }
            if value == 0.0 {
                dropped.push(index);
                continue;
            }
            if value < 0.0 {
                sign_flipped.push(index);
            }
            kept.push((WideReal::from_f64(value.abs()).expect("finite"), index));
        }
        if kept.is_empty() {
            return Err(Error::DegenerateObjective(raw.len()));
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let permutation = kept.iter().map(|&(_, k)| k).collect();
        let coefficients = kept.into_iter().map(|(a, _)| a).collect();
        Ok(Self::assemble(coefficients, Normalization { original_len: raw.len(), permutation, sign_flipped, dropped }))
    }

    pub fn onemax(n: usize) -> LinearObjective {
        Self::from_sorted(vec![WideReal::ONE; n]).expect("n >= 1")
    }

    /// `a_i = 2^{i-1}`, exact at any `n`.
    pub fn binval(n: usize) -> LinearObjective {
        Self::from_sorted((0..n as i64).map(WideReal::pow2).collect()).expect("n >= 1")
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    /// `a_i`, `1 <= i <= n`.
    #[inline]
    pub fn coefficient(&self, i: usize) -> WideReal {
        self.coefficients[i - 1]
    }

    #[inline]
    pub fn ln_coefficient(&self, i: usize) -> f64 {
        self.ln_coefficients[i - 1]
    }

    pub fn coefficients(&self) -> &[WideReal] {
        &self.coefficients
    }

    pub fn provenance(&self) -> &Normalization {
        &self.provenance
    }

    /// Coefficients as `f64` when all of them are finite.
    pub fn coefficients_f64(&self) -> Option<Vec<f64>> {
        let v: Vec<f64> = self.coefficients.iter().map(WideReal::to_f64).collect();
        v.iter().all(|a| a.is_finite()).then_some(v)
    }

    fn check(&self, x: &BitString) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), actual: x.len() });
        }
        Ok(())
    }

    /// `Σ a_i x_i`, summed from position 1 upwards. Exact while partial sums
    /// fit in 53 significant bits (e.g. integer coefficients below `2^53`).
    pub fn evaluate(&self, x: &BitString) -> Result<WideReal> {
        self.check(x)?;
        Ok(x.ones_positions().fold(WideReal::ZERO, |acc, i| acc.add(self.coefficient(i))))
    }

    /// Exact three-way comparison of `f(x)` and `f(y)`.
    pub fn compare(&self, x: &BitString, y: &BitString) -> Result<Ordering> {
        self.check(x)?;
        self.check(y)?;
        let diff = x.xor(y)?;
        let terms: Vec<SignedTerm> =
            diff.ones_positions().map(|i| SignedTerm { value: self.coefficient(i), negative: !x.get(i) }).collect();
        Ok(signed_sum_sign(&terms))
    }

    /// Whether flipping `flips` in `x` gives `f(x') <= f(x)`. `flips` must hold
    /// distinct positions; `scratch` is reused between calls.
    pub fn accepts_flips(&self, x: &BitString, flips: &[usize], scratch: &mut Vec<SignedTerm>) -> bool {
        let mut gains = false;
        let mut losses = false;
        for &i in flips {
            if x.get(i) {
                gains = true;
            } else {
                losses = true;
            }
        }
        if !losses {
            return true;
        }
        if !gains {
            return false;
        }
        scratch.clear();
        scratch.extend(flips.iter().map(|&i| SignedTerm { value: self.coefficient(i), negative: x.get(i) }));
        signed_sum_sign(scratch) != Ordering::Greater
    }

    /// Same as [`accepts_flips`](Self::accepts_flips) for `n <= 64` with the
    /// state and flip set given as masks.
    pub fn accepts_mask(&self, state: u64, mask: u64, scratch: &mut Vec<SignedTerm>) -> bool {
        let gains = mask & state;
        let losses = mask & !state;
        if losses == 0 {
            return true;
        }
        if gains == 0 {
            return false;
        }
        scratch.clear();
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            scratch.push(SignedTerm { value: self.coefficients[b], negative: state >> b & 1 == 1 });
        }
        signed_sum_sign(scratch) != Ordering::Greater
    }

    /// Maps a raw-space assignment (one bool per raw coefficient) into the
    /// normalized index space. The objective value differs from the raw one by
    /// [`raw_offset`](Self::raw_offset).
    pub fn to_normalized(&self, raw_bits: &[bool]) -> Result<BitString> {
        let p = &self.provenance;
        if raw_bits.len() != p.original_len {
            return Err(Error::LengthMismatch { expected: p.original_len, actual: raw_bits.len() });
        }
        let mut x = BitString::zeros(self.n());
        for (pos, &raw) in p.permutation.iter().enumerate() {
            let bit = raw_bits[raw] ^ p.sign_flipped.binary_search(&raw).is_ok();
            x.set(pos + 1, bit);
        }
        Ok(x)
    }

    /// `Σ_{negative raw a_k} a_k`: raw value = normalized value + offset.
    pub fn raw_offset(&self) -> f64 {
        let p = &self.provenance;
        p.sign_flipped
            .iter()
            .map(|&raw| {
                let pos = p.permutation.iter().position(|&q| q == raw).expect("kept index");
                -self.coefficients[pos].to_f64()
            })
            .sum()
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct ObjectiveRepr {
    coefficients: Vec<WideReal>,
    provenance: Normalization,
}

impl From<ObjectiveRepr> for LinearObjective {
    fn from(r: ObjectiveRepr) -> Self {
        LinearObjective::assemble(r.coefficients, r.provenance)
    }
}

impl From<LinearObjective> for ObjectiveRepr {
    fn from(f: LinearObjective) -> Self {
        ObjectiveRepr { coefficients: f.coefficients, provenance: f.provenance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn normalize_sorts_and_records_permutation() {
        let f = LinearObjective::normalize(&[3.0, 1.0, 2.0]).unwrap();
        let c: Vec<f64> = f.coefficients_f64().unwrap();
        assert_eq!(c, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.provenance().permutation, vec![1, 2, 0]);
        assert!(!f.provenance().is_identity());
    }

    #[test]
    fn normalize_keeps_sorted_input() {
        let f = LinearObjective::normalize(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.coefficients_f64().unwrap(), vec![1.0, 1.0, 1.0]);
        assert!(f.provenance().is_identity());
    }

    #[test]
    fn normalize_drops_zeros_and_flips_negatives() {
        let f = LinearObjective::normalize(&[0.0, -2.0, 5.0]).unwrap();
        assert_eq!(f.coefficients_f64().unwrap(), vec![2.0, 5.0]);
        assert_eq!(f.provenance().dropped, vec![0]);
        assert_eq!(f.provenance().sign_flipped, vec![1]);
        // raw x = (1, 0, 1): raw f = 5; normalized bits: a=2 <- complement(0)=1, a=5 <- 1
        let x = f.to_normalized(&[true, false, true]).unwrap();
        assert_eq!(x.to_string(), "11");
        let v = f.evaluate(&x).unwrap().to_f64() + f.raw_offset();
        assert_eq!(v, 5.0);
    }

    #[test]
    fn normalize_rejects_all_zero() {
        assert_eq!(LinearObjective::normalize(&[0.0, 0.0]), Err(Error::DegenerateObjective(2)));
        assert_eq!(LinearObjective::normalize(&[]), Err(Error::EmptyObjective));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(LinearObjective::binval(3).evaluate(&bits("101")).unwrap().to_f64(), 5.0);
        assert_eq!(LinearObjective::onemax(5).evaluate(&bits("11111")).unwrap().to_f64(), 5.0);
        let f = LinearObjective::normalize(&[0.3, 7.0, 2.5]).unwrap();
        assert!(f.evaluate(&BitString::zeros(3)).unwrap().is_zero());
        assert!(f.evaluate(&bits("1010")).is_err());
    }

    #[test]
    fn compare_is_exact_for_huge_binval() {
        let f = LinearObjective::binval(5000);
        let mut x = BitString::zeros(5000);
        x.set(5000, true);
        let y = BitString::ones(5000);
        let mut y_low = y.clone();
        y_low.set(5000, false);
        // 2^4999 > 2^4999 - 1
        assert_eq!(f.compare(&x, &y_low).unwrap(), Ordering::Greater);
        assert_eq!(f.compare(&y, &y).unwrap(), Ordering::Equal);
    }

    #[test]
    fn unsorted_input_rejected() {
        assert!(LinearObjective::from_sorted_f64(&[2.0, 1.0]).is_err());
        assert!(LinearObjective::from_sorted_f64(&[0.0, 1.0]).is_err());
    }
}
