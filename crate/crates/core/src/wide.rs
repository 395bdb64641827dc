//! Non-negative reals with a 53-bit integer mantissa and an unbounded binary
//! exponent.
//!
//! Linear objectives such as BinVal have coefficients `2^{i-1}` that overflow
//! `f64` long before the problem sizes used in runtime experiments. A
//! [`WideReal`] stores every `f64` exactly and extends the exponent range, so
//! coefficient ratios and acceptance decisions stay exact at any `n`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

const MANT_BITS: u32 = 53;
const MANT_MIN: u64 = 1 << (MANT_BITS - 1);

/// `mantissa * 2^exponent`, with `mantissa` either zero or in `[2^52, 2^53)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WideReal {
    mantissa: u64,
    exponent: i64,
}

impl WideReal {
    pub const ZERO: WideReal = WideReal { mantissa: 0, exponent: 0 };
    pub const ONE: WideReal = WideReal { mantissa: MANT_MIN, exponent: -52 };

    /// Exact conversion. Returns `None` for negative, NaN or infinite input.
    pub fn from_f64(value: f64) -> Option<WideReal> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        if value == 0.0 {
            return Some(Self::ZERO);
        }
        let bits = value.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
        Some(Self::normalized(mantissa as u128, exponent))
    }

    /// `2^power`, exact.
    pub fn pow2(power: i64) -> WideReal {
        WideReal { mantissa: MANT_MIN, exponent: power - 52 }
    }

    /// Nearest representable value to `exp(ln_value)`.
    pub fn from_ln(ln_value: f64) -> WideReal {
        if ln_value == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let log2 = ln_value / std::f64::consts::LN_2;
        let whole = log2.floor();
        let frac = (log2 - whole).exp2();
        let mut mantissa = (frac * (MANT_MIN as f64)).round() as u128;
        let mut exponent = whole as i64 - 52;
        if mantissa >= (1u128 << MANT_BITS) {
            mantissa >>= 1;
            exponent += 1;
        }
        Self::normalized(mantissa, exponent)
    }

    fn normalized(mut mantissa: u128, mut exponent: i64) -> WideReal {
        if mantissa == 0 {
            return Self::ZERO;
        }
        let bits = 128 - mantissa.leading_zeros();
        if bits > MANT_BITS {
            // round half to even
            let shift = bits - MANT_BITS;
            let half = 1u128 << (shift - 1);
            let rem = mantissa & ((1u128 << shift) - 1);
            mantissa >>= shift;
            exponent += shift as i64;
            if rem > half || (rem == half && mantissa & 1 == 1) {
                mantissa += 1;
                if mantissa == 1u128 << MANT_BITS {
                    mantissa >>= 1;
                    exponent += 1;
                }
            }
        } else {
            let shift = MANT_BITS - bits;
            mantissa <<= shift;
            exponent -= shift as i64;
        }
        WideReal { mantissa: mantissa as u64, exponent }
    }

    pub fn mantissa(&self) -> u64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        (self.mantissa as f64).ln() + (self.exponent as f64) * std::f64::consts::LN_2
    }

    /// Nearest `f64`; `+inf` when out of range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let top = self.exponent + 52;
        if top > 1023 {
            return f64::INFINITY;
        }
        if top < -1075 {
            return 0.0;
        }
        // split the scaling so intermediate powers stay representable
        let half = self.exponent / 2;
        (self.mantissa as f64) * pow2_f64(half) * pow2_f64(self.exponent - half)
    }

    /// Rounded sum (one rounding, like an `f64` addition).
    pub fn add(self, other: WideReal) -> WideReal {
        let (big, small) = if self >= other { (self, other) } else { (other, self) };
        if small.is_zero() {
            return big;
        }
        let gap = big.exponent - small.exponent;
        if gap > 60 {
            // below a quarter ulp of `big`
            return big;
        }
        let wide = ((big.mantissa as u128) << gap) + small.mantissa as u128;
        Self::normalized(wide, small.exponent)
    }

    /// Exact ordering of `self` against `factor * other`.
    pub fn cmp_scaled(&self, other: &WideReal, factor: u128) -> Ordering {
        match (other.mantissa as u128).checked_mul(factor) {
            Some(rhs) => cmp_scaled(self.mantissa as u128, self.exponent, rhs, other.exponent),
            None => {
                let lhs = BigInt::from(self.mantissa);
                let rhs = BigInt::from(other.mantissa) * BigInt::from(factor);
                let shift = self.exponent - other.exponent;
                if shift >= 0 {
                    (lhs << shift as usize).cmp(&rhs)
                } else {
                    lhs.cmp(&(rhs << (-shift) as usize))
                }
            }
        }
    }

    /// Exact test of `self >= factor * other`.
    pub fn ge_scaled(&self, other: &WideReal, factor: u128) -> bool {
        self.cmp_scaled(other, factor) != Ordering::Less
    }

    /// Exact test of `self > factor * other`.
    pub fn gt_scaled(&self, other: &WideReal, factor: u128) -> bool {
        self.cmp_scaled(other, factor) == Ordering::Greater
    }
}

/// Compare `a * 2^ea` with `b * 2^eb` exactly.
fn cmp_scaled(a: u128, ea: i64, b: u128, eb: i64) -> Ordering {
    match (a == 0, b == 0) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    let la = (128 - a.leading_zeros()) as i64 + ea;
    let lb = (128 - b.leading_zeros()) as i64 + eb;
    if la != lb {
        return la.cmp(&lb);
    }
    // same magnitude: align to the larger bit length, which fits in 128 bits
    let (ba, bb) = ((128 - a.leading_zeros()) as i64, (128 - b.leading_zeros()) as i64);
    if ba >= bb {
        a.cmp(&(b << (ba - bb)))
    } else {
        (a << (bb - ba)).cmp(&b)
    }
}

impl PartialOrd for WideReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WideReal {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_scaled(self.mantissa as u128, self.exponent, other.mantissa as u128, other.exponent)
    }
}

impl fmt::Display for WideReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v == 0.0 || v.abs() >= f64::MIN_POSITIVE) {
            write!(f, "{v}")
        } else {
            write!(f, "{}*2^{}", self.mantissa, self.exponent)
        }
    }
}

/// `2^power` as an `f64` (0 below the subnormal range, inf above).
pub(crate) fn pow2_f64(power: i64) -> f64 {
    if power > 1023 {
        f64::INFINITY
    } else if power >= -1022 {
        f64::from_bits(((power + 1023) as u64) << 52)
    } else if power >= -1074 {
        f64::from_bits(1u64 << (power + 1074))
    } else {
        0.0
    }
}

/// A signed term `±value` for [`signed_sum_sign`].
#[derive(Clone, Copy, Debug)]
pub struct SignedTerm {
    pub value: WideReal,
    pub negative: bool,
}

/// Exact sign of `Σ ±value_i`.
///
/// Three tiers: an `i128` accumulator when the exponents span at most 63
/// bits, a scaled `f64` sum accepted only when it clears a rigorous rounding
/// bound, and a big-integer sum otherwise.
pub fn signed_sum_sign(terms: &[SignedTerm]) -> Ordering {
    let mut emin = i64::MAX;
    let mut emax = i64::MIN;
    let mut count = 0usize;
    for t in terms.iter().filter(|t| !t.value.is_zero()) {
        emin = emin.min(t.value.exponent);
        emax = emax.max(t.value.exponent);
        count += 1;
    }
    if count == 0 {
        return Ordering::Equal;
    }
    if emax - emin <= 63 && count <= 1024 {
        let mut acc: i128 = 0;
        for t in terms.iter().filter(|t| !t.value.is_zero()) {
            let v = (t.value.mantissa as i128) << (t.value.exponent - emin);
            if t.negative {
                acc -= v;
            } else {
                acc += v;
            }
        }
        return acc.cmp(&0);
    }

    let mut sum = 0.0f64;
    let mut abs = 0.0f64;
    for t in terms.iter().filter(|t| !t.value.is_zero()) {
        let v = (t.value.mantissa as f64) * pow2_f64(t.value.exponent - emax - 52);
        abs += v;
        if t.negative {
            sum -= v;
        } else {
            sum += v;
        }
    }
    let bound = (count as f64 + 1.0) * (abs * f64::EPSILON + pow2_f64(-1000));
    if sum.abs() > bound {
        return if sum > 0.0 { Ordering::Greater } else { Ordering::Less };
    }

    let mut acc = BigInt::from(0);
    for t in terms.iter().filter(|t| !t.value.is_zero()) {
        let v = BigInt::from(t.value.mantissa) << ((t.value.exponent - emin) as usize);
        if t.negative {
            acc -= v;
        } else {
            acc += v;
        }
    }
    acc.sign_ordering()
}

trait SignOrdering {
    fn sign_ordering(&self) -> Ordering;
}

impl SignOrdering for BigInt {
    fn sign_ordering(&self) -> Ordering {
        self.cmp(&BigInt::from(0))
    }
}
