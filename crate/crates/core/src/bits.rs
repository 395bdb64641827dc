//! Fixed-length bit strings, indexed `1..=n` with position `n` the leftmost
//! (most significant) bit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(n: usize) -> BitString {
        BitString { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn ones(n: usize) -> BitString {
        let mut x = Self::zeros(n);
        for w in x.words.iter_mut() {
            *w = u64::MAX;
        }
        x.clear_tail();
        x
    }

    /// Bit `i` (1-based) is bit `i-1` of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> BitString {
        assert!(n <= 64, "from_mask supports n <= 64");
        let mut x = Self::zeros(n);
        if n > 0 {
            x.words[0] = mask;
            x.clear_tail();
        }
        x
    }

    /// Builds from `bits[i-1] = x_i`.
    pub fn from_bits(bits: &[bool]) -> BitString {
        let mut x = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            if b {
                x.words[k / 64] |= 1 << (k % 64);
            }
        }
        x
    }

    /// Builds from the set positions (1-based).
    pub fn from_positions(n: usize, positions: impl IntoIterator<Item = usize>) -> BitString {
        let mut x = Self::zeros(n);
        for i in positions {
            x.set(i, true);
        }
        x
    }

    pub(crate) fn from_words(n: usize, words: Vec<u64>) -> BitString {
        debug_assert_eq!(words.len(), n.div_ceil(64));
        let mut x = BitString { n, words };
        x.clear_tail();
        x
    }

    fn clear_tail(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Value of `x_i`, `1 <= i <= n`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i >= 1 && i <= self.n);
        let k = i - 1;
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i >= 1 && i <= self.n, "bit position {i} out of 1..={}", self.n);
        let k = i - 1;
        if value {
            self.words[k / 64] |= 1 << (k % 64);
        } else {
            self.words[k / 64] &= !(1 << (k % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i >= 1 && i <= self.n);
        let k = i - 1;
        self.words[k / 64] ^= 1 << (k % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> BitString {
        let words = self.words.iter().map(|w| !w).collect();
        BitString::from_words(self.n, words)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        self.check_len(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(BitString::from_words(self.n, words))
    }

    pub fn hamming(&self, other: &BitString) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// Set positions in increasing order.
    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b + 1)
            })
        })
    }

    /// Highest set position, `None` for the all-zero string.
    pub fn leftmost_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * 64 + 64 - w.leading_zeros() as usize)
    }

    /// Low 64 bits as a mask (bit `i-1` is `x_i`).
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub(crate) fn check_len(&self, other: &BitString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: other.n });
        }
        Ok(())
    }
}

/// Displays `x_n … x_1`.
impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (1..=self.n).rev() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Parses `x_n … x_1` (leftmost character is position `n`).
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.len();
        let mut x = BitString::zeros(n);
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => x.set(n - k, true),
                other => return Err(Error::InvalidBitString(format!("unexpected character {other:?}"))),
            }
        }
        Ok(x)
    }
}
