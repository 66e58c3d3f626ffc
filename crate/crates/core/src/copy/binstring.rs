use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite 0/1 string, ordered shortlex: shorter strings first, equal lengths
/// compared at the first differing bit with 0 before 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BinString {
    bits: Vec<bool>,
}

impl BinString {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BinString { bits }
    }

    /// `0^n`, the least string of length `n`.
    pub fn zeros(n: usize) -> Self {
        BinString { bits: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The immediate successor in shortlex order: binary increment, rolling
    /// over `1^n` to `0^(n+1)`.
    pub fn next(&self) -> Self {
        let mut bits = self.bits.clone();
        for b in bits.iter_mut().rev() {
            if *b {
                *b = false;
            } else {
                *b = true;
                return BinString { bits };
            }
        }
        BinString::zeros(self.len() + 1)
    }

    /// Position in the shortlex enumeration, `2^len - 1 + value`; `None` if
    /// it does not fit in 128 bits.
    pub fn rank(&self) -> Option<u128> {
        if self.len() >= 127 {
            return None;
        }
        let value = self.bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128);
        Some((1u128 << self.len()) - 1 + value)
    }

    pub fn from_rank(rank: u128) -> Self {
        let n = (rank + 1).ilog2() as usize;
        let value = rank + 1 - (1u128 << n);
        BinString {
            bits: (0..n).rev().map(|i| value >> i & 1 == 1).collect(),
        }
    }
}

pub fn length_lex_compare(a: &BinString, b: &BinString) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.bits.cmp(&b.bits))
}

impl Ord for BinString {
    fn cmp(&self, other: &Self) -> Ordering {
        length_lex_compare(self, other)
    }
}

impl PartialOrd for BinString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The empty string prints as `e` so that trace values are never empty.
impl fmt::Display for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("e");
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(BinString::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    line: 0,
                    msg: format!("{s:?} is not a binary string"),
                }),
            })
            .collect::<Result<Vec<bool>>>()
            .map(BinString::from_bits)
    }
}
