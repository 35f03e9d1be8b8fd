//! Sign vectors sigma in {-1,+1}^n.
//!
//! Stored as a bit vector with bit i = 1 meaning sigma(i+1) = -1, so the
//! all-plus vector is all-zero words, the canonical representative (first
//! sign +1) has bit 0 clear, and lexicographic order (with '+' before '-')
//! is word order after per-word bit reversal.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::CoreError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    words: Vec<u64>,
}

/// Normalized inner product of two partitions, kept exact as the integer
/// `n * overlap = n - 2 * d_H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OverlapValue {
    pub n: usize,
    pub numerator: i64,
}

impl OverlapValue {
    pub fn value(self) -> f64 {
        self.numerator as f64 / self.n as f64
    }
}

impl Partition {
    pub fn all_plus(n: usize) -> Self {
        assert!(n >= 1, "partition dimension must be positive");
        Partition {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self, CoreError> {
        if signs.is_empty() {
            return Err(CoreError::EmptyPartition);
        }
        let mut p = Partition::all_plus(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => p.set_minus(i),
                _ => return Err(CoreError::BadSign(s)),
            }
        }
        Ok(p)
    }

    /// Scan-internal constructor: bit i of `mask` set means sigma(i+1) = -1.
    pub fn from_minus_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        let mut p = Partition::all_plus(n);
        p.words[0] = mask & mask_low(n.min(64));
        p
    }

    pub fn minus_mask_u64(&self) -> u64 {
        assert!(self.n <= 64);
        self.words[0]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        debug_assert!(i < self.n);
        if self.words[i / 64] >> (i % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn set_sign(&mut self, i: usize, s: i8) {
        debug_assert!(i < self.n && (s == 1 || s == -1));
        if s == -1 {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    fn set_minus(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn negated(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let last_bits = self.n % 64;
        if last_bits != 0 {
            *words.last_mut().unwrap() &= mask_low(last_bits);
        }
        Partition { n: self.n, words }
    }

    pub fn is_canonical(&self) -> bool {
        self.sign(0) == 1
    }

    /// Representative of {sigma, -sigma} with first sign +1; idempotent.
    pub fn canonicalize(&self) -> Self {
        if self.is_canonical() {
            self.clone()
        } else {
            self.negated()
        }
    }

    pub fn hamming_distance(&self, other: &Partition) -> Result<usize, CoreError> {
        if self.n != other.n {
            return Err(CoreError::DimensionMismatch(self.n, other.n));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn overlap(&self, other: &Partition) -> Result<OverlapValue, CoreError> {
        let d = self.hamming_distance(other)?;
        Ok(OverlapValue {
            n: self.n,
            numerator: self.n as i64 - 2 * d as i64,
        })
    }

    /// Lexicographic order on sign strings with '+' < '-'.
    pub fn lex_cmp(&self, other: &Partition) -> Ordering {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                return a.reverse_bits().cmp(&b.reverse_bits());
            }
        }
        Ordering::Equal
    }
}

fn mask_low(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.n, other.n, "cannot order partitions of different n");
        self.lex_cmp(other)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.sign(i) == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Partition {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(CoreError::EmptyPartition);
        }
        let mut p = Partition::all_plus(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '+' => {}
                '-' => p.set_minus(i),
                _ => return Err(CoreError::BadPartitionChar(c)),
            }
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_examples() {
        let p: Partition = "+--".parse().unwrap();
        assert_eq!(p.canonicalize(), p);
        let q: Partition = "-++".parse().unwrap();
        assert_eq!(q.canonicalize().to_string(), "+--");
        assert_eq!(q.canonicalize().canonicalize(), q.canonicalize());
    }

    #[test]
    fn hamming_and_overlap() {
        let a: Partition = "++++".parse().unwrap();
        let b: Partition = "++--".parse().unwrap();
        assert_eq!(a.hamming_distance(&a).unwrap(), 0);
        assert_eq!(a.hamming_distance(&a.negated()).unwrap(), 4);
        assert_eq!(a.overlap(&b).unwrap().numerator, 0);
        let c: Partition = "+-+-".parse().unwrap();
        assert_eq!(a.hamming_distance(&c).unwrap(), 2);
        assert_eq!(a.overlap(&a).unwrap().value(), 1.0);
        assert_eq!(a.overlap(&a.negated()).unwrap().value(), -1.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a: Partition = "++".parse().unwrap();
        let b: Partition = "+++".parse().unwrap();
        assert!(a.hamming_distance(&b).is_err());
        assert!(a.overlap(&b).is_err());
    }

    #[test]
    fn lex_order_plus_first() {
        let a: Partition = "+++".parse().unwrap();
        let b: Partition = "++-".parse().unwrap();
        let c: Partition = "+-+".parse().unwrap();
        assert!(a < b && b < c);
        // Crosses word boundaries too.
        let long_a = Partition::all_plus(70);
        let mut long_b = long_a.clone();
        long_b.set_sign(69, -1);
        assert!(long_a < long_b);
        let mut long_c = long_a.clone();
        long_c.set_sign(1, -1);
        assert!(long_b < long_c);
    }

    #[test]
    fn display_parse_roundtrip() {
        let s = "+--+-++-";
        let p: Partition = s.parse().unwrap();
        assert_eq!(p.to_string(), s);
        assert_eq!(p.sign(0), 1);
        assert_eq!(p.sign(1), -1);
    }
}
