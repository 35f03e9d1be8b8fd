//! Signed 256-bit integers.
//!
//! Inner products of quantized Gaussians need roughly `frac_bits + 10 +
//! log2(n)` bits, which overflows `i128` at the default 128 fractional
//! bits. A fixed-width pair of limbs keeps the hot enumeration loop at a
//! couple of machine adds per step, where an arbitrary-precision integer
//! would allocate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};

/// Two's-complement 256-bit signed integer: `value = hi * 2^128 + lo`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct I256 {
    hi: i128,
    lo: u128,
}

/// 2^e as f64 for -1022 < e < 1024.
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..1024).contains(&e));
    f64::from_bits(((1023 + e) as u64) << 52)
}

impl I256 {
    pub const ZERO: I256 = I256 { hi: 0, lo: 0 };
    pub const ONE: I256 = I256 { hi: 0, lo: 1 };
    pub const MAX: I256 = I256 {
        hi: i128::MAX,
        lo: u128::MAX,
    };

    pub const fn from_parts(hi: i128, lo: u128) -> Self {
        I256 { hi, lo }
    }

    pub const fn parts(self) -> (i128, u128) {
        (self.hi, self.lo)
    }

    pub fn from_i128(v: i128) -> Self {
        I256 {
            hi: if v < 0 { -1 } else { 0 },
            lo: v as u128,
        }
    }

    pub fn from_u128(v: u128) -> Self {
        I256 { hi: 0, lo: v }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0 && self.lo == 0
    }

    pub fn is_negative(self) -> bool {
        self.hi < 0
    }

    #[inline]
    pub fn wrapping_add(self, rhs: Self) -> Self {
        let (lo, carry) = self.lo.overflowing_add(rhs.lo);
        let hi = self.hi.wrapping_add(rhs.hi).wrapping_add(carry as i128);
        I256 { hi, lo }
    }

    #[inline]
    pub fn wrapping_sub(self, rhs: Self) -> Self {
        let (lo, borrow) = self.lo.overflowing_sub(rhs.lo);
        let hi = self.hi.wrapping_sub(rhs.hi).wrapping_sub(borrow as i128);
        I256 { hi, lo }
    }

    #[inline]
    pub fn wrapping_neg(self) -> Self {
        if self.lo == 0 {
            I256 {
                hi: self.hi.wrapping_neg(),
                lo: 0,
            }
        } else {
            I256 {
                hi: !self.hi,
                lo: self.lo.wrapping_neg(),
            }
        }
    }

    /// Absolute value. `I256::MIN` cannot occur here: quantization rejects
    /// inputs whose magnitude would need more than 254 bits.
    #[inline]
    pub fn abs(self) -> Self {
        if self.is_negative() {
            self.wrapping_neg()
        } else {
            self
        }
    }

    /// Number of bits in the magnitude (0 for zero).
    pub fn bit_len(self) -> u32 {
        let m = self.abs();
        let hi = m.hi as u128;
        if hi != 0 {
            256 - hi.leading_zeros()
        } else {
            128 - m.lo.leading_zeros()
        }
    }

    /// Low 128 bits of the magnitude shifted right by `s`; requires a
    /// non-negative value.
    fn shr_low128(self, s: u32) -> u128 {
        debug_assert!(!self.is_negative());
        let hi = self.hi as u128;
        if s == 0 {
            self.lo
        } else if s < 128 {
            (self.lo >> s) | (hi << (128 - s))
        } else if s < 256 {
            hi >> (s - 128)
        } else {
            0
        }
    }

    /// True when any magnitude bit strictly below position `s` is set.
    fn any_bits_below(self, s: u32) -> bool {
        debug_assert!(!self.is_negative());
        if s == 0 {
            false
        } else if s <= 128 {
            let mask = if s == 128 { u128::MAX } else { (1u128 << s) - 1 };
            self.lo & mask != 0
        } else {
            let mask = if s >= 256 {
                u128::MAX
            } else {
                (1u128 << (s - 128)) - 1
            };
            self.lo != 0 || (self.hi as u128) & mask != 0
        }
    }

    /// Left shift; caller guarantees the result fits (checked in debug).
    pub fn shl(self, s: u32) -> Self {
        debug_assert!(self.bit_len() + s <= 254, "shift overflows I256");
        let neg = self.is_negative();
        let m = self.abs();
        let (mhi, mlo) = (m.hi as u128, m.lo);
        let (rhi, rlo) = if s == 0 {
            (mhi, mlo)
        } else if s < 128 {
            ((mhi << s) | (mlo >> (128 - s)), mlo << s)
        } else {
            (mlo << (s - 128), 0)
        };
        let out = I256 {
            hi: rhi as i128,
            lo: rlo,
        };
        if neg {
            out.wrapping_neg()
        } else {
            out
        }
    }

    /// Quotient and remainder by a small positive divisor, Euclidean
    /// convention: remainder in `[0, d)`.
    pub fn div_rem_euclid_u64(self, d: u64) -> (I256, u64) {
        assert!(d > 0, "division by zero");
        let neg = self.is_negative();
        let m = self.abs();
        let (q, r) = m.div_rem_mag_u64(d);
        if !neg {
            (q, r)
        } else if r == 0 {
            (q.wrapping_neg(), 0)
        } else {
            (q.wrapping_add(I256::ONE).wrapping_neg(), d - r)
        }
    }

    /// Magnitude long division by u64; self must be non-negative.
    fn div_rem_mag_u64(self, d: u64) -> (I256, u64) {
        debug_assert!(!self.is_negative());
        let limbs = [
            self.lo as u64,
            (self.lo >> 64) as u64,
            self.hi as u64,
            ((self.hi as u128) >> 64) as u64,
        ];
        let mut q = [0u64; 4];
        let mut rem: u128 = 0;
        for i in (0..4).rev() {
            let cur = (rem << 64) | limbs[i] as u128;
            q[i] = (cur / d as u128) as u64;
            rem = cur % d as u128;
        }
        let out = I256 {
            hi: ((q[3] as u128) << 64 | q[2] as u128) as i128,
            lo: (q[1] as u128) << 64 | q[0] as u128,
        };
        (out, rem as u64)
    }

    /// Correctly rounded (half-to-even) conversion to `f64`.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let neg = self.is_negative();
        let m = self.abs();
        let bl = m.bit_len();
        let mag = if bl <= 53 {
            m.lo as f64
        } else {
            // Keep the top 54 bits (53 + guard) plus a sticky bit.
            let shift = bl - 54;
            let top = m.shr_low128(shift) as u64;
            let sticky = m.any_bits_below(shift);
            let guard = top & 1;
            let mut mant = top >> 1;
            if guard == 1 && (sticky || mant & 1 == 1) {
                mant += 1;
            }
            mant as f64 * pow2(bl as i32 - 53)
        };
        if neg {
            -mag
        } else {
            mag
        }
    }

    /// log2 of the absolute value; `-inf` for zero.
    pub fn log2_abs(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let m = self.abs();
        let bl = m.bit_len();
        if bl <= 53 {
            (m.lo as f64).log2()
        } else {
            let shift = bl - 53;
            let top = m.shr_low128(shift) as u64;
            (top as f64).log2() + shift as f64
        }
    }

    pub fn to_bigint(self) -> BigInt {
        let neg = self.is_negative();
        let m = self.abs();
        let mut bytes = Vec::with_capacity(32);
        bytes.extend_from_slice(&m.lo.to_le_bytes());
        bytes.extend_from_slice(&(m.hi as u128).to_le_bytes());
        let sign = if self.is_zero() {
            Sign::NoSign
        } else if neg {
            Sign::Minus
        } else {
            Sign::Plus
        };
        BigInt::from_bytes_le(sign, &bytes)
    }

    /// Conversion from a big integer; `None` when out of range (two bits of
    /// headroom are kept below the sign bit).
    pub fn try_from_bigint(v: &BigInt) -> Option<I256> {
        let (sign, bytes) = v.to_bytes_le();
        if bytes.len() > 32 {
            return None;
        }
        let mut buf = [0u8; 32];
        buf[..bytes.len()].copy_from_slice(&bytes);
        let lo = u128::from_le_bytes(buf[..16].try_into().unwrap());
        let hi = u128::from_le_bytes(buf[16..].try_into().unwrap());
        if hi >> 126 != 0 {
            return None;
        }
        let out = I256 { hi: hi as i128, lo };
        Some(if sign == Sign::Minus {
            out.wrapping_neg()
        } else {
            out
        })
    }
}

impl PartialOrd for I256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for I256 {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        match self.hi.cmp(&other.hi) {
            Ordering::Equal => self.lo.cmp(&other.lo),
            ord => ord,
        }
    }
}

impl std::ops::Add for I256 {
    type Output = I256;
    fn add(self, rhs: Self) -> Self {
        self.wrapping_add(rhs)
    }
}

impl std::ops::Sub for I256 {
    type Output = I256;
    fn sub(self, rhs: Self) -> Self {
        self.wrapping_sub(rhs)
    }
}

impl std::ops::Neg for I256 {
    type Output = I256;
    fn neg(self) -> Self {
        self.wrapping_neg()
    }
}

impl std::ops::AddAssign for I256 {
    fn add_assign(&mut self, rhs: Self) {
        *self = self.wrapping_add(rhs);
    }
}

impl std::ops::SubAssign for I256 {
    fn sub_assign(&mut self, rhs: Self) {
        *self = self.wrapping_sub(rhs);
    }
}

impl fmt::Display for I256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let neg = self.is_negative();
        let mut m = self.abs();
        let mut chunks = Vec::new();
        while !m.is_zero() {
            let (q, r) = m.div_rem_mag_u64(10_000_000_000_000_000_000);
            chunks.push(r);
            m = q;
        }
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&chunks.pop().unwrap().to_string());
        while let Some(c) = chunks.pop() {
            s.push_str(&format!("{c:019}"));
        }
        f.write_str(&s)
    }
}

impl fmt::Debug for I256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseI256Error;

impl fmt::Display for ParseI256Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid 256-bit integer literal")
    }
}

impl std::error::Error for ParseI256Error {}

impl FromStr for I256 {
    type Err = ParseI256Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: BigInt = s.parse().map_err(|_| ParseI256Error)?;
        I256::try_from_bigint(&v).ok_or(ParseI256Error)
    }
}

impl From<i64> for I256 {
    fn from(v: i64) -> Self {
        I256::from_i128(v as i128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_sub_roundtrip_against_bigint() {
        let vals = [
            I256::ZERO,
            I256::ONE,
            I256::from_i128(-1),
            I256::from_i128(i128::MAX),
            I256::from_i128(i128::MIN + 1),
            I256::from_u128(u128::MAX).shl(60),
            I256::from_i128(-7).shl(200),
        ];
        for &a in &vals {
            for &b in &vals {
                assert_eq!((a + b).to_bigint(), a.to_bigint() + b.to_bigint());
                assert_eq!((a - b).to_bigint(), a.to_bigint() - b.to_bigint());
            }
        }
    }

    #[test]
    fn display_parse_roundtrip() {
        let vals = [
            I256::ZERO,
            I256::from_i128(-123456789),
            I256::from_u128(u128::MAX).shl(100),
            I256::from_i128(-3).shl(170),
        ];
        for &v in &vals {
            let s = v.to_string();
            assert_eq!(s, v.to_bigint().to_string());
            let back: I256 = s.parse().unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn ordering_matches_bigint() {
        let vals = [
            I256::from_i128(-5).shl(130),
            I256::from_i128(-5),
            I256::ZERO,
            I256::from_i128(3),
            I256::from_i128(3).shl(130),
        ];
        for (i, &a) in vals.iter().enumerate() {
            for (j, &b) in vals.iter().enumerate() {
                assert_eq!(a.cmp(&b), i.cmp(&j), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn to_f64_correctly_rounded() {
        let v = I256::ONE.shl(80) + I256::ONE.shl(20);
        assert_eq!(v.to_f64(), 2f64.powi(80) + 2f64.powi(20));
        // 2^80 + 1 rounds down to 2^80.
        let v = I256::ONE.shl(80) + I256::ONE;
        assert_eq!(v.to_f64(), 2f64.powi(80));
        // Ties to even.
        let v = I256::ONE.shl(54) + I256::ONE.shl(1);
        assert_eq!(v.to_f64(), 2f64.powi(54));
        let v = I256::ONE.shl(54) + I256::from(6i64);
        assert_eq!(v.to_f64(), 2f64.powi(54) + 8.0);
        assert_eq!(I256::from(-12345i64).to_f64(), -12345.0);
    }

    #[test]
    fn log2_abs_accuracy() {
        let v = I256::from(3i64).shl(140);
        let expect = 3f64.log2() + 140.0;
        assert!((v.log2_abs() - expect).abs() < 1e-12);
        assert_eq!(I256::ZERO.log2_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn euclid_division() {
        let v = I256::from_i128(-7);
        let (q, r) = v.div_rem_euclid_u64(3);
        assert_eq!((q.to_f64(), r), (-3.0, 2));
        let v = I256::from_i128(7);
        let (q, r) = v.div_rem_euclid_u64(3);
        assert_eq!((q.to_f64(), r), (2.0, 1));
        let big = I256::from_u128(u128::MAX).shl(90);
        let (q, r) = big.div_rem_euclid_u64(97);
        assert_eq!(q.to_bigint() * 97 + r, big.to_bigint());
    }
}
