//! Exact fixed-point reals on the grid `k * 2^-F`.
//!
//! Ground states of an n-number instance sit near `2^-n`, so computing
//! `<sigma, X>` in f64 loses them to cancellation well before n = 50. All
//! instance coordinates are therefore quantized once onto a dyadic grid and
//! every inner product is an exact integer sum; comparisons between energies
//! of the same instance are exact integer comparisons.

use std::fmt;

use crate::wide::I256;

/// Default number of fractional bits.
pub const DEFAULT_FRAC_BITS: u32 = 128;

/// Largest admissible number of fractional bits: a sum of 2^20 terms of
/// magnitude below 2^20 must still fit in 254 bits.
pub const MAX_FRAC_BITS: u32 = 200;

/// Inputs to quantization must satisfy |v| < 2^20.
pub const MAX_ABS_INPUT: f64 = (1u64 << 20) as f64;

/// A real number `num * 2^-F`. The fractional-bit count `F` is carried by
/// the containing [`crate::instance::Instance`], not by each scalar.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FixedReal {
    num: I256,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixedError {
    #[error("value {0} is not finite")]
    NotFinite(String),
    #[error("|value| must be below 2^20, got {0}")]
    TooLarge(String),
    #[error("frac_bits must be in 1..={MAX_FRAC_BITS}, got {0}")]
    BadFracBits(u32),
}

impl FixedReal {
    pub const ZERO: FixedReal = FixedReal { num: I256::ZERO };

    pub const fn from_numerator(num: I256) -> Self {
        FixedReal { num }
    }

    pub const fn numerator(self) -> I256 {
        self.num
    }

    pub fn is_zero(self) -> bool {
        self.num.is_zero()
    }

    /// Round `v` to the nearest grid point, ties to even. Exact: an f64 is
    /// `m * 2^e` with a 53-bit integer `m`, so the only rounding is the
    /// half-to-even shift when `e + F < 0`.
    pub fn quantize(v: f64, frac_bits: u32) -> Result<Self, FixedError> {
        check_frac_bits(frac_bits)?;
        if !v.is_finite() {
            return Err(FixedError::NotFinite(format!("{v}")));
        }
        if v.abs() >= MAX_ABS_INPUT {
            return Err(FixedError::TooLarge(format!("{v}")));
        }
        if v == 0.0 {
            return Ok(FixedReal::ZERO);
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let s = e + frac_bits as i32;
        let mag = if s >= 0 {
            I256::from_u128(m as u128).shl(s as u32)
        } else {
            let sh = (-s) as u32;
            if sh >= 128 {
                I256::ZERO
            } else {
                let m = m as u128;
                let q = m >> sh;
                let rem = m & ((1u128 << sh) - 1);
                let half = 1u128 << (sh - 1);
                let up = rem > half || (rem == half && q & 1 == 1);
                I256::from_u128(q + up as u128)
            }
        };
        Ok(FixedReal {
            num: if neg { -mag } else { mag },
        })
    }

    /// Nearest f64, correctly rounded. Exact whenever the numerator fits in
    /// 53 bits, which makes quantize(dequantize) the identity there.
    pub fn to_f64(self, frac_bits: u32) -> f64 {
        ldexp2(self.num.to_f64(), -(frac_bits as i32))
    }

    pub fn abs(self) -> Self {
        FixedReal {
            num: self.num.abs(),
        }
    }

    pub fn log2_abs(self, frac_bits: u32) -> f64 {
        self.num.log2_abs() - frac_bits as f64
    }
}

pub(crate) fn check_frac_bits(frac_bits: u32) -> Result<(), FixedError> {
    if frac_bits == 0 || frac_bits > MAX_FRAC_BITS {
        Err(FixedError::BadFracBits(frac_bits))
    } else {
        Ok(())
    }
}

/// `v * 2^e` without precision loss for the exponent range used here.
pub(crate) fn ldexp2(v: f64, e: i32) -> f64 {
    // Split to stay clear of overflow/underflow at intermediate steps.
    let half = e / 2;
    v * pow2f(half) * pow2f(e - half)
}

fn pow2f(e: i32) -> f64 {
    debug_assert!((-1022..1024).contains(&e));
    f64::from_bits(((1023 + e) as u64) << 52)
}

impl std::ops::Add for FixedReal {
    type Output = FixedReal;
    fn add(self, rhs: Self) -> Self {
        FixedReal {
            num: self.num + rhs.num,
        }
    }
}

impl std::ops::Sub for FixedReal {
    type Output = FixedReal;
    fn sub(self, rhs: Self) -> Self {
        FixedReal {
            num: self.num - rhs.num,
        }
    }
}

impl std::ops::Neg for FixedReal {
    type Output = FixedReal;
    fn neg(self) -> Self {
        FixedReal { num: -self.num }
    }
}

impl fmt::Display for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.num, f)
    }
}

impl fmt::Debug for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedReal({})", self.num)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        let q = FixedReal::quantize(0.5, 1).unwrap();
        assert_eq!(q.numerator(), I256::ONE);
        // f64(1/3) * 4 = 1.333..., nearest integer 1.
        let q = FixedReal::quantize(1.0 / 3.0, 2).unwrap();
        assert_eq!(q.numerator(), I256::ONE);
        let q = FixedReal::quantize(-1.5, 4).unwrap();
        assert_eq!(q.numerator(), I256::from(-24i64));
    }

    #[test]
    fn ties_round_to_even() {
        // 0.5 ulp ties at F=0 grid.
        assert_eq!(
            FixedReal::quantize(0.5, 1).unwrap().numerator(),
            I256::ONE
        );
        // 0.25 at F=1: exactly half a grid step -> rounds to even (0).
        assert_eq!(
            FixedReal::quantize(0.25, 1).unwrap().numerator(),
            I256::ZERO
        );
        // 0.75 at F=1: half step between 1 and 2 -> rounds to 2.
        assert_eq!(
            FixedReal::quantize(0.75, 1).unwrap().numerator(),
            I256::from(2i64)
        );
    }

    #[test]
    fn exact_dyadics_are_preserved() {
        for &v in &[1.5, 0.5, -0.25, 0.75, -1024.0, 3.0e-5_f64] {
            let q = FixedReal::quantize(v, DEFAULT_FRAC_BITS).unwrap();
            let back = q.to_f64(DEFAULT_FRAC_BITS);
            // All f64 with |v| < 2^20 are exactly on the 2^-128 grid.
            assert_eq!(back, v, "{v}");
        }
    }

    #[test]
    fn addition_is_exact() {
        let f = DEFAULT_FRAC_BITS;
        let a = FixedReal::quantize(1.5, f).unwrap();
        let b = FixedReal::quantize(0.5, f).unwrap();
        let c = FixedReal::quantize(-0.25, f).unwrap();
        let d = FixedReal::quantize(0.75, f).unwrap();
        // 1.5 - 0.5 + (-0.25) - 0.75 = 0, exactly.
        let sum = a - b + c - d;
        assert!(sum.is_zero());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(FixedReal::quantize(f64::NAN, 128).is_err());
        assert!(FixedReal::quantize(2e6, 128).is_err());
        assert!(FixedReal::quantize(1.0, 0).is_err());
        assert!(FixedReal::quantize(1.0, 201).is_err());
    }
}
