//! Energies `H(sigma, X) = |<sigma, X>| / sqrt(n)` and exact thresholds.
//!
//! The irrational `sqrt(n)` divisor is never materialized: an [`Energy`]
//! stores the exact integer numerator of `|<sigma, X>|` on the instance
//! grid, so energies of the same instance compare as integers. Thresholds
//! `H <= t` are folded the same way by precomputing the largest grid
//! numerator `B = floor(sqrt(n) * t * 2^F)`; then `H <= t  <=>  num <= B`,
//! exactly, because `num <= floor(sqrt(x))` iff `num^2 <= x`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;

use crate::fixed::{ldexp2, FixedReal};
use crate::wide::I256;
use crate::CoreError;

/// Exact Hamiltonian value of one partition on one instance.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Energy {
    /// |<sigma, X>| as a grid numerator; the sqrt(n) divisor is symbolic.
    num: I256,
    n: u32,
    frac_bits: u32,
}

impl Energy {
    pub fn from_inner_product(ip: I256, n: u32, frac_bits: u32) -> Self {
        Energy {
            num: ip.abs(),
            n,
            frac_bits,
        }
    }

    pub fn numerator(self) -> I256 {
        self.num
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    pub fn is_zero(self) -> bool {
        self.num.is_zero()
    }

    /// log2 of the exact fixed-point value |<sigma, X>| (no sqrt(n));
    /// -inf when the value is zero.
    pub fn log2_value(self) -> f64 {
        self.num.log2_abs() - self.frac_bits as f64
    }

    /// log2 of the reported Hamiltonian |<sigma, X>| / sqrt(n).
    pub fn log2_hamiltonian(self) -> f64 {
        self.log2_value() - 0.5 * (self.n as f64).log2()
    }

    /// The Hamiltonian as a plain f64, for reporting.
    pub fn hamiltonian(self) -> f64 {
        ldexp2(self.num.to_f64(), -(self.frac_bits as i32)) / (self.n as f64).sqrt()
    }

    pub fn value(self) -> FixedReal {
        FixedReal::from_numerator(self.num)
    }

    pub fn le(self, thr: &Threshold) -> bool {
        assert_eq!((self.n, self.frac_bits), (thr.n, thr.frac_bits));
        self.num <= thr.num
    }
}

impl PartialOrd for Energy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Energy {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(
            (self.n, self.frac_bits),
            (other.n, other.frac_bits),
            "energies compare exactly only on a common instance shape"
        );
        self.num.cmp(&other.num)
    }
}

impl fmt::Debug for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Energy(log2 H = {:.4})", self.log2_hamiltonian())
    }
}

/// Conditioning bound multiplier for the planted event; the sqrt(2) variant
/// keeps the squared bound rational so the comparison stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMultiplier {
    #[default]
    One,
    Sqrt2,
}

impl BoundMultiplier {
    pub fn squared(self) -> u32 {
        match self {
            BoundMultiplier::One => 1,
            BoundMultiplier::Sqrt2 => 2,
        }
    }
}

/// An upper bound on the Hamiltonian, reduced to a grid numerator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Threshold {
    num: I256,
    n: u32,
    frac_bits: u32,
}

impl Threshold {
    pub fn numerator(self) -> I256 {
        self.num
    }

    /// Accepts everything.
    pub fn infinite(n: u32, frac_bits: u32) -> Self {
        Threshold {
            num: I256::MAX,
            n,
            frac_bits,
        }
    }

    /// `H <= 2^e` for integer `e`; exact via integer square root.
    pub fn pow2(n: u32, frac_bits: u32, e: i64) -> Result<Self, CoreError> {
        let shift = 2 * frac_bits as i64 + 2 * e;
        if shift < 0 {
            // Threshold below one grid step: only H = 0 passes.
            return Ok(Threshold {
                num: I256::ZERO,
                n,
                frac_bits,
            });
        }
        let x = BigInt::from(n) << shift as u64;
        Ok(Threshold {
            num: isqrt_to_i256(&x)?,
            n,
            frac_bits,
        })
    }

    /// `H <= 2^log2_t`. Integer exponents take the exact route; otherwise
    /// the bound is the deterministic f64 evaluation, floored to the grid.
    pub fn from_log2(n: u32, frac_bits: u32, log2_t: f64) -> Result<Self, CoreError> {
        if log2_t.is_infinite() && log2_t > 0.0 {
            return Ok(Threshold::infinite(n, frac_bits));
        }
        if !log2_t.is_finite() {
            return Err(CoreError::BadThreshold(log2_t));
        }
        if log2_t.fract() == 0.0 && log2_t.abs() < 2f64.powi(40) {
            return Threshold::pow2(n, frac_bits, log2_t as i64);
        }
        let y = 0.5 * (n as f64).log2() + frac_bits as f64 + log2_t;
        Ok(Threshold {
            num: floor_exp2(y),
            n,
            frac_bits,
        })
    }

    /// `H <= mult * C^-n`, the planting bound. Integer bases get an exact
    /// bound via big-integer arithmetic; other bases use the deterministic
    /// f64 route.
    pub fn planting_bound(
        n: u32,
        frac_bits: u32,
        base_c: f64,
        mult: BoundMultiplier,
    ) -> Result<Self, CoreError> {
        if !(base_c > 2.0) || !base_c.is_finite() {
            return Err(CoreError::BadBase(base_c));
        }
        if base_c.fract() == 0.0 && base_c <= 64.0 {
            let c = BigInt::from(base_c as u64);
            let x = (BigInt::from(n) * mult.squared() << (2 * frac_bits as u64))
                / c.pow(2 * n);
            Ok(Threshold {
                num: isqrt_to_i256(&x)?,
                n,
                frac_bits,
            })
        } else {
            let log2_t =
                -(n as f64) * base_c.log2() + 0.5 * (mult.squared() as f64).log2();
            let y = 0.5 * (n as f64).log2() + frac_bits as f64 + log2_t;
            Ok(Threshold {
                num: floor_exp2(y),
                n,
                frac_bits,
            })
        }
    }

    /// Threshold passing exactly the energies `<= e`.
    pub fn from_energy(e: Energy) -> Self {
        Threshold {
            num: e.numerator(),
            n: e.n(),
            frac_bits: e.frac_bits(),
        }
    }
}

fn isqrt_to_i256(x: &BigInt) -> Result<I256, CoreError> {
    let r = x.sqrt();
    I256::try_from_bigint(&r).ok_or(CoreError::ThresholdOverflow)
}

/// floor(2^y) as an integer, built from the f64 mantissa of 2^frac(y).
fn floor_exp2(y: f64) -> I256 {
    if y < 0.0 {
        return I256::ZERO;
    }
    let k = y.floor();
    let frac = y - k;
    // m in [2^52, 2^53): 53-bit mantissa of 2^frac.
    let m = (frac.exp2() * 2f64.powi(52)) as u128;
    let k = k as i64 - 52;
    if k >= 0 {
        I256::from_u128(m).shl(k as u32)
    } else if k <= -128 {
        I256::ZERO
    } else {
        I256::from_u128(m >> (-k) as u32)
    }
}
