//! Binary fixed-point logarithms over big integers.
//!
//! A [`Fixed`] holds `value * 2^FRAC_BITS`. All transcendental constants and
//! integer logarithms are computed with `GUARD_BITS` extra bits and then
//! truncated, so each primitive is within a few units in the last place.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

pub const FRAC_BITS: u32 = 256;
const GUARD_BITS: u32 = 64;
const WORK_BITS: u32 = FRAC_BITS + GUARD_BITS;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn from_int(v: u64) -> Self {
        Fixed(BigInt::from(v) << FRAC_BITS)
    }

    pub fn raw(&self) -> &BigInt {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        let shift = FRAC_BITS - 60;
        let top = (&self.0 >> shift).to_f64().unwrap_or(f64::NAN);
        top / 2f64.powi(60)
    }

    /// Compare against an integer without rounding.
    pub fn cmp_int(&self, v: u64) -> Ordering {
        self.0.cmp(&(BigInt::from(v) << FRAC_BITS))
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl Mul<u64> for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: u64) -> Fixed {
        Fixed(self.0 * BigInt::from(rhs))
    }
}

/// `ln 2 = sum_{k >= 1} 1 / (k 2^k)` at `WORK_BITS`.
fn ln2_work() -> BigInt {
    let mut acc = BigInt::zero();
    for k in 1..=(WORK_BITS + 8) {
        let term = (BigInt::one() << (WORK_BITS - k.min(WORK_BITS))) / BigInt::from(k);
        if term.is_zero() {
            break;
        }
        acc += term;
    }
    acc
}

/// `log2(e) = 1 / ln 2`.
pub fn log2_e() -> Fixed {
    static CELL: OnceLock<Fixed> = OnceLock::new();
    CELL.get_or_init(|| {
        let inv = (BigInt::one() << (2 * WORK_BITS)) / ln2_work();
        Fixed(inv >> GUARD_BITS)
    })
    .clone()
}

/// `log2(x)` for a positive integer by repeated squaring of the mantissa.
pub fn log2_uint(x: &BigUint) -> Fixed {
    assert!(!x.is_zero(), "log2 of zero");
    let e = x.bits() - 1;
    let one = BigUint::one() << WORK_BITS;
    let two = &one << 1u32;
    // mantissa in [1, 2) scaled by 2^WORK_BITS
    let mut y = if e as u32 <= WORK_BITS {
        x << (WORK_BITS - e as u32)
    } else {
        x >> (e as u32 - WORK_BITS)
    };
    let mut frac = BigUint::zero();
    for i in 1..=WORK_BITS {
        y = (&y * &y) >> WORK_BITS;
        if y >= two {
            y >>= 1u32;
            frac |= BigUint::one() << (WORK_BITS - i);
        }
    }
    let value = (BigUint::from(e) << WORK_BITS) + frac;
    Fixed(BigInt::from_biguint(Sign::Plus, value >> GUARD_BITS))
}

pub fn log2_u64(x: u64) -> Fixed {
    log2_uint(&BigUint::from(x))
}
