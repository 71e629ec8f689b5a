//! Scalar types the opinion flow can be integrated in.
//!
//! `f64` is the working type. [`BigFixed`] is a binary fixed-point number with
//! `BITS` fractional bits, for trajectories that sit on an unstable invariant
//! set and are destroyed by double-precision rounding within a few dozen time
//! units.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + PartialOrd + std::fmt::Debug {
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn is_finite(&self) -> bool;

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn neg(&self) -> Self {
        Self::zero().sub(self)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    #[inline]
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    #[inline]
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    #[inline]
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    #[inline]
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    #[inline]
    fn neg(&self) -> Self {
        -self
    }
}

/// `value = mantissa · 2^-BITS`. Products are truncated toward negative infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BigFixed<const BITS: u32>(BigInt);

impl<const BITS: u32> BigFixed<BITS> {
    pub fn mantissa(&self) -> &BigInt {
        &self.0
    }
}

impl<const BITS: u32> Scalar for BigFixed<BITS> {
    /// Exact for every finite double whose binary expansion fits in `BITS` fractional bits.
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot represent {x} in fixed point");
        if x == 0.0 {
            return BigFixed(BigInt::zero());
        }
        let bits = x.to_bits();
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exponent == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1u64 << 52), exponent - 1075)
        };
        let mut m = BigInt::from(mantissa);
        let shift = exp + BITS as i64;
        m = if shift >= 0 { m << shift as usize } else { m >> (-shift) as usize };
        BigFixed(if x < 0.0 { -m } else { m })
    }

    fn to_f64(&self) -> f64 {
        let len = self.0.bits() as i64;
        // keep 64 significant bits before converting
        let drop = (len - 64).max(0);
        let top = (&self.0 >> drop as usize).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi((drop - BITS as i64) as i32)
    }

    fn zero() -> Self {
        BigFixed(BigInt::zero())
    }

    fn add(&self, other: &Self) -> Self {
        BigFixed(&self.0 + &other.0)
    }

    fn sub(&self, other: &Self) -> Self {
        BigFixed(&self.0 - &other.0)
    }

    fn mul(&self, other: &Self) -> Self {
        BigFixed((&self.0 * &other.0) >> BITS as usize)
    }

    fn abs(&self) -> Self {
        BigFixed(self.0.abs())
    }

    fn sqrt(&self) -> Self {
        assert!(!self.0.is_negative(), "square root of a negative fixed-point value");
        BigFixed((&self.0 << BITS as usize).sqrt())
    }

    fn is_finite(&self) -> bool {
        true
    }
}
