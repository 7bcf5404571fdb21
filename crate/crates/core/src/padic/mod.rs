//! Exact arithmetic on terminating p-adic numbers, i.e. the ring `Z[1/p]`
//! inside `Q_p`, together with balls, polydiscs and their Haar measure.

mod ball;
mod scalar;

pub use ball::{haar_measure, Ball1D, BallRelation, Polydisc3};
pub use scalar::{Character, PAdicScalar, PAdicVec3};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The prime `p` every scalar, index and state is tied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FieldContext {
    p: u32,
}

impl FieldContext {
    /// Validates `p` with a deterministic primality test. Only `p < 2^32` is
    /// accepted.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p > u64::from(u32::MAX) {
            return Err(Error::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldContext { p: p as u32 })
    }

    pub fn p(self) -> u32 {
        self.p
    }

    pub fn p_big(self) -> BigInt {
        BigInt::from(self.p)
    }

    pub fn p_f64(self) -> f64 {
        f64::from(self.p)
    }

    /// `p^e` as an exact rational, any sign of `e`.
    pub fn pow_rational(self, e: i64) -> BigRational {
        let base = BigInt::from(self.p).pow(e.unsigned_abs() as u32);
        if e >= 0 {
            BigRational::from_integer(base)
        } else {
            BigRational::new(BigInt::one(), base)
        }
    }

    /// `p^e` as a float.
    pub fn pow_f64(self, e: i64) -> f64 {
        self.p_f64().powi(e as i32)
    }

    /// `p^(e/2)` as a float.
    pub fn pow_half_f64(self, half_exponent: i64) -> f64 {
        if half_exponent % 2 == 0 {
            self.pow_f64(half_exponent / 2)
        } else {
            self.p_f64().sqrt() * self.pow_f64((half_exponent - 1) / 2)
        }
    }

    pub(crate) fn check_same(self, other: FieldContext) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: self.p,
                right: other.p,
            })
        }
    }
}

impl<'de> Deserialize<'de> for FieldContext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        FieldContext::new(p).map_err(serde::de::Error::custom)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Formats an exact rational as `a/b`, always with an explicit denominator.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}
