use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::FieldContext;
use crate::error::{Error, Result};

/// An element `a · p^(-k)` of `Z[1/p]`.
///
/// Canonical form: `a = 0` forces `k = 0`, otherwise `p ∤ a`. In canonical
/// form `ord(x) = -k` and `|x|_p = p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    ctx: FieldContext,
    num: BigInt,
    scale: i64,
}

/// Value of the additive character `χ_p(x) = exp(2πi {x}_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    /// `{x}_p`, an exact rational in `[0, 1)`.
    pub phase: BigRational,
    pub value: Complex64,
}

impl PAdicScalar {
    pub fn new(ctx: FieldContext, num: impl Into<BigInt>, scale: i64) -> Self {
        let mut num = num.into();
        let mut scale = scale;
        if num.is_zero() {
            return PAdicScalar { ctx, num, scale: 0 };
        }
        let p = ctx.p_big();
        loop {
            let (q, r) = num.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            num = q;
            scale -= 1;
        }
        PAdicScalar { ctx, num, scale }
    }

    pub fn zero(ctx: FieldContext) -> Self {
        PAdicScalar::new(ctx, 0, 0)
    }

    pub fn one(ctx: FieldContext) -> Self {
        PAdicScalar::new(ctx, 1, 0)
    }

    pub fn from_int(ctx: FieldContext, n: i64) -> Self {
        PAdicScalar::new(ctx, n, 0)
    }

    /// `p^e`.
    pub fn pow_p(ctx: FieldContext, e: i64) -> Self {
        PAdicScalar::new(ctx, 1, -e)
    }

    /// Builds `num / den`; `den` must be (up to sign) a power of `p`.
    pub fn from_ratio(ctx: FieldContext, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let num = num.into();
        let den = den.into();
        let bad = || Error::ParseScalar {
            input: format!("{num}/{den}"),
            reason: format!("denominator is not a power of {}", ctx.p()),
        };
        if den.is_zero() {
            return Err(bad());
        }
        let sign = if den.is_negative() { -1 } else { 1 };
        let mut d = den.abs();
        let p = ctx.p_big();
        let mut k = 0i64;
        while d > BigInt::one() {
            let (q, r) = d.div_rem(&p);
            if !r.is_zero() {
                return Err(bad());
            }
            d = q;
            k += 1;
        }
        Ok(PAdicScalar::new(ctx, num * sign, k))
    }

    pub fn from_rational(ctx: FieldContext, x: &BigRational) -> Result<Self> {
        PAdicScalar::from_ratio(ctx, x.numer().clone(), x.denom().clone())
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// The exponent `k` in `a · p^(-k)`.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `ord_p(x)`; `None` for zero.
    pub fn order(&self) -> Option<i64> {
        (!self.is_zero()).then_some(-self.scale)
    }

    /// `log_p |x|_p`; `None` for zero.
    pub fn norm_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.scale)
    }

    /// `|x|_p` exactly.
    pub fn norm(&self) -> BigRational {
        if self.is_zero() {
            BigRational::zero()
        } else {
            self.ctx.pow_rational(self.scale)
        }
    }

    /// Whether `x ∈ Z_p`.
    pub fn is_integral(&self) -> bool {
        self.is_zero() || self.scale <= 0
    }

    /// `|x|_p <= p^e`.
    pub fn norm_at_most(&self, e: i64) -> bool {
        self.is_zero() || self.scale <= e
    }

    /// The rational number this scalar represents.
    pub fn to_rational(&self) -> BigRational {
        let p = self.ctx.p_big();
        if self.scale >= 0 {
            BigRational::new(self.num.clone(), p.pow(self.scale as u32))
        } else {
            BigRational::from_integer(&self.num * p.pow((-self.scale) as u32))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// `{x}_p ∈ [0, 1)`: for `k > 0` this is `(a mod p^k) / p^k`, else 0.
    pub fn frac_part(&self) -> BigRational {
        if self.is_integral() {
            return BigRational::zero();
        }
        let modulus = self.ctx.p_big().pow(self.scale as u32);
        BigRational::new(self.num.mod_floor(&modulus), modulus)
    }

    /// `{x}_p` as a scalar: the canonical representative of `x + Z_p`.
    pub fn frac_scalar(&self) -> PAdicScalar {
        if self.is_integral() {
            return PAdicScalar::zero(self.ctx);
        }
        let modulus = self.ctx.p_big().pow(self.scale as u32);
        PAdicScalar::new(self.ctx, self.num.mod_floor(&modulus), self.scale)
    }

    pub fn character(&self) -> Character {
        let phase = self.frac_part();
        let value = phase_to_unit(&phase);
        Character { phase, value }
    }

    /// `x · p^e`.
    pub fn mul_pow_p(&self, e: i64) -> PAdicScalar {
        if self.is_zero() {
            return self.clone();
        }
        PAdicScalar {
            ctx: self.ctx,
            num: self.num.clone(),
            scale: self.scale - e,
        }
    }

    pub fn mul_int(&self, n: i64) -> PAdicScalar {
        PAdicScalar::new(self.ctx, &self.num * n, self.scale)
    }

    pub fn try_add(&self, other: &PAdicScalar) -> Result<PAdicScalar> {
        self.ctx.check_same(other.ctx)?;
        let k = self.scale.max(other.scale);
        let p = self.ctx.p_big();
        let lift = |x: &PAdicScalar| &x.num * p.pow((k - x.scale) as u32);
        Ok(PAdicScalar::new(self.ctx, lift(self) + lift(other), k))
    }

    pub fn try_sub(&self, other: &PAdicScalar) -> Result<PAdicScalar> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &PAdicScalar) -> Result<PAdicScalar> {
        self.ctx.check_same(other.ctx)?;
        Ok(PAdicScalar::new(
            self.ctx,
            &self.num * &other.num,
            self.scale + other.scale,
        ))
    }

    pub fn parse_with(ctx: FieldContext, s: &str) -> Result<PAdicScalar> {
        let x: PAdicScalar = s.parse()?;
        if x.ctx != ctx && !x.is_zero() {
            return Err(Error::ContextMismatch {
                left: ctx.p(),
                right: x.ctx.p(),
            });
        }
        Ok(PAdicScalar::new(ctx, x.num, x.scale))
    }

    /// Accepts `"a/p^k"` as well as a plain rational `"a/b"` or integer.
    pub fn parse_any(ctx: FieldContext, s: &str) -> Result<PAdicScalar> {
        if s.contains('^') {
            return PAdicScalar::parse_with(ctx, s);
        }
        let q: BigRational = s
            .trim()
            .parse()
            .map_err(|e: num_rational::ParseRatioError| Error::ParseScalar {
                input: s.to_string(),
                reason: e.to_string(),
            })?;
        PAdicScalar::from_rational(ctx, &q)
    }
}

/// `exp(2πi·phase)` for an exact rational phase.
pub(crate) fn phase_to_unit(phase: &BigRational) -> Complex64 {
    if phase.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    let reduced = phase.numer().mod_floor(phase.denom());
    let turns = BigRational::new(reduced, phase.denom().clone()).to_f64().unwrap_or(0.0);
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns)
}

impl Neg for &PAdicScalar {
    type Output = PAdicScalar;
    fn neg(self) -> PAdicScalar {
        PAdicScalar {
            ctx: self.ctx,
            num: -&self.num,
            scale: self.scale,
        }
    }
}

impl Neg for PAdicScalar {
    type Output = PAdicScalar;
    fn neg(self) -> PAdicScalar {
        -&self
    }
}

macro_rules! checked_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        /// Panics on a context mismatch; use the `try_` method for a fallible
        /// variant.
        impl $trait<&PAdicScalar> for &PAdicScalar {
            type Output = PAdicScalar;
            fn $method(self, rhs: &PAdicScalar) -> PAdicScalar {
                self.$checked(rhs).expect("p-adic field context mismatch")
            }
        }

        impl $trait<PAdicScalar> for PAdicScalar {
            type Output = PAdicScalar;
            fn $method(self, rhs: PAdicScalar) -> PAdicScalar {
                (&self).$method(&rhs)
            }
        }
    };
}

checked_binop!(Add, add, try_add);
checked_binop!(Sub, sub, try_sub);
checked_binop!(Mul, mul, try_mul);

impl PartialOrd for PAdicScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by prime, then by the rational value.
impl Ord for PAdicScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ctx
            .cmp(&other.ctx)
            .then_with(|| self.to_rational().cmp(&other.to_rational()))
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.num, self.ctx.p(), self.scale)
    }
}

impl FromStr for PAdicScalar {
    type Err = Error;

    /// Parses the exact form `a/p^k`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseScalar {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (a, rest) = s.trim().split_once('/').ok_or_else(|| err("expected a/p^k"))?;
        let (p, k) = rest.split_once('^').ok_or_else(|| err("expected a/p^k"))?;
        let a: BigInt = a.trim().parse().map_err(|_| err("numerator is not an integer"))?;
        let p: u64 = p.trim().parse().map_err(|_| err("prime is not an integer"))?;
        let k: i64 = k.trim().parse().map_err(|_| err("exponent is not an integer"))?;
        let ctx = FieldContext::new(p)?;
        Ok(PAdicScalar::new(ctx, a, k))
    }
}

impl Serialize for PAdicScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PAdicScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point of `Q_p^3` with terminating coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PAdicVec3(pub [PAdicScalar; 3]);

impl PAdicVec3 {
    pub fn new(x1: PAdicScalar, x2: PAdicScalar, x3: PAdicScalar) -> Self {
        PAdicVec3([x1, x2, x3])
    }

    pub fn zero(ctx: FieldContext) -> Self {
        let z = PAdicScalar::zero(ctx);
        PAdicVec3([z.clone(), z.clone(), z])
    }

    pub fn ctx(&self) -> FieldContext {
        self.0[0].ctx()
    }

    /// `log_p ‖x‖_p` (max over coordinates); `None` for the origin.
    pub fn norm_exponent(&self) -> Option<i64> {
        self.0.iter().filter_map(PAdicScalar::norm_exponent).max()
    }

    pub fn norm(&self) -> BigRational {
        self.0
            .iter()
            .map(PAdicScalar::norm)
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn try_add(&self, other: &PAdicVec3) -> Result<PAdicVec3> {
        Ok(PAdicVec3([
            self.0[0].try_add(&other.0[0])?,
            self.0[1].try_add(&other.0[1])?,
            self.0[2].try_add(&other.0[2])?,
        ]))
    }

    pub fn try_sub(&self, other: &PAdicVec3) -> Result<PAdicVec3> {
        Ok(PAdicVec3([
            self.0[0].try_sub(&other.0[0])?,
            self.0[1].try_sub(&other.0[1])?,
            self.0[2].try_sub(&other.0[2])?,
        ]))
    }
}
