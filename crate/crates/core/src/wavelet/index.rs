use std::cmp::Ordering;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{Ball1D, FieldContext, PAdicScalar, PAdicVec3, Polydisc3};
use crate::spinor::FrequencyMagnitude;

/// `(r, n, j)` labelling `ψ_{rnj}(x) = p^(-r/2) χ(p^(-1) j (p^r x - n)) Ω(|p^r x - n|_p)`.
///
/// `n` is always the canonical fractional representative, so `{n}_p = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WaveletIndex1D {
    r: i64,
    n: PAdicScalar,
    j: u32,
}

impl WaveletIndex1D {
    pub fn new(r: i64, n: PAdicScalar, j: u32) -> Result<Self> {
        let p = n.ctx().p();
        if j == 0 || j >= p {
            return Err(Error::InvalidIndex(format!("j = {j} must lie in 1..={}", p - 1)));
        }
        if n.frac_scalar() != n {
            return Err(Error::InvalidIndex(format!(
                "n = {n} is not a canonical representative of Q_p/Z_p"
            )));
        }
        Ok(WaveletIndex1D { r, n, j })
    }

    /// Shorthand for `n = 0`.
    pub fn at_origin(ctx: FieldContext, r: i64, j: u32) -> Result<Self> {
        WaveletIndex1D::new(r, PAdicScalar::zero(ctx), j)
    }

    pub fn ctx(&self) -> FieldContext {
        self.n.ctx()
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn n(&self) -> &PAdicScalar {
        &self.n
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    /// `p^(-r) n + p^(-r) Z_p`.
    pub fn support(&self) -> Ball1D {
        Ball1D::new(self.n.mul_pow_p(-self.r), self.r)
    }

    /// The wavelet is constant on every ball of this radius exponent.
    pub fn constancy_radius(&self) -> i64 {
        self.r - 1
    }

    pub fn eval(&self, x: &PAdicScalar) -> Complex64 {
        let y = &x.mul_pow_p(self.r) - &self.n;
        if !y.is_integral() {
            return Complex64::new(0.0, 0.0);
        }
        let phase = y.mul_int(i64::from(self.j)).mul_pow_p(-1).character().value;
        phase * self.ctx().pow_half_f64(-self.r)
    }

    /// Taibleson–Vladimirov eigenvalue `p^(1-r)`.
    pub fn tv_eigenvalue(&self) -> BigRational {
        self.ctx().pow_rational(1 - self.r)
    }

    /// Index of the complex conjugate wavelet, `j -> p - j`.
    pub fn conjugate(&self) -> WaveletIndex1D {
        WaveletIndex1D {
            r: self.r,
            n: self.n.clone(),
            j: self.ctx().p() - self.j,
        }
    }

    fn sort_key(&self) -> (i64, &PAdicScalar, u32) {
        (self.r, &self.n, self.j)
    }
}

impl PartialOrd for WaveletIndex1D {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WaveletIndex1D {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

#[derive(Deserialize)]
struct Raw1D {
    r: i64,
    n: PAdicScalar,
    j: u32,
}

impl<'de> Deserialize<'de> for WaveletIndex1D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Raw1D::deserialize(d)?;
        WaveletIndex1D::new(raw.r, raw.n, raw.j).map_err(serde::de::Error::custom)
    }
}

/// Product of three axis wavelets.
///
/// Ordered lexicographically by `(r1, r2, r3, n1, n2, n3, j1, j2, j3)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WaveletIndex3D {
    axes: [WaveletIndex1D; 3],
}

impl WaveletIndex3D {
    pub fn new(axes: [WaveletIndex1D; 3]) -> Result<Self> {
        axes[0].ctx().check_same(axes[1].ctx())?;
        axes[0].ctx().check_same(axes[2].ctx())?;
        Ok(WaveletIndex3D { axes })
    }

    /// Builds an index from separate `r`, `n`, `j` triples.
    pub fn from_parts(r: [i64; 3], n: [PAdicScalar; 3], j: [u32; 3]) -> Result<Self> {
        let [n1, n2, n3] = n;
        WaveletIndex3D::new([
            WaveletIndex1D::new(r[0], n1, j[0])?,
            WaveletIndex1D::new(r[1], n2, j[1])?,
            WaveletIndex1D::new(r[2], n3, j[2])?,
        ])
    }

    /// Index with `n = 0` on every axis.
    pub fn at_origin(ctx: FieldContext, r: [i64; 3], j: [u32; 3]) -> Result<Self> {
        let zero = PAdicScalar::zero(ctx);
        WaveletIndex3D::from_parts(r, [zero.clone(), zero.clone(), zero], j)
    }

    pub fn ctx(&self) -> FieldContext {
        self.axes[0].ctx()
    }

    pub fn axes(&self) -> &[WaveletIndex1D; 3] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &WaveletIndex1D {
        &self.axes[i]
    }

    pub fn r(&self) -> [i64; 3] {
        [self.axes[0].r, self.axes[1].r, self.axes[2].r]
    }

    pub fn j(&self) -> [u32; 3] {
        [self.axes[0].j, self.axes[1].j, self.axes[2].j]
    }

    pub fn support(&self) -> Polydisc3 {
        Polydisc3::from_axes_unchecked([0, 1, 2].map(|i| self.axes[i].support()))
    }

    /// `|q_i|_p = p^(1 - r_i)` on the Fourier support.
    pub fn frequency(&self) -> FrequencyMagnitude {
        FrequencyMagnitude::from_scales(self.ctx(), self.r())
    }

    pub fn eval(&self, x: &PAdicVec3) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (idx, xi) in self.axes.iter().zip(x.0.iter()) {
            let v = idx.eval(xi);
            if v == Complex64::new(0.0, 0.0) {
                return v;
            }
            acc *= v;
        }
        acc
    }

    pub fn conjugate(&self) -> WaveletIndex3D {
        WaveletIndex3D {
            axes: [0, 1, 2].map(|i| self.axes[i].conjugate()),
        }
    }
}

impl PartialOrd for WaveletIndex3D {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WaveletIndex3D {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = &self.axes;
        let b = &other.axes;
        (a[0].r, a[1].r, a[2].r)
            .cmp(&(b[0].r, b[1].r, b[2].r))
            .then_with(|| (&a[0].n, &a[1].n, &a[2].n).cmp(&(&b[0].n, &b[1].n, &b[2].n)))
            .then_with(|| (a[0].j, a[1].j, a[2].j).cmp(&(b[0].j, b[1].j, b[2].j)))
    }
}

#[derive(Serialize, Deserialize)]
struct Raw3D {
    r: [i64; 3],
    n: [PAdicScalar; 3],
    j: [u32; 3],
}

impl Serialize for WaveletIndex3D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Raw3D {
            r: self.r(),
            n: [0, 1, 2].map(|i| self.axes[i].n.clone()),
            j: self.j(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WaveletIndex3D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Raw3D::deserialize(d)?;
        WaveletIndex3D::from_parts(raw.r, raw.n, raw.j).map_err(serde::de::Error::custom)
    }
}

/// Either a 1D or a 3D index; serializes without a tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WaveletIndex {
    Three(WaveletIndex3D),
    One(WaveletIndex1D),
}

/// Result of multiplying `Ω(p^R0 |x|_p)` by a wavelet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum IndicatorProduct {
    /// The wavelet support lies inside the ball.
    Unchanged,
    /// The ball lies strictly inside the support, where the wavelet equals
    /// the constant `p^(-r/2)`; the product is `p^exponent_half/2 · Ω`.
    ScaledIndicator {
        exponent_half: i64,
    },
    Zero,
}

/// Classifies `Ω(p^R0 |x|_p) · ψ_idx` through the disjoint/nested dichotomy of
/// the ball `p^R0 Z_p` and the wavelet support.
pub fn indicator_times_wavelet(r0: i64, idx: &WaveletIndex1D) -> IndicatorProduct {
    let ball = Ball1D::centered(idx.ctx(), -r0);
    let support = idx.support();
    if support.is_subset_of(&ball) {
        IndicatorProduct::Unchanged
    } else if ball.is_subset_of(&support) {
        // Strict containment puts the ball inside the radius r - 1 sub-ball
        // around 0, where the character phase vanishes.
        IndicatorProduct::ScaledIndicator { exponent_half: -idx.r }
    } else {
        IndicatorProduct::Zero
    }
}
