use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{FieldContext, PAdicScalar, PAdicVec3};
use crate::error::Result;

/// How two balls (or polydiscs) sit relative to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallRelation {
    Disjoint,
    /// The first argument is strictly inside the second.
    AInsideB,
    /// The second argument is strictly inside the first.
    BInsideA,
    Equal,
    /// Polydiscs only: they intersect but neither contains the other.
    Overlapping,
}

impl BallRelation {
    pub fn swapped(self) -> Self {
        match self {
            BallRelation::AInsideB => BallRelation::BInsideA,
            BallRelation::BInsideA => BallRelation::AInsideB,
            other => other,
        }
    }
}

/// `{x : |x - center|_p <= p^radius} = center + p^(-radius) Z_p`.
///
/// The stored center is canonical: `p^(-radius) · {p^radius · c}_p`, so equal
/// balls compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ball1D {
    center: PAdicScalar,
    radius: i64,
}

impl Ball1D {
    pub fn new(center: PAdicScalar, radius: i64) -> Self {
        let center = center.mul_pow_p(radius).frac_scalar().mul_pow_p(-radius);
        Ball1D { center, radius }
    }

    /// `p^(-radius) Z_p`.
    pub fn centered(ctx: FieldContext, radius: i64) -> Self {
        Ball1D::new(PAdicScalar::zero(ctx), radius)
    }

    pub fn ctx(&self) -> FieldContext {
        self.center.ctx()
    }

    pub fn center(&self) -> &PAdicScalar {
        &self.center
    }

    /// Radius exponent `r`: the ball has radius `p^r`.
    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn measure(&self) -> BigRational {
        self.ctx().pow_rational(self.radius)
    }

    pub fn contains_point(&self, x: &PAdicScalar) -> bool {
        (x - &self.center).norm_at_most(self.radius)
    }

    pub fn relate(&self, other: &Ball1D) -> BallRelation {
        let big = self.radius.max(other.radius);
        if !(&self.center - &other.center).norm_at_most(big) {
            return BallRelation::Disjoint;
        }
        match self.radius.cmp(&other.radius) {
            std::cmp::Ordering::Less => BallRelation::AInsideB,
            std::cmp::Ordering::Greater => BallRelation::BInsideA,
            std::cmp::Ordering::Equal => BallRelation::Equal,
        }
    }

    pub fn is_subset_of(&self, other: &Ball1D) -> bool {
        matches!(self.relate(other), BallRelation::AInsideB | BallRelation::Equal)
    }

    pub fn intersect(&self, other: &Ball1D) -> Option<Ball1D> {
        match self.relate(other) {
            BallRelation::Disjoint => None,
            BallRelation::AInsideB | BallRelation::Equal => Some(self.clone()),
            _ => Some(other.clone()),
        }
    }

    /// `inf |x - y|_p` over `x` in `self`, `y` in `other`.
    pub fn distance(&self, other: &Ball1D) -> BigRational {
        match self.relate(other) {
            BallRelation::Disjoint => (&self.center - &other.center).norm(),
            _ => BigRational::zero(),
        }
    }

    /// The `p` maximal sub-balls of radius `radius - 1`.
    pub fn children(&self) -> Vec<Ball1D> {
        let ctx = self.ctx();
        let step = PAdicScalar::pow_p(ctx, -self.radius);
        (0..i64::from(ctx.p()))
            .map(|k| Ball1D::new(&self.center + &step.mul_int(k), self.radius - 1))
            .collect()
    }
}

impl Serialize for Ball1D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Ball1D", 2)?;
        st.serialize_field("center", &self.center)?;
        st.serialize_field("radius_exponent", &self.radius)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Ball1D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            center: PAdicScalar,
            radius_exponent: i64,
        }
        let raw = Raw::deserialize(d)?;
        Ok(Ball1D::new(raw.center, raw.radius_exponent))
    }
}

/// A product of three balls, one per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polydisc3 {
    axes: [Ball1D; 3],
}

impl Polydisc3 {
    pub fn new(axes: [Ball1D; 3]) -> Result<Self> {
        let ctx = axes[0].ctx();
        ctx.check_same(axes[1].ctx())?;
        ctx.check_same(axes[2].ctx())?;
        Ok(Polydisc3 { axes })
    }

    pub(crate) fn from_axes_unchecked(axes: [Ball1D; 3]) -> Self {
        Polydisc3 { axes }
    }

    /// `center + p^(-r_1) Z_p × p^(-r_2) Z_p × p^(-r_3) Z_p`.
    pub fn from_center(center: &PAdicVec3, radii: [i64; 3]) -> Result<Self> {
        Polydisc3::new([
            Ball1D::new(center.0[0].clone(), radii[0]),
            Ball1D::new(center.0[1].clone(), radii[1]),
            Ball1D::new(center.0[2].clone(), radii[2]),
        ])
    }

    /// `p^L Z_p^3`, i.e. radius exponent `-L` on every axis.
    pub fn centered(ctx: FieldContext, radii: [i64; 3]) -> Self {
        Polydisc3 {
            axes: radii.map(|r| Ball1D::centered(ctx, r)),
        }
    }

    pub fn ctx(&self) -> FieldContext {
        self.axes[0].ctx()
    }

    pub fn axes(&self) -> &[Ball1D; 3] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Ball1D {
        &self.axes[i]
    }

    pub fn radii(&self) -> [i64; 3] {
        [self.axes[0].radius, self.axes[1].radius, self.axes[2].radius]
    }

    pub fn center(&self) -> PAdicVec3 {
        PAdicVec3(self.axes.clone().map(|b| b.center))
    }

    /// Exact Haar measure, normalized so that `Z_p^3` has measure 1.
    pub fn measure(&self) -> BigRational {
        self.ctx().pow_rational(self.radii().iter().sum())
    }

    pub fn contains_point(&self, x: &PAdicVec3) -> bool {
        self.axes.iter().zip(x.0.iter()).all(|(b, xi)| b.contains_point(xi))
    }

    pub fn relate(&self, other: &Polydisc3) -> BallRelation {
        let rels: Vec<BallRelation> = self
            .axes
            .iter()
            .zip(other.axes.iter())
            .map(|(a, b)| a.relate(b))
            .collect();
        if rels.contains(&BallRelation::Disjoint) {
            return BallRelation::Disjoint;
        }
        let a_in_b = rels
            .iter()
            .all(|r| matches!(r, BallRelation::AInsideB | BallRelation::Equal));
        let b_in_a = rels
            .iter()
            .all(|r| matches!(r, BallRelation::BInsideA | BallRelation::Equal));
        match (a_in_b, b_in_a) {
            (true, true) => BallRelation::Equal,
            (true, false) => BallRelation::AInsideB,
            (false, true) => BallRelation::BInsideA,
            (false, false) => BallRelation::Overlapping,
        }
    }

    pub fn is_subset_of(&self, other: &Polydisc3) -> bool {
        matches!(self.relate(other), BallRelation::AInsideB | BallRelation::Equal)
    }

    pub fn intersect(&self, other: &Polydisc3) -> Option<Polydisc3> {
        Some(Polydisc3 {
            axes: [
                self.axes[0].intersect(&other.axes[0])?,
                self.axes[1].intersect(&other.axes[1])?,
                self.axes[2].intersect(&other.axes[2])?,
            ],
        })
    }

    /// Max-norm distance `inf ‖x - y‖_p`; zero when the polydiscs meet.
    pub fn distance(&self, other: &Polydisc3) -> BigRational {
        if self.intersect(other).is_some() {
            return BigRational::zero();
        }
        self.axes
            .iter()
            .zip(other.axes.iter())
            .map(|(a, b)| a.distance(b))
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Translate by `c`.
    pub fn translate(&self, c: &PAdicVec3) -> Result<Polydisc3> {
        let mut axes = self.axes.clone();
        for (b, ci) in axes.iter_mut().zip(c.0.iter()) {
            *b = Ball1D::new(b.center.try_add(ci)?, b.radius);
        }
        Ok(Polydisc3 { axes })
    }

    /// Smallest 0-centered polydisc containing every input polydisc.
    pub fn bounding<'a>(ctx: FieldContext, discs: impl IntoIterator<Item = &'a Polydisc3>) -> Polydisc3 {
        let mut radii = [i64::MIN; 3];
        for d in discs {
            for (i, b) in d.axes.iter().enumerate() {
                let reach = b.center.norm_exponent().unwrap_or(i64::MIN).max(b.radius);
                radii[i] = radii[i].max(reach);
            }
        }
        Polydisc3::centered(ctx, radii.map(|r| if r == i64::MIN { 0 } else { r }))
    }
}

impl Serialize for Polydisc3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Polydisc3", 2)?;
        st.serialize_field("center", &self.center())?;
        st.serialize_field("radius_exponents", &self.radii())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Polydisc3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            center: PAdicVec3,
            radius_exponents: [i64; 3],
        }
        let raw = Raw::deserialize(d)?;
        Polydisc3::from_center(&raw.center, raw.radius_exponents).map_err(serde::de::Error::custom)
    }
}

/// Haar measure of a polydisc (free-function form).
pub fn haar_measure(b: &Polydisc3) -> BigRational {
    b.measure()
}
