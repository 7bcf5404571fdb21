use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{format_rational, FieldContext};

use super::{WaveletIndex, WaveletIndex1D, WaveletIndex3D};

/// Truncation scale together with the exact L² norm² of the omitted tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionTruncation {
    pub r_max: i64,
    pub tail_norm_sq: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub index: WaveletIndex,
    /// Real coefficient `p^(coefficient_half_exponent / 2)`.
    pub coefficient: f64,
    pub coefficient_half_exponent: i64,
    pub coefficient_sq: BigRational,
}

impl Serialize for ExpansionTerm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ExpansionTerm", 3)?;
        st.serialize_field("index", &self.index)?;
        st.serialize_field("re", &self.coefficient)?;
        st.serialize_field("im", &0.0)?;
        st.end()
    }
}

/// Wavelet coefficients of `φ = p^(dim·R0/2) Ω(p^R0 ‖x‖_p)`, the unit-norm
/// indicator of `p^R0 Z_p^dim`, for scales `-R0 + 1 ≤ r_i ≤ r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorExpansion {
    pub ctx: FieldContext,
    pub r0: i64,
    pub dim: u8,
    pub terms: Vec<ExpansionTerm>,
    pub retained_norm_sq: BigRational,
    pub truncation: ExpansionTruncation,
}

impl IndicatorExpansion {
    /// First scale of the series.
    pub fn start(r0: i64) -> i64 {
        1 - r0
    }

    pub fn terms_3d(&self) -> impl Iterator<Item = (&WaveletIndex3D, &ExpansionTerm)> {
        self.terms.iter().filter_map(|t| match &t.index {
            WaveletIndex::Three(idx) => Some((idx, t)),
            WaveletIndex::One(_) => None,
        })
    }
}

impl Serialize for IndicatorExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IndicatorExpansion", 7)?;
        st.serialize_field("p", &self.ctx.p())?;
        st.serialize_field("R0", &self.r0)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("r_max", &self.truncation.r_max)?;
        st.serialize_field("retained_norm_sq", &format_rational(&self.retained_norm_sq))?;
        st.serialize_field("tail_norm_sq", &format_rational(&self.truncation.tail_norm_sq))?;
        st.serialize_field("terms", &self.terms)?;
        st.end()
    }
}

/// Per-axis omitted mass `Σ_{r > r_max} (p-1) p^(-R0-r) = p^(-(r_max+R0))`.
pub fn axis_tail_norm_sq(ctx: FieldContext, r0: i64, r_max: i64) -> BigRational {
    ctx.pow_rational(-(r_max + r0))
}

pub fn expand_ball_indicator(ctx: FieldContext, r0: i64, dim: u8, r_max: i64) -> Result<IndicatorExpansion> {
    let start = IndicatorExpansion::start(r0);
    if r_max < start {
        return Err(Error::TruncationBelowStart { r_max, start });
    }
    if dim != 1 && dim != 3 {
        return Err(Error::config("dim", format!("must be 1 or 3, got {dim}")));
    }
    let p = ctx.p();
    let scales: Vec<i64> = (start..=r_max).collect();
    let mut terms = Vec::new();
    if dim == 1 {
        for &r in &scales {
            for j in 1..p {
                let half = -r0 - r;
                terms.push(ExpansionTerm {
                    index: WaveletIndex::One(WaveletIndex1D::at_origin(ctx, r, j)?),
                    coefficient: ctx.pow_half_f64(half),
                    coefficient_half_exponent: half,
                    coefficient_sq: ctx.pow_rational(half),
                });
            }
        }
    } else {
        for &r1 in &scales {
            for &r2 in &scales {
                for &r3 in &scales {
                    let half = -3 * r0 - (r1 + r2 + r3);
                    for j1 in 1..p {
                        for j2 in 1..p {
                            for j3 in 1..p {
                                let idx = WaveletIndex3D::at_origin(ctx, [r1, r2, r3], [j1, j2, j3])?;
                                terms.push(ExpansionTerm {
                                    index: WaveletIndex::Three(idx),
                                    coefficient: ctx.pow_half_f64(half),
                                    coefficient_half_exponent: half,
                                    coefficient_sq: ctx.pow_rational(half),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    terms.sort_by(|a, b| a.index.cmp(&b.index));
    let retained_norm_sq = terms.iter().fold(BigRational::zero(), |acc, t| acc + &t.coefficient_sq);
    let axis_kept = BigRational::one() - axis_tail_norm_sq(ctx, r0, r_max);
    let kept = if dim == 1 {
        axis_kept
    } else {
        &axis_kept * &axis_kept * &axis_kept
    };
    Ok(IndicatorExpansion {
        ctx,
        r0,
        dim,
        terms,
        retained_norm_sq,
        truncation: ExpansionTruncation {
            r_max,
            tail_norm_sq: BigRational::one() - kept,
        },
    })
}
