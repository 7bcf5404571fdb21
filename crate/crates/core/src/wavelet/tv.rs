use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{Ball1D, FieldContext, PAdicScalar};

use super::WaveletIndex1D;

/// Scalar locally constant function on `Q_p`: disjoint balls with constant
/// complex values.
#[derive(Debug, Clone, PartialEq)]
pub struct Lcf1D {
    ctx: FieldContext,
    cells: Vec<(Ball1D, Complex64)>,
}

impl Lcf1D {
    pub fn new(ctx: FieldContext, cells: Vec<(Ball1D, Complex64)>) -> Result<Self> {
        for (b, _) in &cells {
            ctx.check_same(b.ctx())?;
        }
        for i in 0..cells.len() {
            for k in i + 1..cells.len() {
                if cells[i].0.intersect(&cells[k].0).is_some() {
                    return Err(Error::OverlappingCells { first: i, second: k });
                }
            }
        }
        Ok(Lcf1D { ctx, cells })
    }

    pub fn zero(ctx: FieldContext) -> Self {
        Lcf1D { ctx, cells: Vec::new() }
    }

    pub fn indicator(ball: Ball1D) -> Self {
        Lcf1D {
            ctx: ball.ctx(),
            cells: vec![(ball, Complex64::new(1.0, 0.0))],
        }
    }

    /// `ψ_{rnj}` as `p` cells of radius `r - 1`.
    pub fn from_wavelet(idx: &WaveletIndex1D) -> Self {
        let cells = idx
            .support()
            .children()
            .into_iter()
            .map(|b| {
                let v = idx.eval(b.center());
                (b, v)
            })
            .collect();
        Lcf1D { ctx: idx.ctx(), cells }
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn cells(&self) -> &[(Ball1D, Complex64)] {
        &self.cells
    }

    pub fn eval(&self, x: &PAdicScalar) -> Complex64 {
        self.cells
            .iter()
            .find(|(b, _)| b.contains_point(x))
            .map(|(_, v)| *v)
            .unwrap_or_default()
    }

    /// `∫_ball f`, exact measure per cell.
    pub fn integrate_over(&self, ball: &Ball1D) -> Complex64 {
        self.cells
            .iter()
            .filter_map(|(b, v)| b.intersect(ball).map(|piece| v * rational_f64(&piece.measure())))
            .sum()
    }
}

fn rational_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `D f(z) = (1-p)/(1-p^(-2)) ∫ (f(z-y) - f(z)) / |y|_p² dy`, summed over the
/// spheres `|y|_p = p^γ`.
///
/// With `I(γ) = ∫_{B(z,γ)} f` the sphere contributes
/// `(I(γ) - I(γ-1) - f(z) μ(S_γ)) / p^(2γ)`. Spheres below the smallest cell
/// radius contribute nothing; beyond the radius `ρ` of the smallest ball around
/// `z` containing every cell, `I` is constant and the remaining spheres sum
/// to `-f(z) p^(-ρ-1)` exactly.
pub fn tv_oracle(f: &Lcf1D, z: &PAdicScalar) -> Result<Complex64> {
    f.ctx.check_same(z.ctx())?;
    if f.cells.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ctx = f.ctx;
    let fz = f.eval(z);
    let gamma_lo = f.cells.iter().map(|(b, _)| b.radius()).min().unwrap();
    let rho = f
        .cells
        .iter()
        .map(|(b, _)| {
            let d = b.center().try_sub(z).expect("same context").norm_exponent();
            d.map_or(b.radius(), |e| e.max(b.radius()))
        })
        .max()
        .unwrap();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f.integrate_over(&Ball1D::new(z.clone(), gamma_lo));
    for gamma in gamma_lo + 1..=rho {
        let cur = f.integrate_over(&Ball1D::new(z.clone(), gamma));
        let shell = ctx.pow_rational(gamma) - ctx.pow_rational(gamma - 1);
        sum += (cur - prev - fz * rational_f64(&shell)) * ctx.pow_f64(-2 * gamma);
        prev = cur;
    }
    sum -= fz * ctx.pow_f64(-rho - 1);
    let p = BigRational::from_integer(ctx.p_big());
    let one = BigRational::from_integer(1.into());
    let c = (&one - &p) / (&one - (&one / (&p * &p)));
    debug_assert!(!c.is_zero());
    Ok(sum * rational_f64(&c))
}
