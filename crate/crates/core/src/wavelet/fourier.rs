use num_complex::Complex64;
use serde::Serialize;

use crate::padic::{Ball1D, PAdicScalar};

use super::WaveletIndex1D;

/// Closed form of `ψ̂_{rnj}(q) = ∫ χ(qx) ψ_{rnj}(x) dx`:
/// `p^(r/2) χ(p^(-r) n q) Ω(|p^(-r) q + p^(-1) j|_p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveletFourier {
    pub index: WaveletIndex1D,
    /// The amplitude is `p^(amplitude_half_exponent / 2)`.
    pub amplitude_half_exponent: i64,
    pub modulation: PAdicScalar,
    /// `-p^(r-1) j + p^r Z_p`.
    pub support: Ball1D,
}

pub fn wavelet_fourier(idx: &WaveletIndex1D) -> WaveletFourier {
    let r = idx.r();
    let shift = PAdicScalar::from_int(idx.ctx(), -i64::from(idx.j())).mul_pow_p(r - 1);
    WaveletFourier {
        index: idx.clone(),
        amplitude_half_exponent: r,
        modulation: idx.n().mul_pow_p(-r),
        support: Ball1D::new(shift, -r),
    }
}

impl WaveletFourier {
    pub fn amplitude(&self) -> f64 {
        self.index.ctx().pow_half_f64(self.amplitude_half_exponent)
    }

    pub fn eval(&self, q: &PAdicScalar) -> Complex64 {
        if !self.support.contains_point(q) {
            return Complex64::new(0.0, 0.0);
        }
        (&self.modulation * q).character().value * self.amplitude()
    }
}
