//! The 4×4 Dirac symbol layer: Pauli/Dirac matrices, the free symbol `h(q)`,
//! its diagonalizer, plane-wave bispinors, energy projectors, the unitary
//! propagator and the charge-conjugation matrix.
//!
//! Everything here is closed form. The frequency argument is always a
//! [`FrequencyMagnitude`], i.e. a triple of strictly positive powers of `p`,
//! so `λ > 0` and `E + m > 0` hold by construction.

use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix4 as NMatrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::padic::FieldContext;

pub type Matrix4 = NMatrix4<Complex64>;
pub type Spinor4 = Vector4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(p^e1, p^e2, p^e3)`. For a wavelet index `e_i = 1 - r_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyMagnitude {
    pub ctx: FieldContext,
    pub exponents: [i64; 3],
}

impl FrequencyMagnitude {
    pub fn new(ctx: FieldContext, exponents: [i64; 3]) -> Self {
        FrequencyMagnitude { ctx, exponents }
    }

    /// Frequency magnitudes of the 3D wavelet with scales `r`.
    pub fn from_scales(ctx: FieldContext, r: [i64; 3]) -> Self {
        FrequencyMagnitude::new(ctx, r.map(|ri| 1 - ri))
    }

    pub fn values(&self) -> [f64; 3] {
        self.exponents.map(|e| self.ctx.pow_f64(e))
    }

    /// `max_i |q_i|_p`.
    pub fn max_norm(&self) -> f64 {
        self.ctx.pow_f64(*self.exponents.iter().max().unwrap())
    }

    pub fn euclidean(&self) -> f64 {
        let [a, b, c] = self.values();
        (a * a + b * b + c * c).sqrt()
    }
}

/// Constant field for the charged Hamiltonian `α·(q - eA) + βm + eφ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalField {
    pub charge: f64,
    pub vector_potential: [f64; 3],
    pub scalar_potential: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracParams {
    pub mass: f64,
    pub field: Option<ExternalField>,
}

impl DiracParams {
    pub fn free(mass: f64) -> Self {
        DiracParams { mass, field: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySign {
    Pos,
    Neg,
}

impl EnergySign {
    pub fn factor(self) -> f64 {
        match self {
            EnergySign::Pos => 1.0,
            EnergySign::Neg => -1.0,
        }
    }
}

/// Pauli matrices `σ_1..σ_3`, Dirac matrices `α_1..α_3`, `β`.
#[derive(Debug, Clone)]
pub struct DiracMatrices {
    pub sigma: [Matrix2<Complex64>; 3],
    pub alpha: [Matrix4; 3],
    pub beta: Matrix4,
}

impl DiracMatrices {
    fn build() -> Self {
        let sigma = [
            Matrix2::new(ZERO, ONE, ONE, ZERO),
            Matrix2::new(ZERO, -I, I, ZERO),
            Matrix2::new(ONE, ZERO, ZERO, -ONE),
        ];
        let alpha = sigma.map(|s| block(&Matrix2::zeros(), &s, &s, &Matrix2::zeros()));
        let id2 = Matrix2::identity();
        let beta = block(&id2, &Matrix2::zeros(), &Matrix2::zeros(), &(-id2));
        DiracMatrices { sigma, alpha, beta }
    }

    /// Largest entry deviation from the anticommutation relations
    /// `{α_k, α_j} = 2δ_kj`, `{α_k, β} = 0`, `β² = 1`.
    pub fn algebra_deviation(&self) -> f64 {
        let id = Matrix4::identity();
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            for j in 0..3 {
                let anti = self.alpha[k] * self.alpha[j] + self.alpha[j] * self.alpha[k];
                let target = if k == j {
                    id * Complex64::from(2.0)
                } else {
                    Matrix4::zeros()
                };
                worst = worst.max(max_abs(&(anti - target)));
            }
            let with_beta = self.alpha[k] * self.beta + self.beta * self.alpha[k];
            worst = worst.max(max_abs(&with_beta));
        }
        worst.max(max_abs(&(self.beta * self.beta - id)))
    }
}

/// The standard representation, checked against the Dirac algebra on first use.
pub fn dirac() -> &'static DiracMatrices {
    static CELL: OnceLock<DiracMatrices> = OnceLock::new();
    CELL.get_or_init(|| {
        let d = DiracMatrices::build();
        let dev = d.algebra_deviation();
        assert!(dev <= 1e-15, "Dirac algebra violated: {dev:e}");
        d
    })
}

fn block(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>, c: &Matrix2<Complex64>, d: &Matrix2<Complex64>) -> Matrix4 {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    m
}

/// Largest entry modulus.
pub fn max_abs(m: &Matrix4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_spinor(v: &Spinor4) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `α·k + βm` for an arbitrary real vector `k`.
pub fn symbol_from_reals(k: [f64; 3], mass: f64) -> Matrix4 {
    let d = dirac();
    d.alpha[0] * Complex64::from(k[0])
        + d.alpha[1] * Complex64::from(k[1])
        + d.alpha[2] * Complex64::from(k[2])
        + d.beta * Complex64::from(mass)
}

/// `λ(q, m) = sqrt(|q|² + m²)`.
pub fn lambda(q: &FrequencyMagnitude, mass: f64) -> f64 {
    let [a, b, c] = q.values();
    (a * a + b * b + c * c + mass * mass).sqrt()
}

/// `h(q) = [[m·1, σ·q], [σ·q, -m·1]]`.
pub fn h_symbol(q: &FrequencyMagnitude, mass: f64) -> Matrix4 {
    symbol_from_reals(q.values(), mass)
}

/// `α·(q - eA) + βm + eφ·1` for a constant external field.
pub fn h_symbol_external(q: &FrequencyMagnitude, params: &DiracParams) -> Matrix4 {
    let Some(field) = params.field else {
        return h_symbol(q, params.mass);
    };
    let v = q.values();
    let e = field.charge;
    let k = [
        v[0] - e * field.vector_potential[0],
        v[1] - e * field.vector_potential[1],
        v[2] - e * field.vector_potential[2],
    ];
    symbol_from_reals(k, params.mass) + Matrix4::identity() * Complex64::from(e * field.scalar_potential)
}

/// `λ`, `a±` and the unitary `u` with `u⁻¹ h u = βλ`.
///
/// `u⁻¹ = a₊ + a₋ β(α·q)/|q|₂` is the Foldy–Wouthuysen frame change; the
/// opposite sign assignment only diagonalizes `u h u⁻¹`.
#[derive(Debug, Clone)]
pub struct Diagonalizer {
    pub lambda: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub u: Matrix4,
    pub u_inv: Matrix4,
}

pub fn lambda_a_u(q: &FrequencyMagnitude, mass: f64) -> Diagonalizer {
    let lam = lambda(q, mass);
    let ratio = mass / lam;
    let a_plus = ((1.0 + ratio) / 2.0).sqrt();
    let a_minus = ((1.0 - ratio) / 2.0).sqrt();
    let d = dirac();
    let unit_q = q.values().map(|x| x / q.euclidean());
    let twist = d.beta * symbol_from_reals(unit_q, 0.0);
    let id = Matrix4::identity();
    Diagonalizer {
        lambda: lam,
        a_plus,
        a_minus,
        u: id * Complex64::from(a_plus) - twist * Complex64::from(a_minus),
        u_inv: id * Complex64::from(a_plus) + twist * Complex64::from(a_minus),
    }
}

/// The bispinors `w_1..w_4` built from `σ·q / (E + m)` with `E = λ(q, m)`.
/// `w_1, w_2` have energy `+λ`, `w_3, w_4` energy `-λ`.
///
/// Panics if `k` is not in `1..=4`.
pub fn plane_wave_spinor(k: u8, q: &FrequencyMagnitude, mass: f64) -> Spinor4 {
    let d = dirac();
    let e = lambda(q, mass);
    let [a, b, c] = q.values();
    let sigma_q = d.sigma[0] * Complex64::from(a) + d.sigma[1] * Complex64::from(b) + d.sigma[2] * Complex64::from(c);
    let s = sigma_q / Complex64::from(e + mass);
    let up = nalgebra::Vector2::new(ONE, ZERO);
    let down = nalgebra::Vector2::new(ZERO, ONE);
    let (top, bottom) = match k {
        1 => (up, s * up),
        2 => (down, s * down),
        3 => (-(s * down), down),
        4 => (-(s * up), up),
        _ => panic!("plane-wave label must be 1..=4, got {k}"),
    };
    Spinor4::new(top[0], top[1], bottom[0], bottom[1])
}

/// `(1 ± h/λ) / 2`.
pub fn projector_matrix(q: &FrequencyMagnitude, mass: f64, sign: EnergySign) -> Matrix4 {
    let h = h_symbol(q, mass);
    let lam = lambda(q, mass);
    (Matrix4::identity() + h * Complex64::from(sign.factor() / lam)) * Complex64::from(0.5)
}

/// `exp(-i t h) = cos(λt)·1 - i sin(λt)·h/λ`.
pub fn evolution_matrix(q: &FrequencyMagnitude, mass: f64, t: f64) -> Matrix4 {
    let h = h_symbol(q, mass);
    let lam = lambda(q, mass);
    let (s, c) = (lam * t).sin_cos();
    Matrix4::identity() * Complex64::from(c) - h * Complex64::new(0.0, s / lam)
}

/// `U_C = -iβα_2`; real, symmetric and an involution.
pub fn charge_conj_matrix() -> Matrix4 {
    let d = dirac();
    (d.beta * d.alpha[1]) * (-I)
}

/// Row-major `[[re, im]; 4]; 4]` JSON form.
pub fn matrix_to_json(m: &Matrix4) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..4)
        .map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::to_value(rows).expect("plain arrays serialize")
}

pub fn spinor_to_pairs(v: &Spinor4) -> [[f64; 2]; 4] {
    [0, 1, 2, 3].map(|i| [v[i].re, v[i].im])
}

pub fn spinor_from_pairs(pairs: &[[f64; 2]; 4]) -> Spinor4 {
    Spinor4::new(
        Complex64::new(pairs[0][0], pairs[0][1]),
        Complex64::new(pairs[1][0], pairs[1][1]),
        Complex64::new(pairs[2][0], pairs[2][1]),
        Complex64::new(pairs[3][0], pairs[3][1]),
    )
}

/// Serde adapter for [`Spinor4`] fields.
pub mod spinor_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &Spinor4, s: S) -> Result<S::Ok, S::Error> {
        spinor_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Spinor4, D::Error> {
        let pairs = <[[f64; 2]; 4]>::deserialize(d)?;
        Ok(spinor_from_pairs(&pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> FieldContext {
        FieldContext::new(3).unwrap()
    }

    fn ones() -> FrequencyMagnitude {
        FrequencyMagnitude::new(ctx(), [0, 0, 0])
    }

    #[test]
    fn dirac_algebra_holds() {
        assert!(dirac().algebra_deviation() <= 1e-15);
    }

    #[test]
    fn symbol_at_unit_frequencies() {
        let h = h_symbol(&ones(), 1.0);
        assert_eq!(lambda(&ones(), 1.0), 2.0);
        assert!(max_abs(&(h * h - Matrix4::identity() * Complex64::from(4.0))) < 1e-15);
        assert!((lambda(&ones(), 0.0) - 3f64.sqrt()).abs() < 1e-15);
        assert!(max_abs(&(h - h.adjoint())) < 1e-15);
        assert!(h.trace().norm() < 1e-15);
    }

    #[test]
    fn external_symbol_reduces_to_free_symbol() {
        let q = FrequencyMagnitude::new(ctx(), [1, -1, 0]);
        let free = h_symbol(&q, 2.0);
        let neutral = DiracParams {
            mass: 2.0,
            field: Some(ExternalField {
                charge: 0.0,
                vector_potential: [1.0, 2.0, 3.0],
                scalar_potential: 5.0,
            }),
        };
        assert!(max_abs(&(h_symbol_external(&q, &neutral) - free)) < 1e-15);
        let shifted = DiracParams {
            mass: 2.0,
            field: Some(ExternalField {
                charge: 1.0,
                vector_potential: [0.0; 3],
                scalar_potential: 1.0,
            }),
        };
        assert!(max_abs(&(h_symbol_external(&q, &shifted) - free - Matrix4::identity())) < 1e-15);
    }

    #[test]
    fn massless_a_coefficients() {
        let d = lambda_a_u(&ones(), 0.0);
        assert!((d.a_plus - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((d.a_minus - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn heavy_mass_limit() {
        let d = lambda_a_u(&ones(), 1e9);
        assert!((d.a_plus - 1.0).abs() < 1e-12);
        assert!(d.a_minus < 1e-4);
        assert!(max_abs(&(d.u - Matrix4::identity())) < 1e-4);
    }

    #[test]
    fn plane_wave_small_momentum_limit() {
        let q = FrequencyMagnitude::new(ctx(), [-20, -20, -20]);
        let w1 = plane_wave_spinor(1, &q, 1.0);
        let e1 = Spinor4::new(ONE, ZERO, ZERO, ZERO);
        assert!(max_abs_spinor(&(w1 - e1)) < 1e-6);
    }

    #[test]
    fn projector_small_momentum_limit() {
        let q = FrequencyMagnitude::new(ctx(), [-20, -20, -20]);
        let pos = projector_matrix(&q, 1.0, EnergySign::Pos);
        let target = Matrix4::from_diagonal(&Spinor4::new(ONE, ONE, ZERO, ZERO));
        assert!(max_abs(&(pos - target)) < 1e-9);
    }

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let q = FrequencyMagnitude::new(ctx(), [2, 0, -1]);
        assert!(max_abs(&(evolution_matrix(&q, 0.7, 0.0) - Matrix4::identity())) == 0.0);
    }

    #[test]
    fn charge_conjugation_matrix_is_real_orthogonal() {
        let uc = charge_conj_matrix();
        assert!(uc.iter().all(|z| z.im == 0.0));
        assert!(max_abs(&(uc * uc.transpose() - Matrix4::identity())) < 1e-15);
        assert!(max_abs(&(uc * uc - Matrix4::identity())) < 1e-15);
    }

    #[test]
    #[should_panic(expected = "plane-wave label")]
    fn plane_wave_label_out_of_range() {
        plane_wave_spinor(5, &ones(), 1.0);
    }
}
