//! States of `L²(Q_p³) ⊗ C⁴` as finite wavelet-spinor expansions.
//!
//! The free Hamiltonian, the energy projectors and the propagator all act on
//! a single wavelet through the 4×4 symbol at its frequency magnitude, so
//! every operator here is applied term by term.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::padic::{FieldContext, PAdicVec3, Polydisc3};
use crate::spinor::{
    charge_conj_matrix, evolution_matrix, h_symbol, h_symbol_external, plane_wave_spinor, projector_matrix,
    spinor_serde, DiracParams, EnergySign, Matrix4, Spinor4,
};
use crate::wavelet::{IntegrationOptions, LocallyConstantFunction, WaveletIndex3D};

/// Below this norm a projected plane-wave amplitude counts as vanishing.
pub const VANISHING_AMPLITUDE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorWaveletState {
    ctx: FieldContext,
    terms: BTreeMap<WaveletIndex3D, Spinor4>,
}

/// `(s, Π_B s)` together with the exact measure of `B ∩ supp s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub probability: f64,
    pub measure: BigRational,
    pub cells: usize,
}

impl SpinorWaveletState {
    pub fn empty(ctx: FieldContext) -> Self {
        SpinorWaveletState {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    /// Sums repeated indices and drops zero amplitudes.
    pub fn from_terms(ctx: FieldContext, terms: impl IntoIterator<Item = (WaveletIndex3D, Spinor4)>) -> Result<Self> {
        let mut map: BTreeMap<WaveletIndex3D, Spinor4> = BTreeMap::new();
        for (idx, amp) in terms {
            ctx.check_same(idx.ctx())?;
            *map.entry(idx).or_insert_with(Spinor4::zeros) += amp;
        }
        Ok(SpinorWaveletState::pruned(ctx, map))
    }

    pub fn single(idx: WaveletIndex3D, amplitude: Spinor4) -> Self {
        let ctx = idx.ctx();
        SpinorWaveletState::pruned(ctx, BTreeMap::from([(idx, amplitude)]))
    }

    fn pruned(ctx: FieldContext, mut terms: BTreeMap<WaveletIndex3D, Spinor4>) -> Self {
        terms.retain(|_, a| a.iter().any(|z| *z != Complex64::new(0.0, 0.0)));
        SpinorWaveletState { ctx, terms }
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical index order.
    pub fn terms(&self) -> impl Iterator<Item = (&WaveletIndex3D, &Spinor4)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, idx: &WaveletIndex3D) -> Option<&Spinor4> {
        self.terms.get(idx)
    }

    pub fn try_add(&self, other: &SpinorWaveletState) -> Result<SpinorWaveletState> {
        self.ctx.check_same(other.ctx)?;
        let mut terms = self.terms.clone();
        for (idx, amp) in &other.terms {
            *terms.entry(idx.clone()).or_insert_with(Spinor4::zeros) += amp;
        }
        Ok(SpinorWaveletState::pruned(self.ctx, terms))
    }

    pub fn scale(&self, c: Complex64) -> SpinorWaveletState {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * c)).collect();
        SpinorWaveletState::pruned(self.ctx, terms)
    }

    /// `⟨s, t⟩ = Σ_k Σ_c s_kc · conj(t_kc)`, conjugate-linear in `t`.
    pub fn l2_inner(&self, other: &SpinorWaveletState) -> Result<Complex64> {
        self.ctx.check_same(other.ctx)?;
        let parts: Vec<Complex64> = self
            .terms
            .iter()
            .filter_map(|(k, a)| other.terms.get(k).map(|b| b.dotc(a)))
            .collect();
        Ok(exec::pairwise_sum_complex(&parts))
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let parts: Vec<f64> = self.terms.values().map(|a| a.norm_squared()).collect();
        exec::pairwise_sum(&parts)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Sobolev-type norm with weight `max(1, ‖q‖_p)^(1/2)`, where
    /// `‖q‖_p = max_i p^(1-r_i)` on the Fourier support of each wavelet.
    pub fn h1_norm(&self) -> f64 {
        let parts: Vec<f64> = self
            .terms
            .iter()
            .map(|(k, a)| k.frequency().max_norm().max(1.0).sqrt() * a.norm_squared())
            .collect();
        exec::pairwise_sum(&parts).sqrt()
    }

    fn map_per_term<F>(&self, exec: Execution, f: F) -> SpinorWaveletState
    where
        F: Fn(&WaveletIndex3D) -> Matrix4 + Sync + Send,
    {
        let entries: Vec<(&WaveletIndex3D, &Spinor4)> = self.terms.iter().collect();
        let mapped = exec::map(exec, &entries, |(k, a)| ((*k).clone(), f(k) * *a));
        SpinorWaveletState::pruned(self.ctx, mapped.into_iter().collect())
    }

    pub fn apply_h0(&self, mass: f64) -> SpinorWaveletState {
        self.map_per_term(Execution::default(), |k| h_symbol(&k.frequency(), mass))
    }

    /// `H(e)` with a constant external field.
    pub fn apply_hamiltonian(&self, params: &DiracParams) -> SpinorWaveletState {
        self.map_per_term(Execution::default(), |k| h_symbol_external(&k.frequency(), params))
    }

    pub fn project_energy(&self, mass: f64, sign: EnergySign) -> SpinorWaveletState {
        self.map_per_term(Execution::default(), |k| projector_matrix(&k.frequency(), mass, sign))
    }

    pub fn evolve(&self, mass: f64, t: f64) -> SpinorWaveletState {
        self.evolve_with(mass, t, Execution::default())
    }

    pub fn evolve_with(&self, mass: f64, t: f64, exec: Execution) -> SpinorWaveletState {
        if t == 0.0 {
            return self.clone();
        }
        self.map_per_term(exec, |k| evolution_matrix(&k.frequency(), mass, t))
    }

    /// `Σ_k amplitude_k ψ_k(x)`.
    pub fn eval(&self, x: &PAdicVec3) -> Spinor4 {
        self.terms
            .iter()
            .fold(Spinor4::zeros(), |acc, (k, a)| acc + a * k.eval(x))
    }

    /// Unit-norm single wavelet with amplitude `P_sign w`, where `w` is the
    /// plane-wave bispinor `w_1` (positive sign) or `w_3` (negative sign).
    pub fn localized_plane_wave(idx: &WaveletIndex3D, mass: f64, sign: EnergySign) -> SpinorWaveletState {
        let k = match sign {
            EnergySign::Pos => 1,
            EnergySign::Neg => 3,
        };
        SpinorWaveletState::localized_plane_wave_with(idx, mass, sign, k)
            .expect("w_1 and w_3 are eigenvectors of their own energy sign")
    }

    /// Same construction from any bispinor `w_k`; fails when the projection
    /// of `w_k` onto the requested energy sign vanishes.
    pub fn localized_plane_wave_with(
        idx: &WaveletIndex3D,
        mass: f64,
        sign: EnergySign,
        k: u8,
    ) -> Result<SpinorWaveletState> {
        let q = idx.frequency();
        let amp = projector_matrix(&q, mass, sign) * plane_wave_spinor(k, &q, mass);
        let norm = amp.norm();
        if norm < VANISHING_AMPLITUDE {
            return Err(Error::VanishingProjection(norm));
        }
        Ok(SpinorWaveletState::single(idx.clone(), amp / Complex64::from(norm)))
    }

    /// The state restricted to `restrict` (or everywhere) as a locally
    /// constant function.
    pub fn to_lcf(&self, restrict: Option<&Polydisc3>, opts: &IntegrationOptions) -> Result<LocallyConstantFunction> {
        let terms: Vec<(WaveletIndex3D, Spinor4)> = self
            .terms
            .iter()
            .filter(|(k, _)| restrict.is_none_or(|b| k.support().intersect(b).is_some()))
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        LocallyConstantFunction::from_expansion(self.ctx, &terms, restrict, opts)
    }

    /// `(s, Π_B s) = ∫_B |s(x)|² dx`, cross terms included.
    pub fn localization_probability(&self, b: &Polydisc3, opts: &IntegrationOptions) -> Result<Localization> {
        self.ctx.check_same(b.ctx())?;
        let lcf = self.to_lcf(Some(b), opts)?;
        let integral = lcf.refine_and_integrate(b, opts)?;
        Ok(Localization {
            probability: integral.norm_sq,
            measure: integral.measure,
            cells: integral.cells,
        })
    }

    /// `C s = U_C conj(s)`. Since `conj ψ_{rnj} = ψ_{rn(p-j)}`, each term moves
    /// to the conjugate index.
    pub fn charge_conjugate(&self) -> SpinorWaveletState {
        let uc = charge_conj_matrix();
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.conjugate(), uc * a.conjugate()))
            .collect();
        SpinorWaveletState::pruned(self.ctx, terms)
    }
}

/// The integer `m_λ` with `p^m_λ ≤ λ < p^(m_λ + 1)`, decided exactly on the
/// binary value of `λ`.
pub fn position_projection_exponent(ctx: FieldContext, lambda: f64) -> Result<i64> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(Error::NonPositiveSpectralParameter(lambda));
    }
    let exact = BigRational::from_f64(lambda).expect("finite");
    let mut m = lambda.log(ctx.p_f64()).floor() as i64;
    while ctx.pow_rational(m) > exact {
        m -= 1;
    }
    while ctx.pow_rational(m + 1) <= exact {
        m += 1;
    }
    Ok(m)
}

/// `{x : ‖x‖_p ≤ p^m_λ}`, the region of the position spectral projection.
pub fn position_projection_ball(ctx: FieldContext, lambda: f64) -> Result<Polydisc3> {
    let m = position_projection_exponent(ctx, lambda)?;
    Ok(Polydisc3::centered(ctx, [m, m, m]))
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    index: WaveletIndex3D,
    #[serde(with = "spinor_serde")]
    amplitude: Spinor4,
}

impl Serialize for SpinorWaveletState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(k, a)| TermJson {
                index: k.clone(),
                amplitude: *a,
            })
            .collect();
        rows.serialize(s)
    }
}

impl SpinorWaveletState {
    /// Parses the `[{index, amplitude}]` form.
    pub fn from_json(ctx: FieldContext, value: &serde_json::Value) -> Result<SpinorWaveletState> {
        let rows: Vec<TermJson> =
            serde_json::from_value(value.clone()).map_err(|e| Error::config("state", e.to_string()))?;
        SpinorWaveletState::from_terms(ctx, rows.into_iter().map(|r| (r.index, r.amplitude)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PAdicScalar;
    use num_traits::Zero;

    fn c3() -> FieldContext {
        FieldContext::new(3).unwrap()
    }

    fn idx(r: [i64; 3], j: [u32; 3]) -> WaveletIndex3D {
        WaveletIndex3D::at_origin(c3(), r, j).unwrap()
    }

    fn e(k: usize) -> Spinor4 {
        let mut v = Spinor4::zeros();
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn arithmetic_prunes() {
        let s = SpinorWaveletState::single(idx([0, 0, 0], [1, 1, 1]), e(0));
        assert!(s.try_add(&s.scale(Complex64::new(-1.0, 0.0))).unwrap().is_empty());
        assert!(s.scale(Complex64::new(0.0, 0.0)).is_empty());
    }

    #[test]
    fn inner_product_examples() {
        let s = SpinorWaveletState::single(idx([0, 0, 0], [1, 1, 1]), e(0));
        let t = SpinorWaveletState::single(idx([0, 0, 1], [1, 1, 1]), e(0));
        assert_eq!(s.l2_inner(&s).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(s.l2_inner(&t).unwrap(), Complex64::new(0.0, 0.0));
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(s.scale(i).l2_inner(&s).unwrap(), i);
        assert_eq!(s.l2_inner(&s.scale(i)).unwrap(), -i);
    }

    #[test]
    fn h1_norm_examples() {
        let s = SpinorWaveletState::single(idx([1, 1, 1], [1, 1, 1]), e(2));
        assert!((s.h1_norm() - 1.0).abs() < 1e-15);
        let t = SpinorWaveletState::single(idx([0, 0, 0], [1, 1, 1]), e(2));
        assert!((t.h1_norm().powi(2) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn h0_on_plane_wave() {
        let k = idx([0, 0, 0], [1, 2, 1]);
        let w = plane_wave_spinor(1, &k.frequency(), 0.0);
        let s = SpinorWaveletState::single(k.clone(), w);
        let lam = 27f64.sqrt();
        let diff = s.apply_h0(0.0).try_add(&s.scale(Complex64::from(-lam))).unwrap();
        assert!(diff.l2_norm() < 1e-12);
    }

    #[test]
    fn position_exponent_examples() {
        assert_eq!(position_projection_exponent(c3(), 10.0).unwrap(), 2);
        assert_eq!(position_projection_exponent(c3(), 9.0).unwrap(), 2);
        assert_eq!(position_projection_exponent(c3(), 1.0).unwrap(), 0);
        assert_eq!(position_projection_exponent(c3(), 0.25).unwrap(), -2);
        assert!(position_projection_exponent(c3(), 0.0).is_err());
        assert!(position_projection_exponent(c3(), -1.0).is_err());
        assert_eq!(position_projection_ball(c3(), 10.0).unwrap().radii(), [2, 2, 2]);
    }

    #[test]
    fn evolution_at_zero_is_exact_identity() {
        let s = SpinorWaveletState::localized_plane_wave(&idx([0, 1, 2], [1, 1, 2]), 1.0, EnergySign::Pos);
        assert_eq!(s.evolve(1.0, 0.0), s);
    }

    #[test]
    fn localization_in_own_support_and_elsewhere() {
        let k = idx([0, 1, -1], [2, 1, 1]);
        let s = SpinorWaveletState::localized_plane_wave(&k, 1.0, EnergySign::Neg);
        let opts = IntegrationOptions::default();
        let own = s.localization_probability(&k.support(), &opts).unwrap();
        assert!((own.probability - 1.0).abs() < 1e-12);
        assert_eq!(own.measure, k.support().measure());
        let far = PAdicScalar::new(c3(), 1, 3);
        let elsewhere = Polydisc3::from_center(&PAdicVec3::new(far.clone(), far.clone(), far), [0, 0, 0]).unwrap();
        let out = s.localization_probability(&elsewhere, &opts).unwrap();
        assert_eq!(out.probability, 0.0);
        assert!(out.measure.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let s = SpinorWaveletState::localized_plane_wave(&idx([0, 1, 2], [1, 1, 2]), 1.0, EnergySign::Pos);
        let v = serde_json::to_value(&s).unwrap();
        assert!(v[0]["amplitude"][0].is_array());
        assert_eq!(SpinorWaveletState::from_json(c3(), &v).unwrap(), s);
    }
}
