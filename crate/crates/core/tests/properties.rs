use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use padic_dirac::padic::{Ball1D, FieldContext, PAdicScalar};
use padic_dirac::spinor::{dirac, h_symbol, lambda, projector_matrix, EnergySign, FrequencyMagnitude, Matrix4, Spinor4};
use padic_dirac::state::SpinorWaveletState;
use padic_dirac::wavelet::{WaveletIndex1D, WaveletIndex3D};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn ctx_strategy() -> impl Strategy<Value = FieldContext> {
    prop::sample::select(&PRIMES[..]).prop_map(|p| FieldContext::new(p).unwrap())
}

fn scalar(ctx: FieldContext) -> impl Strategy<Value = PAdicScalar> {
    (-50_000i64..50_000, -4i64..6).prop_map(move |(a, k)| PAdicScalar::new(ctx, a, k))
}

fn scalar_pair() -> impl Strategy<Value = (PAdicScalar, PAdicScalar)> {
    ctx_strategy().prop_flat_map(|ctx| (scalar(ctx), scalar(ctx)))
}

fn scalar_triple() -> impl Strategy<Value = (PAdicScalar, PAdicScalar, PAdicScalar)> {
    ctx_strategy().prop_flat_map(|ctx| (scalar(ctx), scalar(ctx), scalar(ctx)))
}

fn index_1d(ctx: FieldContext) -> impl Strategy<Value = WaveletIndex1D> {
    let p = ctx.p();
    (-3i64..=3, 0i64..3, 0i64..1000, 1..p).prop_map(move |(r, k, a, j)| {
        let modulus = (p as i64).pow(k as u32);
        WaveletIndex1D::new(r, PAdicScalar::new(ctx, a % modulus, k), j).unwrap()
    })
}

fn frequency() -> impl Strategy<Value = (FrequencyMagnitude, f64)> {
    (ctx_strategy(), prop::array::uniform3(-4i64..=4), 0.0f64..10.0)
        .prop_map(|(ctx, e, m)| (FrequencyMagnitude::new(ctx, e), m))
}

fn max_abs(m: &Matrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn is_integer(x: &BigRational) -> bool {
    x.is_integer()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn addition_is_a_group((x, y, z) in scalar_triple()) {
        let lhs = x.try_add(&y).unwrap().try_add(&z).unwrap();
        let rhs = x.try_add(&y.try_add(&z).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert!(x.try_sub(&x).unwrap().is_zero());
        prop_assert_eq!(x.try_add(&y).unwrap().to_rational(), x.to_rational() + y.to_rational());
    }

    #[test]
    fn norm_is_multiplicative_and_ultrametric((x, y) in scalar_pair()) {
        let prod = x.try_mul(&y).unwrap();
        prop_assert_eq!(prod.norm(), x.norm() * y.norm());
        let sum = x.try_add(&y).unwrap();
        let bound = std::cmp::max(x.norm(), y.norm());
        prop_assert!(sum.norm() <= bound);
        if x.norm() != y.norm() {
            prop_assert_eq!(sum.norm(), bound);
        }
    }

    #[test]
    fn fractional_part_is_additive_mod_one((x, y) in scalar_pair()) {
        let f = x.frac_part();
        prop_assert!(f >= BigRational::zero() && f < BigRational::one());
        let defect = x.try_add(&y).unwrap().frac_part() - x.frac_part() - y.frac_part();
        prop_assert!(is_integer(&defect));
        // x - {x} lies in Z_p.
        prop_assert!(x.try_sub(&x.frac_scalar()).unwrap().is_integral());
    }

    #[test]
    fn character_is_a_homomorphism((x, y) in scalar_pair()) {
        let lhs = x.try_add(&y).unwrap().character().value;
        let rhs = x.character().value * y.character().value;
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn string_form_round_trips((x, _) in scalar_pair()) {
        let back: PAdicScalar = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn ball_relation_is_symmetric(
        (a, b, ra, rb) in ctx_strategy().prop_flat_map(|ctx| (scalar(ctx), scalar(ctx), -3i64..3, -3i64..3))
    ) {
        let (ba, bb) = (Ball1D::new(a, ra), Ball1D::new(b, rb));
        prop_assert_eq!(ba.relate(&bb), bb.relate(&ba).swapped());
        prop_assert_eq!(ba.distance(&bb), bb.distance(&ba));
        prop_assert_eq!(ba.intersect(&bb).is_some(), bb.intersect(&ba).is_some());
    }

    #[test]
    fn wavelets_are_constant_on_small_balls(
        (idx, x, z) in ctx_strategy().prop_flat_map(|ctx| (index_1d(ctx), scalar(ctx), -500i64..500))
    ) {
        let shifted = x.try_add(&PAdicScalar::from_int(idx.ctx(), z).mul_pow_p(1 - idx.r())).unwrap();
        prop_assert!((idx.eval(&x) - idx.eval(&shifted)).norm() < 1e-12);
        let inside = idx.support().contains_point(&x);
        prop_assert_eq!(idx.eval(&x).norm() > 0.0, inside);
    }

    #[test]
    fn wavelet_conjugate_is_pointwise_conjugate(
        (idx, x) in ctx_strategy().prop_flat_map(|ctx| (index_1d(ctx), scalar(ctx)))
    ) {
        prop_assert!((idx.conjugate().eval(&x) - idx.eval(&x).conj()).norm() < 1e-12);
    }

    #[test]
    fn symbol_squares_to_lambda_squared((q, m) in frequency()) {
        let h = h_symbol(&q, m);
        let lam = lambda(&q, m);
        let trace: Complex64 = (0..4).map(|i| h[(i, i)]).sum();
        prop_assert!(trace.norm() < 1e-12 * lam.max(1.0));
        let dev = h * h - Matrix4::identity() * Complex64::from(lam * lam);
        prop_assert!(max_abs(&dev) <= 1e-12 * (lam * lam).max(1.0));
        prop_assert!(max_abs(&(h - h.adjoint())) == 0.0);
    }

    #[test]
    fn projectors_resolve_the_identity((q, m) in frequency()) {
        let pos = projector_matrix(&q, m, EnergySign::Pos);
        let neg = projector_matrix(&q, m, EnergySign::Neg);
        prop_assert!(max_abs(&(pos + neg - Matrix4::identity())) < 1e-12);
        prop_assert!(max_abs(&(pos * neg)) < 1e-12);
        prop_assert!(max_abs(&(pos * pos - pos)) < 1e-12);
        // P₊ - P₋ = h/λ.
        let sign = h_symbol(&q, m) / Complex64::from(lambda(&q, m));
        prop_assert!(max_abs(&(pos - neg - sign)) < 1e-12);
    }

    #[test]
    fn beta_anticommutes_with_alpha(k in 0usize..3) {
        let d = dirac();
        prop_assert_eq!(d.alpha[k] * d.beta + d.beta * d.alpha[k], Matrix4::zeros());
    }

    #[test]
    fn state_norm_is_homogeneous(
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        r in prop::array::uniform3(-2i64..=2),
        amp in prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0)),
    ) {
        let ctx = FieldContext::new(3).unwrap();
        let idx = WaveletIndex3D::at_origin(ctx, r, [1, 2, 1]).unwrap();
        let a = Spinor4::from_iterator(amp.iter().map(|(x, y)| Complex64::new(*x, *y)));
        let s = SpinorWaveletState::single(idx, a);
        let c = Complex64::new(re, im);
        prop_assert!((s.scale(c).l2_norm() - c.norm() * s.l2_norm()).abs() < 1e-12);
        prop_assert!(s.h1_norm() >= s.l2_norm());
    }
}
