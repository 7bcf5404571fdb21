//! Randomized and exact invariant suites for every layer.
//!
//! Each suite draws from its own ChaCha8 stream keyed by the seed, so one
//! suite's sample count never shifts another's samples.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::causality::{
    build_initial_state, diagonal_check, literal_a, paper_literal_value, run_scan_with, tail_bound, CausalityConfig,
};
use crate::error::Result;
use crate::exec::Execution;
use crate::padic::{Ball1D, BallRelation, FieldContext, PAdicScalar, PAdicVec3, Polydisc3};
use crate::spinor::{
    charge_conj_matrix, dirac, evolution_matrix, h_symbol, h_symbol_external, lambda, lambda_a_u, max_abs,
    max_abs_spinor, plane_wave_spinor, projector_matrix, symbol_from_reals, DiracParams, EnergySign, ExternalField,
    FrequencyMagnitude, Matrix4, Spinor4,
};
use crate::state::SpinorWaveletState;
use crate::wavelet::{
    expand_ball_indicator, indicator_times_wavelet, tv_oracle, wavelet_fourier, IndicatorProduct, IntegrationOptions,
    Lcf1D, LocallyConstantFunction, Partition3, WaveletIndex, WaveletIndex1D, WaveletIndex3D,
};

pub const SUITES: [&str; 5] = [
    "padic-core",
    "wavelet-calculus",
    "spinor-algebra",
    "dirac-states",
    "causality-lab",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces every floating-point tolerance. Exact invariants ignore it.
    pub tolerance: Option<f64>,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub suite: &'static str,
    pub invariant: &'static str,
    /// Largest measured deviation; for exact invariants, the failure count.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub exact: bool,
    pub pass: bool,
}

struct Suite<'a> {
    name: &'static str,
    opts: &'a VerifyOptions,
    rng: ChaCha8Rng,
    rows: Vec<VerifyRow>,
}

impl<'a> Suite<'a> {
    fn new(name: &'static str, stream: u64, opts: &'a VerifyOptions) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(stream);
        Suite {
            name,
            opts,
            rng,
            rows: Vec::new(),
        }
    }

    fn float(&mut self, invariant: &'static str, default_tol: f64, dev: f64) {
        let tolerance = self.opts.tolerance.unwrap_or(default_tol);
        self.rows.push(VerifyRow {
            suite: self.name,
            invariant,
            max_deviation: dev,
            tolerance,
            exact: false,
            pass: dev <= tolerance,
        });
    }

    fn exact(&mut self, invariant: &'static str, failures: usize) {
        self.rows.push(VerifyRow {
            suite: self.name,
            invariant,
            max_deviation: failures as f64,
            tolerance: 0.0,
            exact: true,
            pass: failures == 0,
        });
    }
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for name in SUITES {
        rows.extend(run_suite(name, opts)?);
    }
    Ok(rows)
}

/// Runs one named suite. Unknown names yield no rows.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    match name {
        "padic-core" => padic_suite(opts),
        "wavelet-calculus" => wavelet_suite(opts),
        "spinor-algebra" => spinor_suite(opts),
        "dirac-states" => states_suite(opts),
        "causality-lab" => causality_suite(opts),
        _ => Ok(Vec::new()),
    }
}

pub fn all_pass(rows: &[VerifyRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

fn ctx3() -> FieldContext {
    FieldContext::new(3).expect("3 is prime")
}

/// Generators shared by the suites and the integration tests.
pub mod gen {
    use super::*;

    pub fn scalar<R: Rng>(rng: &mut R, ctx: FieldContext) -> PAdicScalar {
        let a: i64 = rng.random_range(-100_000..=100_000);
        let k: i64 = rng.random_range(-5..=5);
        PAdicScalar::new(ctx, a, k)
    }

    /// Canonical representative `a / p^k` with `0 ≤ a < p^k`.
    pub fn representative<R: Rng>(rng: &mut R, ctx: FieldContext, max_k: i64) -> PAdicScalar {
        let k = rng.random_range(0..=max_k);
        let modulus = (ctx.p() as i64).pow(k as u32);
        PAdicScalar::new(ctx, rng.random_range(0..modulus), k)
    }

    pub fn index_1d<R: Rng>(rng: &mut R, ctx: FieldContext, r: (i64, i64), max_k: i64) -> WaveletIndex1D {
        let j = rng.random_range(1..ctx.p());
        WaveletIndex1D::new(rng.random_range(r.0..=r.1), representative(rng, ctx, max_k), j)
            .expect("generated index is canonical")
    }

    pub fn index_3d<R: Rng>(rng: &mut R, ctx: FieldContext, r: (i64, i64), max_k: i64) -> WaveletIndex3D {
        WaveletIndex3D::new([0, 1, 2].map(|_| index_1d(rng, ctx, r, max_k))).expect("same context")
    }

    pub fn frequency<R: Rng>(rng: &mut R, ctx: FieldContext, e: (i64, i64)) -> FrequencyMagnitude {
        FrequencyMagnitude::new(ctx, [0, 1, 2].map(|_| rng.random_range(e.0..=e.1)))
    }

    pub fn complex<R: Rng>(rng: &mut R) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    pub fn spinor<R: Rng>(rng: &mut R) -> Spinor4 {
        Spinor4::new(complex(rng), complex(rng), complex(rng), complex(rng))
    }

    pub fn state<R: Rng>(
        rng: &mut R,
        ctx: FieldContext,
        max_terms: usize,
        r: (i64, i64),
        max_k: i64,
    ) -> SpinorWaveletState {
        let n = rng.random_range(1..=max_terms);
        let terms: Vec<_> = (0..n).map(|_| (index_3d(rng, ctx, r, max_k), spinor(rng))).collect();
        SpinorWaveletState::from_terms(ctx, terms).expect("same context")
    }

    /// Point inside `disc`, digits drawn down to `depth` levels below its
    /// radius.
    pub fn point_in<R: Rng>(rng: &mut R, disc: &Polydisc3, depth: i64) -> PAdicVec3 {
        let p = disc.ctx().p() as i64;
        let coords = [0, 1, 2].map(|i| {
            let ball = disc.axis(i);
            let z = rng.random_range(0..p.pow(depth as u32));
            let offset = PAdicScalar::from_int(disc.ctx(), z).mul_pow_p(-ball.radius());
            ball.center().try_add(&offset).expect("same context")
        });
        PAdicVec3(coords)
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |m, v| if v.is_nan() || v > m { v } else { m })
}

fn spinor_sum(v: &Spinor4) -> Complex64 {
    v.iter().sum()
}

/// `⟨s, t⟩` by exact integration of the pointwise product `s · conj(t)`,
/// sampled once per cell of the common constancy partition.
pub fn integrated_inner(
    s: &SpinorWaveletState,
    t: &SpinorWaveletState,
    opts: &IntegrationOptions,
) -> Result<Complex64> {
    let ctx = s.ctx();
    let indices: Vec<WaveletIndex3D> = s.terms().chain(t.terms()).map(|(k, _)| k.clone()).collect();
    if indices.is_empty() {
        return Ok(Complex64::zero());
    }
    let supports: Vec<Polydisc3> = indices.iter().map(|k| k.support()).collect();
    let bound = Polydisc3::bounding(ctx, &supports);
    let partition = Partition3::for_indices(ctx, &indices, None, opts.cell_cap)?;
    let product = LocallyConstantFunction::tabulate(&partition, opts.exec, |x| {
        s.eval(x).zip_map(&t.eval(x), |a, b| a * b.conj())
    });
    let integral = product.refine_and_integrate(&bound, opts)?;
    Ok(spinor_sum(&integral.components))
}

/// `min |x - y|` over finite digit grids of two balls, depth chosen so that
/// every shared point of nested balls appears on both grids.
fn grid_distance_1d(a: &Ball1D, b: &Ball1D) -> BigRational {
    let ctx = a.ctx();
    let p = ctx.p() as i64;
    let grid = |ball: &Ball1D, other: &Ball1D| {
        let depth = (ball.radius() - other.radius()).max(0) + 1;
        (0..p.pow(depth as u32))
            .map(|z| {
                ball.center()
                    .try_add(&PAdicScalar::from_int(ctx, z).mul_pow_p(-ball.radius()))
                    .unwrap()
            })
            .collect::<Vec<_>>()
    };
    let (ga, gb) = (grid(a, b), grid(b, a));
    let mut best: Option<BigRational> = None;
    for x in &ga {
        for y in &gb {
            let d = x.try_sub(y).unwrap().norm();
            if best.as_ref().is_none_or(|m| &d < m) {
                best = Some(d);
            }
        }
    }
    best.unwrap()
}

fn padic_suite(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut s = Suite::new("padic-core", 1, opts);
    let ctx = ctx3();

    let mut ultra = 0;
    for _ in 0..1000 {
        let x = gen::scalar(&mut s.rng, ctx);
        let y = gen::scalar(&mut s.rng, ctx);
        let (nx, ny, ns) = (x.norm(), y.norm(), x.try_add(&y)?.norm());
        let max = if nx > ny { nx.clone() } else { ny.clone() };
        if ns > max || (nx != ny && ns != max) {
            ultra += 1;
        }
    }
    s.exact("ultrametric inequality with equality for unequal norms", ultra);

    let mut frac = 0;
    let mut char_dev = Vec::new();
    let mut unit_dev = Vec::new();
    for _ in 0..100 {
        let x = gen::scalar(&mut s.rng, ctx);
        let y = gen::scalar(&mut s.rng, ctx);
        let sum = x.try_add(&y)?;
        let mut expect = x.frac_part() + y.frac_part();
        if expect >= BigRational::one() {
            expect -= BigRational::one();
        }
        if sum.frac_part() != expect {
            frac += 1;
        }
        let (cx, cy, cs) = (x.character().value, y.character().value, sum.character().value);
        char_dev.push((cs - cx * cy).norm());
        unit_dev.push((cs.norm() - 1.0).abs());
    }
    s.exact("frac_part additive mod 1", frac);
    s.float("character additive", 1e-12, max_of(char_dev));
    s.float("character unimodular", 1e-15, max_of(unit_dev));

    let rand_disc = |rng: &mut ChaCha8Rng| {
        let center = PAdicVec3([0, 1, 2].map(|_| gen::representative(rng, ctx, 3)));
        let radii = [0, 1, 2].map(|_| rng.random_range(-2..=2));
        Polydisc3::from_center(&center, radii).expect("same context")
    };
    let mut relate = 0;
    let mut haar = 0;
    let mut dist = 0;
    for trial in 0..200 {
        let a = rand_disc(&mut s.rng);
        let b = rand_disc(&mut s.rng);
        let (ab, ba) = (a.relate(&b), b.relate(&a));
        if ab != ba.swapped() || (ab == BallRelation::Equal) != (a == b) {
            relate += 1;
        }
        let c = PAdicVec3([0, 1, 2].map(|_| gen::scalar(&mut s.rng, ctx)));
        if a.translate(&c)?.measure() != a.measure() {
            haar += 1;
        }
        if trial < 20 {
            let grid = (0..3)
                .map(|i| grid_distance_1d(a.axis(i), b.axis(i)))
                .fold(BigRational::zero(), |m, d| if d > m { d } else { m });
            if grid != a.distance(&b) {
                dist += 1;
            }
        }
    }
    s.exact("ball relation symmetric", relate);
    s.exact("Haar measure translation invariant", haar);
    s.exact("ball distance matches grid minimum", dist);
    Ok(s.rows)
}

fn wavelet_suite(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut s = Suite::new("wavelet-calculus", 2, opts);
    let ctx = ctx3();
    let iopts = IntegrationOptions::with_exec(opts.exec);

    let mut ortho = Vec::new();
    for k in 0..50 {
        let a = gen::index_3d(&mut s.rng, ctx, (-3, 3), 2);
        let b = if k % 5 == 0 {
            a.clone()
        } else if k % 5 == 1 {
            let mut axes = a.axes().clone();
            axes[k % 3] = gen::index_1d(&mut s.rng, ctx, (-3, 3), 2);
            WaveletIndex3D::new(axes)?
        } else {
            gen::index_3d(&mut s.rng, ctx, (-3, 3), 2)
        };
        let one = Spinor4::new(
            Complex64::one(),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::zero(),
        );
        let sa = SpinorWaveletState::single(a.clone(), one);
        let sb = SpinorWaveletState::single(b.clone(), one);
        let expect = if a == b { 1.0 } else { 0.0 };
        ortho.push((integrated_inner(&sa, &sb, &iopts)? - expect).norm());
    }
    s.float("orthonormality via integrator", 1e-12, max_of(ortho));

    let mut eigen = Vec::new();
    for _ in 0..10 {
        let idx = gen::index_1d(&mut s.rng, ctx, (-3, 3), 2);
        let f = Lcf1D::from_wavelet(&idx);
        let lam = ctx.pow_f64(1 - idx.r());
        for k in 0..10 {
            let z = if k < 6 {
                let off = PAdicScalar::from_int(ctx, s.rng.random_range(0..27)).mul_pow_p(-idx.r());
                idx.support().center().try_add(&off)?
            } else {
                gen::representative(&mut s.rng, ctx, 3).mul_pow_p(-idx.r() - 1)
            };
            eigen.push((tv_oracle(&f, &z)? - idx.eval(&z) * lam).norm());
        }
    }
    s.float("Taibleson-Vladimirov eigenvalue identity", 1e-10, max_of(eigen));

    let f = Lcf1D::indicator(Ball1D::centered(ctx, 0));
    let shells = tv_oracle(&f, &PAdicScalar::zero(ctx))?;
    let series: f64 = (1..=20)
        .flat_map(|r| (1..3).map(move |j| (r, j)))
        .map(|(r, j)| {
            let idx = WaveletIndex1D::at_origin(ctx, r, j).unwrap();
            ctx.pow_half_f64(-r) * ctx.pow_f64(1 - r) * idx.eval(&PAdicScalar::zero(ctx)).re
        })
        .sum();
    s.float(
        "shell sums match eigen-expansion",
        1e-10,
        (shells.re - series).abs() + shells.im.abs(),
    );

    let mut mean = Vec::new();
    for _ in 0..20 {
        let idx = gen::index_1d(&mut s.rng, ctx, (-3, 3), 2);
        let f = Lcf1D::from_wavelet(&idx);
        mean.push(f.integrate_over(&idx.support()).norm());
    }
    s.float("zero mean", 1e-12, max_of(mean));

    let mut parseval = Vec::new();
    for _ in 0..10 {
        let st = gen::state(&mut s.rng, ctx, 20, (-2, 2), 1);
        let lcf = st.to_lcf(None, &iopts)?;
        let bound = Polydisc3::bounding(ctx, &st.terms().map(|(k, _)| k.support()).collect::<Vec<_>>());
        let integral = lcf.refine_and_integrate(&bound, &iopts)?;
        parseval.push((integral.norm_sq - st.l2_norm_sq()).abs());
    }
    s.float("Parseval via integrator", 1e-12, max_of(parseval));

    let mut tri = 0;
    for r0 in -2..=2 {
        let ball = Ball1D::centered(ctx, -r0);
        for r in -4..=4 {
            for k in 0..=2 {
                for a in 0..3i64.pow(k as u32) {
                    let n = PAdicScalar::new(ctx, a, k);
                    let idx = WaveletIndex1D::new(r, n, 1)?;
                    let support = idx.support();
                    let expect = if support.is_subset_of(&ball) {
                        IndicatorProduct::Unchanged
                    } else if ball.is_subset_of(&support) {
                        IndicatorProduct::ScaledIndicator { exponent_half: -r }
                    } else {
                        IndicatorProduct::Zero
                    };
                    if indicator_times_wavelet(r0, &idx) != expect {
                        tri += 1;
                    }
                }
            }
        }
    }
    s.exact("indicator product trichotomy", tri);

    let mut coeff = Vec::new();
    let mut ledger = 0;
    for (r0, r_max) in [(0, 4), (1, 2), (-1, 3)] {
        let e = expand_ball_indicator(ctx, r0, 1, r_max)?;
        let ball = Ball1D::centered(ctx, -r0);
        let phi = Lcf1D::new(ctx, vec![(ball.clone(), Complex64::from(ctx.pow_half_f64(r0)))])?;
        let mut sum = BigRational::zero();
        for t in &e.terms {
            let WaveletIndex::One(idx) = &t.index else { continue };
            let psi = Lcf1D::from_wavelet(idx);
            let inner: Complex64 = psi.cells().iter().map(|(b, v)| phi.integrate_over(b) * v.conj()).sum();
            coeff.push((inner - t.coefficient).norm());
            sum += &t.coefficient_sq;
        }
        if &sum + &e.truncation.tail_norm_sq != BigRational::one() {
            ledger += 1;
        }
    }
    let e = expand_ball_indicator(ctx, 0, 1, 4)?;
    if e.retained_norm_sq != BigRational::new(80.into(), 81.into()) {
        ledger += 1;
    }
    s.float("expansion coefficients match integrator", 1e-12, max_of(coeff));
    s.exact("expansion norm ledger exact", ledger);

    let mut fourier = Vec::new();
    let mut sphere = 0;
    for k in 0..30 {
        let idx = gen::index_1d(&mut s.rng, ctx, (-2, 2), 2);
        let desc = wavelet_fourier(&idx);
        let q = if k % 2 == 0 {
            let off = PAdicScalar::from_int(ctx, s.rng.random_range(0..27)).mul_pow_p(-desc.support.radius());
            desc.support.center().try_add(&off)?
        } else {
            gen::representative(&mut s.rng, ctx, 2).mul_pow_p(idx.r() - 2)
        };
        if desc.support.contains_point(&q) && q.norm_exponent() != Some(1 - idx.r()) {
            sphere += 1;
        }
        let fine = match q.norm_exponent() {
            Some(e) => (idx.r() - 1).min(-e),
            None => idx.r() - 1,
        };
        let mut cells = vec![idx.support()];
        while cells[0].radius() > fine {
            cells = cells.iter().flat_map(|b| b.children()).collect();
        }
        let w = ctx.pow_f64(fine);
        let direct: Complex64 = cells
            .iter()
            .map(|b| idx.eval(b.center()) * q.try_mul(b.center()).unwrap().character().value * w)
            .sum();
        fourier.push((direct - desc.eval(&q)).norm());
    }
    s.float("Fourier closed form matches character sum", 1e-12, max_of(fourier));
    s.exact("Fourier support on sphere p^(1-r)", sphere);
    Ok(s.rows)
}

fn spinor_suite(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut s = Suite::new("spinor-algebra", 3, opts);
    let ctx = ctx3();
    let id = Matrix4::identity();
    let d = dirac();

    s.float("Dirac algebra", 1e-15, d.algebra_deviation());

    let mut fw = Vec::new();
    let mut unitary = Vec::new();
    let mut polar = Vec::new();
    let mut herm = Vec::new();
    let mut below = 0;
    for _ in 0..100 {
        let q = gen::frequency(&mut s.rng, ctx, (-4, 4));
        let m = s.rng.random_range(0.0..10.0);
        let h = h_symbol(&q, m);
        let dg = lambda_a_u(&q, m);
        let lam = Complex64::from(dg.lambda);
        fw.push(max_abs(&(dg.u_inv * h * dg.u - d.beta * lam)));
        unitary.push(max_abs(&(dg.u * dg.u.adjoint() - id)).max(max_abs(&(dg.u * dg.u_inv - id))));
        polar.push(max_abs(&(h * h - id * lam * lam)) / (dg.lambda * dg.lambda));
        herm.push(max_abs(&(h - h.adjoint())));
        if dg.lambda < m {
            below += 1;
        }
    }
    s.float("diagonal form u^-1 h u = beta lambda", 1e-12, max_of(fw));
    s.float("u unitary", 1e-12, max_of(unitary));
    s.float("polar decomposition |h| = lambda", 1e-12, max_of(polar));
    s.float("h Hermitian", 1e-15, max_of(herm));
    s.exact("lambda >= m", below);

    let mut waves = Vec::new();
    let mut proj = Vec::new();
    for _ in 0..50 {
        let q = gen::frequency(&mut s.rng, ctx, (-4, 4));
        let m = s.rng.random_range(0.0..10.0);
        let h = h_symbol(&q, m);
        let lam = lambda(&q, m);
        for k in 1..=4u8 {
            let w = plane_wave_spinor(k, &q, m);
            let sign = if k <= 2 { 1.0 } else { -1.0 };
            waves.push(max_abs_spinor(&(h * w - w * Complex64::from(sign * lam))) / lam);
        }
        let pp = projector_matrix(&q, m, EnergySign::Pos);
        let pn = projector_matrix(&q, m, EnergySign::Neg);
        proj.push(
            [
                max_abs(&(pp * pp - pp)),
                max_abs(&(pn * pn - pn)),
                max_abs(&(pp * pn)),
                max_abs(&(pp + pn - id)),
                max_abs(&(pp - pp.adjoint())),
                max_abs_spinor(&(pp * plane_wave_spinor(3, &q, m))),
            ]
            .into_iter()
            .fold(0.0, f64::max),
        );
    }
    s.float("plane waves h w = +-lambda w", 1e-12, max_of(waves));
    s.float("projector algebra", 1e-12, max_of(proj));

    let mut unit_ev = Vec::new();
    let mut group = Vec::new();
    let mut series = Vec::new();
    let mut phase = Vec::new();
    for _ in 0..50 {
        let q = gen::frequency(&mut s.rng, ctx, (-2, 2));
        let m = s.rng.random_range(0.0..3.0);
        let lam = lambda(&q, m);
        let (t1, t2) = (s.rng.random_range(-5.0..5.0), s.rng.random_range(-5.0..5.0));
        let u1 = evolution_matrix(&q, m, t1);
        unit_ev.push(max_abs(&(u1 * u1.adjoint() - id)));
        group.push(max_abs(
            &(u1 * evolution_matrix(&q, m, t2) - evolution_matrix(&q, m, t1 + t2)),
        ));
        let v = gen::spinor(&mut s.rng);
        let pv = projector_matrix(&q, m, EnergySign::Pos) * v;
        phase.push(max_abs_spinor(&(u1 * pv - pv * Complex64::new(0.0, -lam * t1).exp())));
        let t = s.rng.random_range(-5.0..5.0) / lam;
        let a = h_symbol(&q, m) * Complex64::new(0.0, -t);
        let mut term = id;
        let mut sum = id;
        for n in 1..=40 {
            term = term * a / Complex64::from(n as f64);
            sum += term;
        }
        series.push(max_abs(&(sum - evolution_matrix(&q, m, t))));
    }
    s.float("evolution unitary", 1e-12, max_of(unit_ev));
    s.float("evolution group law", 1e-11, max_of(group));
    s.float("evolution phase on positive energy", 1e-12, max_of(phase));
    s.float("evolution matches power series", 1e-10, max_of(series));

    let uc = charge_conj_matrix();
    let imag = uc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    s.float(
        "U_C real and orthogonal",
        1e-15,
        imag.max(max_abs(&(uc * uc.transpose() - id)))
            .max(max_abs(&(uc * uc - id))),
    );

    let mut conj_free = Vec::new();
    let mut conj_ext = Vec::new();
    let mut reflect_free = Vec::new();
    let mut reflect_ext = Vec::new();
    for _ in 0..50 {
        let q = gen::frequency(&mut s.rng, ctx, (-4, 4));
        let m = s.rng.random_range(0.0..10.0);
        let h = h_symbol(&q, m);
        let flipped_q = q.values().map(|x| -x);
        let conj_h = uc * h.conjugate() * uc.transpose();
        conj_free.push(max_abs(&(conj_h + h)));
        reflect_free.push(max_abs(&(conj_h + symbol_from_reals(flipped_q, m))));
        let field = ExternalField {
            charge: s.rng.random_range(-2.0..2.0),
            vector_potential: [0, 1, 2].map(|_| s.rng.random_range(-2.0..2.0)),
            scalar_potential: s.rng.random_range(-2.0..2.0),
        };
        let opposite = ExternalField {
            charge: -field.charge,
            ..field
        };
        let he = h_symbol_external(
            &q,
            &DiracParams {
                mass: m,
                field: Some(field),
            },
        );
        let ho = h_symbol_external(
            &q,
            &DiracParams {
                mass: m,
                field: Some(opposite),
            },
        );
        let conj_he = uc * he.conjugate() * uc.transpose();
        conj_ext.push(max_abs(&(conj_he + ho)));
        let k = [0, 1, 2].map(|i| flipped_q[i] + field.charge * field.vector_potential[i]);
        let ho_reflected = symbol_from_reals(k, m) - id * Complex64::from(field.charge * field.scalar_potential);
        reflect_ext.push(max_abs(&(conj_he + ho_reflected)));
    }
    s.float("U_C conj(h(q)) U_C^-1 = -h(q)", 1e-12, max_of(conj_free));
    s.float("U_C conj(H(e)) U_C^-1 = -H(-e)", 1e-12, max_of(conj_ext));
    s.float("U_C conj(h(q)) U_C^-1 = -h(-q)", 1e-12, max_of(reflect_free));
    s.float("U_C conj(H(e; q)) U_C^-1 = -H(-e; -q)", 1e-12, max_of(reflect_ext));
    Ok(s.rows)
}

fn states_suite(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut s = Suite::new("dirac-states", 4, opts);
    let ctx = ctx3();
    let iopts = IntegrationOptions::with_exec(opts.exec);

    let mut inner = Vec::new();
    let mut parseval = Vec::new();
    for _ in 0..10 {
        let a = gen::state(&mut s.rng, ctx, 20, (-2, 2), 1);
        let b = gen::state(&mut s.rng, ctx, 20, (-2, 2), 1);
        let u = a.try_add(&b.scale(gen::complex(&mut s.rng)))?;
        inner.push((integrated_inner(&a, &u, &iopts)? - a.l2_inner(&u)?).norm());
        parseval.push((integrated_inner(&u, &u, &iopts)?.re - u.l2_norm_sq()).abs());
    }
    s.float("inner product matches integrator", 1e-12, max_of(inner));
    s.float("Parseval norm matches integrator", 1e-12, max_of(parseval));

    let mut sym = Vec::new();
    let mut split = Vec::new();
    let mut idem = Vec::new();
    let mut norm = Vec::new();
    let mut group = Vec::new();
    let mut commute = Vec::new();
    let mut cc = Vec::new();
    let mut swap = Vec::new();
    let mut mass_flip = Vec::new();
    let mut positive = Vec::new();
    let mut homog = Vec::new();
    let mut h1 = 0;
    for _ in 0..20 {
        let a = gen::state(&mut s.rng, ctx, 30, (-2, 3), 2);
        let b = gen::state(&mut s.rng, ctx, 30, (-2, 3), 2);
        let m = s.rng.random_range(0.0..3.0);
        let scale = a.l2_norm_sq().max(1.0);
        let lhs = a.apply_h0(m).l2_inner(&b)?;
        let rhs = a.l2_inner(&b.apply_h0(m))?;
        let lam_max = a.terms().map(|(k, _)| lambda(&k.frequency(), m)).fold(1.0, f64::max);
        sym.push((lhs - rhs).norm() / (lam_max * a.l2_norm() * b.l2_norm()));

        let pos = a.project_energy(m, EnergySign::Pos);
        let neg = a.project_energy(m, EnergySign::Neg);
        let back = pos.try_add(&neg)?.try_add(&a.scale(-Complex64::one()))?;
        split.push(
            (back.l2_norm() / a.l2_norm())
                .max(pos.l2_inner(&neg)?.norm() / scale)
                .max((pos.l2_norm_sq() + neg.l2_norm_sq() - a.l2_norm_sq()).abs() / scale),
        );
        let twice = pos.project_energy(m, EnergySign::Pos);
        idem.push(twice.try_add(&pos.scale(-Complex64::one()))?.l2_norm() / a.l2_norm());

        let (t1, t2) = (s.rng.random_range(-3.0..3.0), s.rng.random_range(-3.0..3.0));
        let e1 = a.evolve(m, t1);
        norm.push((e1.l2_norm() - a.l2_norm()).abs() / a.l2_norm());
        let e12 = e1.evolve(m, t2);
        let direct = a.evolve(m, t1 + t2);
        group.push(e12.try_add(&direct.scale(-Complex64::one()))?.l2_norm() / a.l2_norm());
        let ep = a.evolve(m, t1).project_energy(m, EnergySign::Pos);
        commute.push(ep.try_add(&pos.evolve(m, t1).scale(-Complex64::one()))?.l2_norm() / a.l2_norm());

        let c = a.charge_conjugate();
        cc.push(c.charge_conjugate().try_add(&a.scale(-Complex64::one()))?.l2_norm() / a.l2_norm());
        let ea = a.l2_inner(&a.apply_h0(m))?;
        let ec = c.l2_inner(&c.apply_h0(m))?;
        swap.push((ec + ea).norm() / (lam_max * scale));
        let e_flip = a.l2_inner(&a.apply_h0(-m))?;
        mass_flip.push((ec - e_flip).norm() / (lam_max * scale));

        let e_pos = pos.l2_inner(&pos.apply_h0(m))?.re;
        positive.push((m * pos.l2_norm_sq() - e_pos).max(0.0));

        let z = gen::complex(&mut s.rng);
        homog.push((a.scale(z).l2_norm() - z.norm() * a.l2_norm()).abs() / a.l2_norm());
        if a.h1_norm() < a.l2_norm() {
            h1 += 1;
        }
    }
    s.float("H0 symmetric", 1e-12, max_of(sym));
    s.float("energy projectors split orthogonally", 1e-12, max_of(split));
    s.float("energy projection idempotent", 1e-12, max_of(idem));
    s.float("evolution preserves norm", 1e-12, max_of(norm));
    s.float("evolution group law", 1e-11, max_of(group));
    s.float("evolution commutes with projectors", 1e-12, max_of(commute));
    s.float("charge conjugation involutive", 1e-12, max_of(cc));
    s.float("charge conjugation swaps energy sign", 1e-11, max_of(swap));
    s.float("charge conjugation maps H0(m) to H0(-m)", 1e-11, max_of(mass_flip));
    s.float("positive energy bounded below by m", 1e-10, max_of(positive));
    s.float("scaling homogeneous", 1e-12, max_of(homog));
    s.exact("H1 norm dominates L2 norm", h1);

    let mut pointwise = Vec::new();
    for _ in 0..10 {
        let a = gen::state(&mut s.rng, ctx, 10, (-2, 2), 1);
        let c = a.charge_conjugate();
        let uc = charge_conj_matrix();
        let (k, _) = a.terms().next().unwrap();
        let x = gen::point_in(&mut s.rng, &k.support(), 2);
        let v = a.eval(&x);
        let w = c.eval(&x);
        pointwise.push(max_abs_spinor(&(w - uc * v.conjugate())).max((w.norm_squared() - v.norm_squared()).abs()));
    }
    s.float("charge conjugation pointwise", 1e-12, max_of(pointwise));

    let mut own = Vec::new();
    let mut eig = Vec::new();
    let mut disjoint = 0;
    let mut ledger = 0;
    for k in 0..20 {
        let idx = gen::index_3d(&mut s.rng, ctx, (-2, 2), 2);
        let m = s.rng.random_range(0.0..3.0);
        let sign = if k % 2 == 0 { EnergySign::Pos } else { EnergySign::Neg };
        let st = SpinorWaveletState::localized_plane_wave(&idx, m, sign);
        let lam = lambda(&idx.frequency(), m);
        let hs = st
            .apply_h0(m)
            .try_add(&st.scale(Complex64::from(-sign.factor() * lam)))?;
        eig.push(hs.l2_norm() / lam);
        let support = idx.support();
        let loc = st.localization_probability(&support, &iopts)?;
        own.push((loc.probability - 1.0).abs());
        if loc.measure != support.measure() {
            ledger += 1;
        }
        let far = support.translate(&PAdicVec3([0, 1, 2].map(|i| {
            if i == k % 3 {
                PAdicScalar::pow_p(ctx, -support.radii()[i] - 1)
            } else {
                PAdicScalar::zero(ctx)
            }
        })))?;
        let away = st.localization_probability(&far, &iopts)?;
        if away.probability != 0.0 || !away.measure.is_zero() {
            disjoint += 1;
        }
    }
    s.float("localized plane wave is an eigenvector", 1e-12, max_of(eig));
    s.float("localized probability one on support", 1e-12, max_of(own));
    s.exact("localized support measure exact", ledger);
    s.exact("localized probability zero off support", disjoint);

    let mut shared = Vec::new();
    for _ in 0..10 {
        let a = gen::index_3d(&mut s.rng, ctx, (0, 2), 1);
        let mut axes = a.axes().clone();
        for ax in axes.iter_mut() {
            let r = ax.r() - 1;
            let n = ax.support().center().mul_pow_p(r).frac_scalar();
            *ax = WaveletIndex1D::new(r, n, ax.j())?;
        }
        let b = WaveletIndex3D::new(axes)?;
        let st = SpinorWaveletState::from_terms(
            ctx,
            [(a.clone(), gen::spinor(&mut s.rng)), (b, gen::spinor(&mut s.rng))],
        )?;
        let cell = Polydisc3::new([0, 1, 2].map(|i| Ball1D::new(a.support().axis(i).center().clone(), a.r()[i] - 2)))?;
        let x = cell.center();
        let oracle = st.eval(&x).norm_squared() * crate::padic::haar_measure(&cell).to_f64_lossy();
        let p = st.localization_probability(&cell, &iopts)?.probability;
        shared.push((p - oracle).abs());
    }
    s.float(
        "two-wavelet probability matches pointwise oracle",
        1e-12,
        max_of(shared),
    );
    Ok(s.rows)
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn causality_suite(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut s = Suite::new("causality-lab", 5, opts);
    let iopts = IntegrationOptions::with_exec(opts.exec);
    let cfg = CausalityConfig {
        r_max: 4,
        ..Default::default()
    };
    let val = cfg.validate_for_scan()?;

    let rep = run_scan_with(&cfg, &iopts)?;
    s.exact(
        "ball distance equals p^l0 |b|",
        usize::from(!rep.distance_matches_formula),
    );
    s.exact(
        "probability positive at every t",
        rep.rows.iter().filter(|r| !r.positive).count(),
    );
    s.float(
        "probability at most one",
        1e-10,
        max_of(rep.rows.iter().map(|r| (r.probability - 1.0).max(0.0))),
    );

    let init = build_initial_state(&cfg)?;
    let pos = init.state.project_energy(cfg.m, EnergySign::Pos);
    let diff = pos.try_add(&init.state.scale(-Complex64::one()))?.l2_norm();
    s.float("initial state has positive energy", 1e-12, diff);
    s.float("initial state unit norm", 1e-12, (init.state.l2_norm() - 1.0).abs());
    let axis = BigRational::one() - val.ctx.pow_rational(-cfg.r_max - cfg.l);
    s.exact(
        "expansion norm (1 - p^-(r_max+L))^3",
        usize::from(init.expansion_norm_sq != &axis * &axis * &axis),
    );

    let mut mono = 0;
    let mut prev: Option<BigRational> = None;
    for r in 2..=12 {
        let tb = tail_bound(&CausalityConfig {
            r_max: r,
            ..cfg.clone()
        })?;
        if !tb.is_positive() || prev.as_ref().is_some_and(|p| &tb.amplitude_tail_sq > p) {
            mono += 1;
        }
        prev = Some(tb.amplitude_tail_sq);
    }
    s.exact("tail bound positive and monotone", mono);

    let (integrated, closed) = diagonal_check(&cfg, &iopts)?;
    s.float(
        "diagonal part matches closed form",
        1e-12,
        (integrated - closed).abs() / closed,
    );

    let literal = paper_literal_value(&cfg, cfg.r_max, 0.0)?;
    let start = cfg.literal_start();
    let mut brute = 0.0;
    for r3 in (start..=cfg.r_max).rev() {
        for r2 in (start..=cfg.r_max).rev() {
            for r1 in (start..=cfg.r_max).rev() {
                let q = FrequencyMagnitude::from_scales(val.ctx, [r1, r2, r3]);
                let a = Spinor4::from_column_slice(&cfg.a.map(Complex64::from));
                let amp = literal_a(&q, cfg.m) * a;
                let w = val.ctx.pow_half_f64(-3 * cfg.l - (r1 + r2 + r3));
                brute += 8.0 * w * amp.norm_squared();
            }
        }
    }
    s.float(
        "literal display matches re-summation",
        1e-12,
        (literal - brute).abs() / brute,
    );
    Ok(s.rows)
}
