//! Acceptance run: one PASS/FAIL line per criterion with the measured values.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! The process fails unless the set of failing criteria is exactly
//! `KNOWN_FAILURES`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use padic_dirac::causality::{run_scan, CausalityConfig};
use padic_dirac::padic::{FieldContext, PAdicScalar, PAdicVec3, Polydisc3};
use padic_dirac::spinor::{charge_conj_matrix, dirac, lambda_a_u, plane_wave_spinor, EnergySign, Matrix4};
use padic_dirac::state::SpinorWaveletState;
use padic_dirac::verify::{gen, integrated_inner};
use padic_dirac::wavelet::{expand_ball_indicator, tv_oracle, IntegrationOptions, Lcf1D, WaveletIndex, WaveletIndex1D};
use padic_dirac_cli::execute;

/// `U_C conj(h(q)) U_C^-1 = -h(q)` and the energy-sign swap do not hold for
/// this operator: `C H0(m) C^-1 = H0(-m)`. See the README.
const KNOWN_FAILURES: &[&str] = &["charge conjugation"];

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn ctx3() -> FieldContext {
    FieldContext::new(3).unwrap()
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20_261_018);
    r.set_stream(stream);
    r
}

fn timed(name: &'static str, limit: Option<f64>, f: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match limit {
        Some(l) if elapsed.as_secs_f64() >= l => (false, format!("{detail}; over the {l} s limit")),
        Some(l) => (ok, format!("{detail}; limit {l} s")),
        None => (ok, detail),
    };
    Check {
        name,
        pass,
        detail,
        elapsed,
    }
}

fn max_abs(m: &Matrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[[m, σ·k], [σ·k, -m]]` written out entry by entry.
#[rustfmt::skip]
fn symbol(k: [f64; 3], m: f64) -> Matrix4 {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let [a, b, z] = k;
    // σ·k = [[z, a - ib], [a + ib, -z]]
    Matrix4::from_row_slice(&[
        c(m, 0.0), c(0.0, 0.0), c(z, 0.0), c(a, -b),
        c(0.0, 0.0), c(m, 0.0), c(a, b), c(-z, 0.0),
        c(z, 0.0), c(a, -b), c(-m, 0.0), c(0.0, 0.0),
        c(a, b), c(-z, 0.0), c(0.0, 0.0), c(-m, 0.0),
    ])
}

fn diff_norm(a: &SpinorWaveletState, b: &SpinorWaveletState) -> f64 {
    a.try_add(&b.scale(Complex64::new(-1.0, 0.0))).unwrap().l2_norm()
}

fn orthonormality() -> Check {
    timed("wavelet orthonormality", Some(30.0), || {
        let ctx = ctx3();
        let mut rng = rng(1);
        let e0 = |idx| {
            SpinorWaveletState::single(
                idx,
                padic_dirac::spinor::Spinor4::new(
                    Complex64::new(1.0, 0.0),
                    Complex64::zero(),
                    Complex64::zero(),
                    Complex64::zero(),
                ),
            )
        };
        let opts = IntegrationOptions::default();
        let mut worst: f64 = 0.0;
        let mut diagonal = 0;
        for i in 0..50 {
            let a = gen::index_3d(&mut rng, ctx, (-3, 3), 2);
            let b = match i % 5 {
                0 => a.clone(),
                1 => {
                    let j = [0, 1, 2].map(|_| rng.random_range(1..3));
                    padic_dirac::wavelet::WaveletIndex3D::from_parts(a.r(), [0, 1, 2].map(|k| a.axis(k).n().clone()), j)
                        .unwrap()
                }
                2 => {
                    let r = [0, 1, 2].map(|k| (a.r()[k] + rng.random_range(-1..=1)).clamp(-3, 3));
                    let n = [0, 1, 2].map(|k| {
                        let n = a.axis(k).n();
                        n.mul_pow_p(-r[k]).frac_scalar().mul_pow_p(r[k])
                    });
                    padic_dirac::wavelet::WaveletIndex3D::from_parts(r, n, a.j()).unwrap()
                }
                _ => gen::index_3d(&mut rng, ctx, (-3, 3), 2),
            };
            let delta = if a == b { 1.0 } else { 0.0 };
            diagonal += (a == b) as usize;
            let ip = integrated_inner(&e0(a), &e0(b), &opts).unwrap();
            worst = worst.max((ip - Complex64::from(delta)).norm());
        }
        (
            worst <= 1e-12,
            format!("max |<a,b> - delta_ab| = {worst:.3e} over 50 pairs ({diagonal} diagonal), tol 1e-12"),
        )
    })
}

fn tv_eigen() -> Check {
    timed("Taibleson-Vladimirov eigenvalue identity", Some(10.0), || {
        let ctx = ctx3();
        let mut rng = rng(2);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let idx = gen::index_1d(&mut rng, ctx, (-3, 3), 2);
            let f = Lcf1D::from_wavelet(&idx);
            let support = idx.support();
            let eigen = ctx.pow_f64(1 - idx.r());
            for k in 0..10 {
                let z = if k < 7 {
                    let digits = rng.random_range(0..27);
                    support
                        .center()
                        .try_add(&PAdicScalar::from_int(ctx, digits).mul_pow_p(-support.radius()))
                        .unwrap()
                } else {
                    gen::scalar(&mut rng, ctx)
                };
                let lhs = tv_oracle(&f, &z).unwrap();
                let rhs = idx.eval(&z) * eigen;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        (
            worst <= 1e-10,
            format!("max |D psi - p^(1-r) psi| = {worst:.3e} at 10 x 10 points, tol 1e-10"),
        )
    })
}

fn diagonalization() -> Check {
    timed("symbol diagonalization", Some(1.0), || {
        let ctx = ctx3();
        let mut rng = rng(3);
        let beta = dirac().beta;
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let q = gen::frequency(&mut rng, ctx, (-4, 4));
            let m: f64 = rng.random_range(0.0..10.0);
            let d = lambda_a_u(&q, m);
            let h = symbol(q.values(), m);
            let dev = d.u_inv * h * d.u - beta * Complex64::from(d.lambda);
            worst = worst.max(max_abs(&dev));
        }
        (
            worst < 1e-12,
            format!("max |u^-1 h u - beta lambda| = {worst:.3e} over 100 draws, tol 1e-12"),
        )
    })
}

fn plane_waves() -> Check {
    timed("plane waves", Some(1.0), || {
        let ctx = ctx3();
        let mut rng = rng(4);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let q = gen::frequency(&mut rng, ctx, (-4, 4));
            let m: f64 = rng.random_range(0.0..10.0);
            let h = symbol(q.values(), m);
            let [a, b, c] = q.values();
            let lam = (a * a + b * b + c * c + m * m).sqrt();
            for k in 1..=4u8 {
                let w = plane_wave_spinor(k, &q, m);
                let sign = if k <= 2 { 1.0 } else { -1.0 };
                let dev = h * w - w * Complex64::from(sign * lam);
                worst = worst.max(dev.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        (
            worst <= 1e-12,
            format!("max |h w_k -+ lambda w_k| = {worst:.3e} over 50 draws, tol 1e-12"),
        )
    })
}

fn projectors_and_unitarity() -> Check {
    timed("projector algebra and unitarity", Some(5.0), || {
        let ctx = ctx3();
        let mut rng = rng(5);
        let (mut proj, mut evo) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let s = gen::state(&mut rng, ctx, 30, (-3, 3), 2);
            let m: f64 = rng.random_range(0.0..5.0);
            let (t1, t2): (f64, f64) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
            let pos = s.project_energy(m, EnergySign::Pos);
            let neg = s.project_energy(m, EnergySign::Neg);
            proj = proj
                .max(diff_norm(&pos.project_energy(m, EnergySign::Pos), &pos))
                .max(pos.project_energy(m, EnergySign::Neg).l2_norm())
                .max(diff_norm(&pos.try_add(&neg).unwrap(), &s));
            let st = s.evolve(m, t1);
            evo = evo
                .max((st.l2_norm() - s.l2_norm()).abs())
                .max(diff_norm(&st.evolve(m, t2), &s.evolve(m, t1 + t2)));
        }
        (
            proj <= 1e-11 && evo <= 1e-11,
            format!("projector dev {proj:.3e}, norm/group-law dev {evo:.3e} over 20 states of <= 30 terms, tol 1e-11"),
        )
    })
}

fn indicator_expansion() -> Check {
    timed("indicator expansion coefficients", Some(10.0), || {
        let mut worst: f64 = 0.0;
        let mut ledger = String::new();
        for (p, r0, r_max) in [(3u64, 0i64, 4i64), (5, -1, 3), (3, 2, 1)] {
            let ctx = FieldContext::new(p).unwrap();
            let exp = expand_ball_indicator(ctx, r0, 1, r_max).unwrap();
            let ball = padic_dirac::padic::Ball1D::centered(ctx, -r0);
            let amp = ctx.pow_half_f64(r0);
            let mut listed = 0;
            for term in &exp.terms {
                let WaveletIndex::One(idx) = &term.index else {
                    unreachable!()
                };
                let ip = Lcf1D::from_wavelet(idx).integrate_over(&ball).conj() * amp;
                worst = worst.max((ip - Complex64::from(term.coefficient)).norm());
                listed += 1;
            }
            // Every omitted index at these scales has a vanishing coefficient.
            for r in (1 - r0 - 2)..=r_max {
                for j in 1..ctx.p() {
                    for n in 0..(p as i64).pow(2) {
                        let n = PAdicScalar::new(ctx, n, 2).mul_pow_p(r).frac_scalar().mul_pow_p(-r);
                        let Ok(idx) = WaveletIndex1D::new(r, n, j) else {
                            continue;
                        };
                        if exp.terms.iter().any(|t| t.index == WaveletIndex::One(idx.clone())) {
                            continue;
                        }
                        let ip = Lcf1D::from_wavelet(&idx).integrate_over(&ball) * amp;
                        worst = worst.max(ip.norm());
                    }
                }
            }
            if (p, r0, r_max) == (3, 0, 4) {
                ledger = padic_dirac::padic::format_rational(&exp.retained_norm_sq);
                assert_eq!(listed, 8);
            }
        }
        (
            worst <= 1e-12 && ledger == "80/81",
            format!("max |coefficient - integrator| = {worst:.3e}, tol 1e-12; norm^2 (p=3, R0=0, r_max=4) = {ledger} (want 80/81)"),
        )
    })
}

fn charge_conjugation() -> Check {
    timed("charge conjugation", Some(5.0), || {
        let ctx = ctx3();
        let mut rng = rng(7);
        let uc = charge_conj_matrix();
        let uc_inv = uc.try_inverse().unwrap();
        let (mut involution, mut flip, mut reflected, mut swap, mut mass_flip) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..20 {
            let q = gen::frequency(&mut rng, ctx, (-3, 3)).values();
            let m: f64 = rng.random_range(0.0..5.0);
            let h = symbol(q, m);
            let conj = uc * h.map(|z| z.conj()) * uc_inv;
            flip = flip.max(max_abs(&(conj + h)));
            reflected = reflected.max(max_abs(&(conj + symbol(q.map(|x| -x), m))));

            let s = gen::state(&mut rng, ctx, 10, (-3, 3), 2);
            let cs = s.charge_conjugate();
            involution = involution.max(diff_norm(&cs.charge_conjugate(), &s));
            let e_s = s.l2_inner(&s.apply_h0(m)).unwrap();
            let e_cs = cs.l2_inner(&cs.apply_h0(m)).unwrap();
            swap = swap.max((e_cs + e_s).norm());
            let e_s_neg_mass = s.l2_inner(&s.apply_h0(-m)).unwrap();
            mass_flip = mass_flip.max((e_cs - e_s_neg_mass).norm());
        }
        (
            involution <= 1e-12 && flip <= 1e-12 && swap <= 1e-11,
            format!(
                "C^2 = 1 dev {involution:.3e} (tol 1e-12); U_C conj(h(q)) U_C^-1 = -h(q) dev {flip:.3e} (tol 1e-12); \
                 <Cs,H0 Cs> = -<s,H0 s> dev {swap:.3e} (tol 1e-11); what holds: U_C conj(h(q)) U_C^-1 = -h(-q) dev {reflected:.3e}, \
                 <Cs,H0(m) Cs> = <s,H0(-m) s> dev {mass_flip:.3e}"
            ),
        )
    })
}

fn localization() -> Check {
    timed("localized plane waves", Some(5.0), || {
        let ctx = ctx3();
        let mut rng = rng(8);
        let opts = IntegrationOptions::default();
        let (mut own, mut off) = (0.0f64, 0.0f64);
        let mut ledger_ok = true;
        for i in 0..30 {
            let idx = gen::index_3d(&mut rng, ctx, (-3, 3), 2);
            let m: f64 = rng.random_range(0.0..5.0);
            let sign = if i % 2 == 0 { EnergySign::Pos } else { EnergySign::Neg };
            let s = SpinorWaveletState::localized_plane_wave(&idx, m, sign);
            let support = idx.support();
            let loc = s.localization_probability(&support, &opts).unwrap();
            own = own.max((loc.probability - 1.0).abs());
            ledger_ok &= loc.measure == support.measure();
            for grow in [-1i64, 0, 2] {
                let axis = i % 3;
                let radii = support.radii().map(|r| r + grow);
                let mut shift = [0, 1, 2].map(|_| PAdicScalar::zero(ctx));
                shift[axis] = PAdicScalar::pow_p(ctx, -(support.radii()[axis] + grow.max(0) + 1));
                let center = support.center();
                let moved = PAdicVec3([0, 1, 2].map(|k| center.0[k].try_add(&shift[k]).unwrap()));
                let disc = Polydisc3::from_center(&moved, radii).unwrap();
                assert!(disc.intersect(&support).is_none());
                let loc = s.localization_probability(&disc, &opts).unwrap();
                off = off.max(loc.probability.abs());
                ledger_ok &= loc.measure.is_zero();
            }
        }
        (
            own <= 1e-12 && off <= 1e-12 && ledger_ok,
            format!(
                "|P(own support) - 1| = {own:.3e}, max P(disjoint) = {off:.3e}, tol 1e-12; measure ledger exact: {ledger_ok}"
            ),
        )
    })
}

fn causality_positivity() -> Check {
    timed(
        "positive transition probability between distant balls",
        Some(60.0),
        || {
            let cfg = CausalityConfig::default();
            let rep = run_scan(&cfg).unwrap();
            let fine = run_scan(&CausalityConfig {
                r_max: 8,
                ..cfg.clone()
            })
            .unwrap();
            let distance = padic_dirac::padic::format_rational(&rep.distance);
            let mut ok = distance == "9/1" && rep.distance_matches_formula;
            let mut parts = vec![format!("distance {distance}")];
            for (row, row8) in rep.rows.iter().zip(&fine.rows) {
                let gap = (row.probability - row8.probability).abs();
                ok &= row.probability > 0.0 && row.probability > row.tail_bound && gap <= row.tail_bound;
                parts.push(format!(
                    "t={:e}: P={:.10e} bound={:.3e} |P6-P8|={:.3e}",
                    row.t, row.probability, row.tail_bound, gap
                ));
            }
            (ok, parts.join("; "))
        },
    )
}

fn cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let mut argv = vec!["padic-dirac"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(argv, &mut out, &mut err);
    (code, out, err)
}

fn spectrum_containment() -> Check {
    let dir = tempfile::tempdir().unwrap();
    timed("spectrum containment", Some(1.0), || {
        let mut worst = f64::INFINITY;
        let mut rows = 0;
        let mut ok = true;
        for m in [0.0, 1.0, 10.0] {
            let path = dir.path().join(format!("spectrum-{m}.json"));
            std::fs::write(&path, format!("{{\"p\": 3, \"m\": {m}, \"r_min\": -5, \"r_max\": 5}}")).unwrap();
            let (code, out, _) = cli(&["spectrum", "--format", "json", "--config", path.to_str().unwrap()]);
            ok &= code == 0;
            let v: Value = serde_json::from_slice(&out).unwrap();
            for row in v["rows"].as_array().unwrap() {
                let lambda = row["lambda"].as_f64().unwrap();
                ok &= lambda >= m;
                worst = worst.min(lambda - m);
                rows += 1;
            }
        }
        ok &= rows == 3 * 11 * 11 * 11;
        (ok, format!("{rows} rows, min (lambda - m) = {worst:.6e}"))
    })
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    timed("determinism", None, || {
        let mut same = true;
        let mut notes = Vec::new();
        let runs: [(&str, &[&str]); 4] = [
            ("causality csv", &["causality", "--format", "csv"]),
            ("causality json", &["causality", "--format", "json"]),
            ("verify csv", &["verify", "--seed", "3"]),
            ("verify json", &["verify", "--seed", "3", "--format", "json"]),
        ];
        for (label, args) in runs {
            let mut outputs = Vec::new();
            for k in 0..2 {
                let out = dir.path().join(format!("{}-{k}", label.replace(' ', "-")));
                let mut full = args.to_vec();
                let out_s = out.to_str().unwrap().to_string();
                full.extend_from_slice(&["--out", &out_s]);
                let (code, _, _) = cli(&full);
                let meta = padic_dirac_cli::meta_path(&out);
                outputs.push((code, std::fs::read(&out).unwrap(), std::fs::read(&meta).ok()));
            }
            let equal = outputs[0] == outputs[1];
            same &= equal;
            notes.push(format!("{label}: {} bytes, identical {equal}", outputs[0].1.len()));
        }
        (same, notes.join("; "))
    })
}

fn main() {
    let started = Instant::now();
    let checks = [
        orthonormality(),
        tv_eigen(),
        diagonalization(),
        plane_waves(),
        projectors_and_unitarity(),
        indicator_expansion(),
        charge_conjugation(),
        localization(),
        causality_positivity(),
        spectrum_containment(),
        determinism(),
    ];
    println!("acceptance criteria");
    for c in &checks {
        println!(
            "{} {}: {} [{:.2} s]",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail,
            c.elapsed.as_secs_f64()
        );
    }
    let failing: BTreeSet<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let expected: BTreeSet<&str> = KNOWN_FAILURES.iter().copied().collect();
    let passed = checks.len() - failing.len();
    println!(
        "{passed}/{} criteria pass; known failures: {}; total {:.1} s",
        checks.len(),
        KNOWN_FAILURES.join(", "),
        started.elapsed().as_secs_f64()
    );
    if failing != expected {
        println!("unexpected failing set: {failing:?} (expected {expected:?})");
        std::process::exit(1);
    }
}
