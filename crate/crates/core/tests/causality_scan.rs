use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use padic_dirac::causality::{
    build_initial_state, diagonal_check, emit_report, paper_literal_value, run_scan, CausalityConfig, Mode,
    ReportFormat,
};
use padic_dirac::padic::FieldContext;
use padic_dirac::spinor::{h_symbol, lambda, FrequencyMagnitude, Matrix4, Spinor4};
use padic_dirac::wavelet::IntegrationOptions;

fn cfg(r_max: i64) -> CausalityConfig {
    CausalityConfig {
        r_max,
        ..Default::default()
    }
}

#[test]
fn default_scan_is_positive_above_its_tail() {
    let rep = run_scan(&CausalityConfig::default()).unwrap();
    assert_eq!(rep.distance, BigRational::from_integer(9.into()));
    assert!(rep.distance_matches_formula);
    for row in &rep.rows {
        println!("t={:e} P={:e} tail={:e}", row.t, row.probability, row.tail_bound);
        assert!(row.positive);
        assert!(row.exceeds_tail);
        let enc = row.enclosure.unwrap();
        assert!(enc.lower <= enc.upper);
    }
}

#[test]
fn pointwise_oracle_on_target_ball() {
    let c = cfg(5);
    let val = c.validate().unwrap();
    let init = build_initial_state(&c).unwrap();
    let target = val.target_ball();
    let mu = target.measure().to_f64().unwrap();
    let rep = run_scan(&CausalityConfig {
        times: vec![0.0, 0.5],
        ..c.clone()
    })
    .unwrap();
    for row in &rep.rows {
        let v = init.state.evolve(c.m, row.t).eval(&target.center());
        let oracle = mu * v.norm_squared();
        assert!(
            (row.probability - oracle).abs() <= 1e-12 * oracle,
            "{} vs {}",
            row.probability,
            oracle
        );
    }
}

#[test]
fn regression_goldens() {
    // Values obtained with an independent arbitrary-precision prototype.
    let rep = run_scan(&CausalityConfig {
        times: vec![0.0, 1.0],
        ..cfg(6)
    })
    .unwrap();
    assert!((rep.rows[0].probability / 5.8399e-11 - 1.0).abs() < 1e-4);
    assert!((rep.rows[1].probability / 8.0562e-11 - 1.0).abs() < 1e-4);
}

#[test]
fn convergence_within_reported_bounds() {
    let probs: Vec<_> = [4, 6, 8].iter().map(|&r| run_scan(&cfg(r)).unwrap()).collect();
    for w in probs.windows(2) {
        for (a, b) in w[0].rows.iter().zip(&w[1].rows) {
            assert!((a.probability - b.probability).abs() <= a.tail_bound);
        }
    }
}

#[test]
fn paper_literal_matches_resummation() {
    let c = cfg(5);
    let ctx = FieldContext::new(3).unwrap();
    let a = Spinor4::from_element(Complex64::new(1.0, 0.0));
    // Brute force over j with r descending.
    let mut total = 0.0;
    for r1 in (1..=5).rev() {
        for r2 in (1..=5).rev() {
            for r3 in (1..=5).rev() {
                for _j in 0..8 {
                    let q = FrequencyMagnitude::from_scales(ctx, [r1, r2, r3]);
                    let lam = lambda(&q, 1.0);
                    let m =
                        (Matrix4::identity() * Complex64::from(lam) + h_symbol(&q, 1.0)) / Complex64::from(2.0 * lam);
                    let amp = m * a;
                    for k in (0..4).rev() {
                        total += 3f64.powf(-((r1 + r2 + r3) as f64) / 2.0) * amp[k].norm_sqr();
                    }
                }
            }
        }
    }
    let value = paper_literal_value(&c, 5, 0.0).unwrap();
    assert!((value - total).abs() <= 1e-12 * total);
    let rep = run_scan(&CausalityConfig {
        mode: Mode::PaperLiteral,
        ..c
    })
    .unwrap();
    assert!(rep.rows.iter().all(|r| r.positive));
    assert!(rep.rows.windows(2).all(|w| w[1].probability <= w[0].probability));
}

#[test]
fn diagonal_structure() {
    let (integrated, closed) = diagonal_check(&cfg(5), &IntegrationOptions::default()).unwrap();
    assert!((integrated - closed).abs() <= 1e-12 * closed.max(1e-300));
    assert!(integrated > 0.0);
}

#[test]
fn csv_and_json_are_deterministic() {
    let c = cfg(4);
    let a = emit_report(&run_scan(&c).unwrap(), ReportFormat::Csv);
    let b = emit_report(&run_scan(&c).unwrap(), ReportFormat::Csv);
    assert_eq!(a, b);
    let json = emit_report(&run_scan(&c).unwrap(), ReportFormat::Json);
    let parsed: padic_dirac::causality::CausalityReport = serde_json::from_slice(&json).unwrap();
    let again = emit_report(&parsed, ReportFormat::Json);
    assert_eq!(json, again);
}
