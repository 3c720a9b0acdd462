use proptest::prelude::*;

use super::*;
use crate::field::FieldSource;
use crate::generate::TrigPolynomial;
use crate::grid::TorusGrid;

fn field(n: usize, expr: &str) -> TorusField {
    TorusField::build(n, FieldSource::Expr(expr)).unwrap()
}

fn curve_of(samples: Vec<(f64, f64)>, critical: Vec<f64>) -> BCurve {
    let (lo, hi) = (critical[0], *critical.last().unwrap());
    BCurve { samples, critical_values: critical, min_value: lo, max_value: hi }
}

#[test]
fn constant_is_normalized_exactly() {
    let g = TorusGrid::new(16).unwrap();
    for c in [1.0, -2.5, 0.0] {
        let h = TorusField::constant(g, c).unwrap();
        let eval = quasi_state(&h, Mode::Both, &Options::default()).unwrap();
        assert_eq!(eval.report.zeta_reeb, Some(c));
        assert_eq!(eval.report.zeta_aarnes, Some(c));
        assert_eq!(eval.report.discrepancy, Some(0.0));
    }
}

#[test]
fn antisymmetric_two_mode_field_vanishes() {
    // H(x + (1/2, 1/2)) = -H(x) and ζ is invariant under translations,
    // so ζ(H) = ζ(-H) = -ζ(H).
    let h = field(64, "cos(2*pi*q) + 0.5*cos(2*pi*p)");
    let r = quasi_state(&h, Mode::Both, &Options::default()).unwrap().report;
    assert!(r.zeta_reeb.unwrap().abs() < 1e-9, "{:?}", r.zeta_reeb);
    assert!(r.zeta_aarnes.unwrap().abs() < 1e-4, "{:?}", r.zeta_aarnes);
    assert_eq!(r.trees.len(), 2);
    assert!(!r.flagged);
}

#[test]
fn fields_of_one_linear_coordinate_give_the_mean() {
    // Every sublevel set is a union of essential annuli, so b(t) = |{H ≤ t}|
    // and the layer-cake formula returns the integral.
    for expr in ["sin(2*pi*q)", "cos(2*pi*(p+q)) + 0.3", "sin(2*pi*(2*p-q))^3 - 0.1"] {
        let h = field(64, expr);
        let r = quasi_state(&h, Mode::Both, &Options::default()).unwrap().report;
        assert!((r.zeta_reeb.unwrap() - r.mean).abs() < 1e-6, "{expr}: {:?} vs {}", r.zeta_reeb, r.mean);
        assert!((r.zeta_aarnes.unwrap() - r.mean).abs() < 1e-4, "{expr}");
    }
}

#[test]
fn b_curve_of_two_mode_field() {
    let h = field(64, "cos(2*pi*q) + 0.5*cos(2*pi*p)");
    let s = Sampling::default();
    let reeb = b_curve_reeb(&h, &s).unwrap();
    let tau = b_curve_tau(&h, &s).unwrap();
    assert_eq!(reeb.samples.len(), tau.samples.len());
    for (&(t, a), &(t2, b)) in reeb.samples.iter().zip(&tau.samples) {
        assert_eq!(t, t2);
        assert!((a - b).abs() < 1e-12, "t={t}: {a} vs {b}");
        if t < -0.5 {
            assert_eq!(b, 0.0);
        }
        if t > 0.5 {
            assert_eq!(b, 1.0);
        }
    }
    // Below the lower saddle the disk around the minimum is not counted yet.
    let just_below = reeb.samples.iter().find(|s| s.0 > -1.0).unwrap();
    assert_eq!(just_below.1, 0.0);
}

#[test]
fn sampling_avoids_critical_and_vertex_values() {
    let h = TrigPolynomial::random(4, 2, false).field(32).unwrap();
    let s = Sampling::with_per_interval(5);
    let (critical, ts) = s.levels(&h);
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    for w in critical.windows(2) {
        let inside = ts.iter().filter(|&&t| w[0] < t && t < w[1]).count();
        assert!(inside >= 5);
    }
    for &t in &ts {
        assert!(!h.values().contains(&t));
    }
}

#[test]
fn quadrature_is_exact_for_piecewise_linear_b() {
    // b(t) = t on (0, 1), b = 1 on (1, 2): ∫ = 1/2 + 1
    let mut samples: Vec<(f64, f64)> = (0..10).map(|k| (0.05 + 0.1 * k as f64, 0.05 + 0.1 * k as f64)).collect();
    samples.extend((0..3).map(|k| (1.2 + 0.3 * k as f64, 1.0)));
    let c = curve_of(samples, vec![0.0, 1.0, 2.0]);
    // trapezoids are exact, and the held end values over- and undershoot by
    // the same amount for samples symmetric in the interval
    let expected = 2.0 - 1.5;
    assert!((evaluate_aarnes(&c).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn aarnes_rejects_bad_curves() {
    let dec = curve_of(vec![(0.25, 0.6), (0.75, 0.4)], vec![0.0, 1.0]);
    assert!(matches!(evaluate_aarnes(&dec), Err(Error::Data(_))));
    let gap = curve_of(vec![(0.5, 0.5)], vec![0.0, 1.0, 2.0]);
    assert!(matches!(evaluate_aarnes(&gap), Err(Error::Data(_))));
    let tiny_dip = curve_of(vec![(0.25, 0.5), (0.75, 0.5 - 1e-12)], vec![0.0, 1.0]);
    assert!(evaluate_aarnes(&tiny_dip).is_ok());
}

#[test]
fn modes_fill_the_right_fields() {
    let h = TrigPolynomial::random(1, 1, false).field(32).unwrap();
    let opts = Options::default();
    let r = quasi_state(&h, Mode::Reeb, &opts).unwrap();
    assert!(r.report.zeta_reeb.is_some() && r.report.zeta_aarnes.is_none());
    assert!(r.report.discrepancy.is_none());
    let a = quasi_state(&h, Mode::Aarnes, &opts).unwrap();
    assert!(a.report.zeta_reeb.is_none() && a.report.zeta_aarnes.is_some());
    assert!(a.report.trees.is_empty());
    let strict = Options { tolerance: 0.0, ..opts };
    let b = quasi_state(&h, Mode::Both, &strict).unwrap();
    assert_eq!(b.report.flagged, b.report.discrepancy.unwrap() > 0.0);
    assert_eq!(b.curve, a.curve);
    assert_eq!(evaluate_reeb(&h).unwrap().zeta_reeb, r.report.zeta_reeb);
    assert_eq!(zeta_reeb(&h).unwrap(), r.report.zeta_reeb.unwrap());
}

#[test]
fn csv_has_header_and_full_precision() {
    let c = curve_of(vec![(0.1, 1.0 / 3.0)], vec![0.0, 1.0]);
    let csv = c.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,b"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![0.1, 1.0 / 3.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Both paths see the same b at every regular level.
    #[test]
    fn b_curves_agree_pointwise(seed in any::<u64>(), degree in 1u32..3) {
        let h = TrigPolynomial::random(seed, degree, false).field(24).unwrap();
        let s = Sampling::with_per_interval(3);
        let reeb = b_curve_reeb(&h, &s).unwrap();
        let tau = b_curve_tau(&h, &s).unwrap();
        for (a, b) in reeb.samples.iter().zip(&tau.samples) {
            prop_assert!((a.1 - b.1).abs() < 1e-9, "t={}: {} vs {}", a.0, a.1, b.1);
        }
        prop_assert!(tau.samples.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
    }

    #[test]
    fn zeta_lies_between_min_and_max(seed in any::<u64>()) {
        let h = TrigPolynomial::random(seed, 2, false).field(16).unwrap();
        let z = zeta_reeb(&h).unwrap();
        prop_assert!(h.min_value() <= z && z <= h.max_value());
    }
}
