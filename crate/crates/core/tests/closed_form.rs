use hom_sensor::closed_form::{dg2_dg, g2_closed_form, g2_dip_curve, ClosedFormTerms};
use hom_sensor::oracle::g2_oracle_point;
use hom_sensor::OperatingPoint;
use proptest::prelude::*;

fn point(g: f64, k: f64, t: f64) -> OperatingPoint {
    OperatingPoint::from_ratios(g, k, t, 1.0).unwrap()
}

fn g2(g: f64, k: f64, t: f64) -> f64 {
    g2_closed_form(&point(g, k, t)).unwrap().value
}

/// Richardson-extrapolated central difference in g/γ.
fn richardson(g: f64, k: f64, h: f64) -> f64 {
    let central = |h: f64| (g2(g + h, k, 0.0) - g2(g - h, k, 0.0)) / (2.0 * h);
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

// G²(0) at g/γ = 1.8, κ/γ = 2 and its g-derivative, from a 40-digit
// evaluation of the expression and adaptive quadrature of the two-photon
// amplitude (both independent of this crate).
const V0: f64 = 0.431_961_745_412_894_7;
const D0: f64 = -0.539_084_740_386_581;

#[test]
fn reference_point_value() {
    let v = g2(1.8, 2.0, 0.0);
    assert!((v - V0).abs() < 1e-14, "{v}");
    let oracle = g2_oracle_point(&point(1.8, 2.0, 0.0)).unwrap().value;
    assert!((oracle - V0).abs() < 1e-8, "{oracle}");
}

#[test]
fn reference_point_derivative() {
    let d = dg2_dg(&point(1.8, 2.0, 0.0)).unwrap();
    assert!((d - D0).abs() < 1e-12, "{d}");
    let fd = richardson(1.8, 2.0, 1e-3);
    assert!(((d - fd) / d).abs() < 1e-6, "{d} vs {fd}");
}

#[test]
fn long_separation_limit_is_b_over_a() {
    let t = ClosedFormTerms::<f64>::evaluate(1.0, 1.0, 30.0);
    let limit = t.b / t.a;
    assert!((g2(1.0, 1.0, 30.0) - limit).abs() < 1e-12);
    let oracle = g2_oracle_point(&point(1.0, 1.0, 30.0)).unwrap().value;
    assert!((oracle - limit).abs() < 1e-6);
}

#[test]
fn decoupled_device_has_flat_curve() {
    let p = point(0.0, 2.0, 0.0);
    let grid: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
    for (_, v) in g2_dip_curve(&p, &grid).unwrap() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dip_curve_is_symmetric_and_matches_oracle_at_both_signs() {
    let p = point(1.8, 2.0, 0.0);
    let grid: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
    let curve = g2_dip_curve(&p, &grid).unwrap();
    for (i, &(t, v)) in curve.iter().enumerate() {
        let mirror = curve[curve.len() - 1 - i].1;
        assert!((v - mirror).abs() < 1e-14, "t={t}");
    }
    for t in [-3.0, -0.5, 0.5, 3.0] {
        let o = g2_oracle_point(&point(1.8, 2.0, t)).unwrap().value;
        assert!((o - g2(1.8, 2.0, t)).abs() < 1e-7, "t={t}");
    }
}

#[test]
fn dip_shape_scan() {
    // At κ/γ = 5 the curve is a plain dip: nondecreasing in |τ|.
    let p = point(1.8, 5.0, 0.0);
    let grid: Vec<f64> = (0..=100).map(|i| 0.05 * i as f64).collect();
    let curve = g2_dip_curve(&p, &grid).unwrap();
    assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-15));

    // At κ/γ = 2 the coincidence first falls below its τ = 0 value before
    // rising to the distinguishable-photon level B/A.
    let p = point(1.8, 2.0, 0.0);
    let curve = g2_dip_curve(&p, &grid).unwrap();
    let (t_min, v_min) = curve
        .iter()
        .copied()
        .fold((0.0, f64::MAX), |a, b| if b.1 < a.1 { b } else { a });
    assert!(t_min > 0.5 && t_min < 1.2, "minimum at τγ = {t_min}");
    assert!(v_min < curve[0].1 - 0.04);
    let after: Vec<f64> = curve.iter().filter(|(t, _)| *t >= t_min).map(|c| c.1).collect();
    assert!(after.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    let t = ClosedFormTerms::<f64>::evaluate(1.8, 2.0, 0.0);
    assert!(curve.last().unwrap().1 < t.b / t.a);
}

#[test]
fn derivative_sign_changes_once_past_the_global_minimum() {
    let k = 2.0;
    let gs: Vec<f64> = (1..=5000).map(|i| i as f64 * 1e-3).collect();
    let values: Vec<f64> = gs.iter().map(|&g| g2(g, k, 0.0)).collect();
    let (i_min, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::MAX), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    let start = i_min.saturating_sub(100);
    let signs: Vec<bool> = gs[start..]
        .iter()
        .map(|&g| dg2_dg(&point(g, k, 0.0)).unwrap() > 0.0)
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1, "global minimum at g/γ = {}", gs[i_min]);
}

#[test]
fn stays_accurate_at_large_rate_ratios() {
    // κ/γ = 10⁴, g/γ in the thousands: the regime of GHz photons and
    // 10¹³ Hz cavities. Reference from 50-digit arithmetic.
    let v = g2(3000.0, 1e4, 0.0);
    assert!((v - 0.310_262_576_243_095_4).abs() < 1e-13, "{v}");
}

proptest! {
    #[test]
    fn probability_bounds(g in 0.0f64..10.0, k in 0.05f64..20.0, t in 0.0f64..20.0) {
        prop_assume!(!(g == 0.0 && k == 1.0));
        let v = g2(g, k, t);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&v), "v = {}", v);
    }

    #[test]
    fn dimensionless_scale_invariance(g in 0.01f64..10.0, k in 0.05f64..20.0, t in 0.0f64..10.0, s in 1e-3f64..1e6) {
        let gamma = 1.0;
        let base = OperatingPoint::new(g, k, gamma, t).unwrap();
        let scaled = OperatingPoint::new(g * s, k * s, gamma * s, t / s).unwrap();
        let a = g2_closed_form(&base).unwrap().value;
        let b = g2_closed_form(&scaled).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn derivative_matches_richardson(g in 0.05f64..5.0, k in 0.3f64..6.0) {
        let d = dg2_dg(&point(g, k, 0.0)).unwrap();
        prop_assume!(d.abs() > 1e-3);
        let fd = richardson(g, k, 1e-3 * g.min(1.0));
        prop_assert!(((d - fd) / d.abs().max(1e-12)).abs() < 1e-6, "{} vs {}", d, fd);
    }
}
