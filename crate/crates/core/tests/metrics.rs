use hom_sensor::metrics::{
    find_ridge, g2_noise, linear_dynamic_range, min_detectable_g, monte_carlo_g2_noise, refine_ridge_g, responsivity_g,
    ridge_bias, NoiseBudget, SignalAxis,
};
use hom_sensor::{dg2_dg, g2_closed_form, Error, OperatingPoint};
use proptest::prelude::*;

fn point(g: f64, k: f64, gamma: f64) -> OperatingPoint {
    OperatingPoint::from_ratios(g, k, 0.0, gamma).unwrap()
}

// Independent 40-digit evaluation: G²(0) and its g-derivative at
// (g/γ, κ/γ) = (1.8, 2), the strongest responsivity maximum at κ/γ = 2,
// and the dynamic range there at f/γ = 1e-12.
const D0: f64 = -0.539_084_740_386_581;
const M0: f64 = 41_093.146_365_180_21;
const RIDGE_G: f64 = 0.242_425_910_620_239_04;
const RIDGE_R: f64 = 2.404_667_486_149_347_3;
const RIDGE_LDR_DB: f64 = 98.109_570_254_810_02;

#[test]
fn responsivity_at_reference_point() {
    let r = responsivity_g(&point(1.8, 2.0, 1.0)).unwrap();
    assert!((r - D0.abs()).abs() < 1e-12);
    assert_eq!(responsivity_g(&point(0.0, 2.0, 1.0)).unwrap(), 0.0);
    // τ is ignored
    let p = OperatingPoint::from_ratios(1.8, 2.0, 3.0, 1.0).unwrap();
    assert_eq!(responsivity_g(&p).unwrap(), r);
}

#[test]
fn minimum_detectable_coupling_reference() {
    let p = point(1.8, 2.0, 1e9);
    let b = NoiseBudget::new(1.0, 0.0, 1.0, p.repetition_interval()).unwrap();
    let m = min_detectable_g(&p, &b).unwrap();
    assert!(((m - M0) / M0).abs() < 1e-12, "{m}");
}

#[test]
fn minimum_detectable_coupling_matches_simulated_experiments() {
    // N = min{γ,κ}/(2f) trials; the spread of the plug-in estimate divided
    // by the responsivity estimates δg_min.
    let gamma = 1.0;
    let f = 1.0 / 800.0;
    let p = point(1.8, 2.0, gamma);
    let b = NoiseBudget::for_bandwidth(&p, f, 0.0).unwrap();
    assert_eq!(b.trials, 400.0);
    let g2 = g2_closed_form(&p).unwrap().value;
    let replicates = 10_000;
    let sd = monte_carlo_g2_noise(g2, 400, 0.0, replicates, 11).unwrap();
    let simulated = sd / responsivity_g(&p).unwrap();
    let analytic = min_detectable_g(&p, &b).unwrap();
    let tol = 3.0 / (2.0 * replicates as f64).sqrt();
    assert!(
        ((simulated - analytic) / analytic).abs() < tol,
        "{simulated} vs {analytic}"
    );
}

#[test]
fn scales_with_bandwidth_and_loss() {
    let p = point(1.8, 2.0, 1e9);
    let b1 = NoiseBudget::new(10.0, 0.0, 1.0, 1e-9).unwrap();
    let b2 = NoiseBudget::new(10.0, 0.0, 2.0, 1e-9).unwrap();
    let b3 = NoiseBudget::new(10.0, 0.75, 1.0, 1e-9).unwrap();
    let m1 = min_detectable_g(&p, &b1).unwrap();
    assert!((min_detectable_g(&p, &b2).unwrap() / m1 - 2f64.sqrt()).abs() < 1e-14);
    assert!((min_detectable_g(&p, &b3).unwrap() / m1 - 2.0).abs() < 1e-14);
}

#[test]
fn insensitive_point_is_an_error() {
    let b = NoiseBudget::new(10.0, 0.0, 1.0, 1.0).unwrap();
    assert_eq!(min_detectable_g(&point(0.0, 3.0, 1.0), &b), Err(Error::Insensitive));
}

#[test]
fn ridge_point_and_dynamic_range() {
    let g = refine_ridge_g(2.0, 1.0, 0.1, 0.5).unwrap();
    assert!((g - RIDGE_G).abs() < 1e-7, "{g}");
    assert!((ridge_bias(2e9, 1e9).unwrap() / 1e9 - RIDGE_G).abs() < 1e-7);
    let p = point(g, 2.0, 1.0);
    assert!((responsivity_g(&p).unwrap() - RIDGE_R).abs() < 1e-10);

    let b = NoiseBudget::new(1.0, 0.0, 1e-12, 1.0).unwrap();
    let ldr = linear_dynamic_range(&p, &b, 0.01).unwrap();
    assert!((ldr.ldr_db - RIDGE_LDR_DB).abs() < 1e-4, "{ldr:?}");
    // the lower side drops first
    assert!(ldr.dg_max_down.unwrap() < ldr.dg_max_up.unwrap());

    let wide = NoiseBudget::new(1.0, 0.0, 1e-6, 1.0).unwrap();
    let coarse = linear_dynamic_range(&p, &wide, 0.01).unwrap();
    assert!(coarse.ldr_db < ldr.ldr_db);
}

#[test]
fn ridge_over_the_design_plane() {
    let ks: Vec<f64> = (0..50).map(|i| 0.1 + 0.1 * i as f64).collect();
    let gs: Vec<f64> = (1..=500).map(|i| 0.01 * i as f64).collect();
    let map = find_ridge(&ks, &gs, SignalAxis::CouplingRatio).unwrap();
    for (r, p) in map.ridge.iter().enumerate() {
        // discrete second-order maximum at the nearest grid node
        let row = map.row(r);
        let j = gs.iter().position(|&g| (g - p.signal).abs() <= 0.005 + 1e-12).unwrap();
        let j = j.clamp(1, gs.len() - 2);
        let best = (j - 1..=j + 1).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert!(row[best - 1] + row[best + 1] - 2.0 * row[best] < 0.0, "row {r}");
        // R is flat there: one grid step moves it by under 5%
        let step = 1e-5;
        let rr = |g: f64| dg2_dg(&point(g, p.kappa, 1.0)).unwrap().abs();
        let slope = (rr(p.signal + step) - rr(p.signal - step)) / (2.0 * step);
        assert!(slope.abs() * 0.01 < 0.05 * p.value, "row {r}: slope {slope}");
    }
    let at_two = map.ridge.iter().find(|p| (p.kappa - 2.0).abs() < 1e-9).unwrap();
    assert!((at_two.signal - RIDGE_G).abs() < 2e-3);
    // the strongest maximum moves to larger coupling as the cavities get lossier
    assert!(
        map.ridge.windows(2).all(|w| w[1].signal >= w[0].signal),
        "{:?}",
        map.ridge
    );
}

#[test]
fn bernoulli_noise_matches_simulation() {
    for &(g2, n, eps) in &[(0.5, 100u64, 0.0), (0.2, 400, 0.5)] {
        let replicates = 10_000;
        let b = NoiseBudget::new(n as f64, eps, 1.0, 1.0).unwrap();
        let analytic = g2_noise(g2, &b).unwrap();
        let simulated = monte_carlo_g2_noise(g2, n, eps, replicates, 2024).unwrap();
        let tol = 3.0 / (2.0 * replicates as f64).sqrt();
        assert!(
            ((simulated - analytic) / analytic).abs() < tol,
            "{g2} {n} {eps}: {simulated} vs {analytic}"
        );
    }
}

proptest! {
    #[test]
    fn noise_is_symmetric_and_peaks_at_one_half(g2 in 0.0f64..1.0, n in 1.0f64..1e6, eps in 0.0f64..0.99) {
        let b = NoiseBudget::new(n, eps, 1.0, 1.0).unwrap();
        let s = g2_noise(g2, &b).unwrap();
        prop_assert!((s - g2_noise(1.0 - g2, &b).unwrap()).abs() < 1e-15);
        prop_assert!(s <= g2_noise(0.5, &b).unwrap() + 1e-15);
    }

    #[test]
    fn detectable_shift_scales_as_root_bandwidth(g in 0.1f64..5.0, k in 0.2f64..5.0, f in 1e-3f64..1e3, eps in 0.0f64..0.9) {
        let p = point(g, k, 1e9);
        prop_assume!(dg2_dg(&p).unwrap().abs() > 1e-12);
        let b1 = NoiseBudget::new(1.0, eps, f, 1.0).unwrap();
        let b4 = NoiseBudget::new(1.0, eps, 4.0 * f, 1.0).unwrap();
        let b0 = NoiseBudget::new(1.0, 0.0, f, 1.0).unwrap();
        let m = min_detectable_g(&p, &b1).unwrap();
        prop_assert!((min_detectable_g(&p, &b4).unwrap() / m - 2.0).abs() < 1e-12);
        prop_assert!((m / min_detectable_g(&p, &b0).unwrap() - 1.0 / (1.0 - eps).sqrt()).abs() < 1e-12);
    }
}
