//! Analytic coincidence probability G²(τ) for two exponential single-photon
//! pulses entering two identical, evanescently coupled cavities.
//!
//! Everything is evaluated in units of the photon bandwidth γ: the formula
//! only depends on g/γ, κ/γ and τγ, and dividing first keeps the eighth
//! powers in the polynomial terms well inside f64 range.
//!
//! With the common prefactor `e^{-3τ(κ+γ)/2}` folded into each exponential,
//!
//! ```text
//! G²(τ) = [B + C·e^{-γτ} + D(τ)·e^{-κτ} + E(τ)·e^{-(κ+γ)τ/2}] / A
//! ```
//!
//! where D and E carry the oscillating factor F(τ). No exponent is ever
//! positive, so large τ cannot overflow.

use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::point::OperatingPoint;

/// Polynomial and trigonometric terms of the closed form, in γ units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormTerms<S = f64> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
    pub e: S,
    pub f: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Oracle,
}

/// A coincidence probability and how it was obtained.
///
/// `numerator` and `denominator` are only populated by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceResult {
    pub value: f64,
    pub method: Method,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
}

impl<S: Scalar> ClosedFormTerms<S> {
    /// Terms at coupling `g`, damping `kappa` and separation `tau`, all in γ units.
    pub fn evaluate(g: S, kappa: f64, tau: f64) -> Self {
        let one = 1.0;
        let k = S::constant(kappa);
        let k2 = kappa * kappa;
        let g2 = g * g;
        let g4 = g2 * g2;

        let four_g2_k2 = g2.scale(4.0) + S::constant(k2);
        let inner_a = g4.scale(16.0) + S::constant((one - k2) * (one - k2)) + g2.scale(8.0 * (one + k2));
        let a = four_g2_k2 * four_g2_k2 * inner_a * inner_a;

        let gk = one + kappa;
        let lead = g2.scale(4.0) + S::constant((one - kappa) * (one - kappa));
        let inner_b = g4.powi(2).scale(256.0)
            + S::constant(k2 * k2 * gk.powi(4))
            + g2.scale(8.0 * (one - 2.0 * k2)) * (g4.scale(16.0) + S::constant(k2 * gk * gk))
            + g4.scale(16.0 * (one + 2.0 * k2 + 20.0 * kappa * k2 + 22.0 * k2 * k2));
        let b = lead * lead * inner_b;

        let mix = g2.scale(4.0) + S::constant(one - k2);
        let c = -(g2.scale(32.0 * k2) * mix * mix * four_g2_k2 * four_g2_k2);

        let gt = g * S::constant(tau);
        let f = k * (S::constant(k2 - one) - g2.scale(12.0)) * gt.cos()
            + g.scale(2.0) * (g2.scale(4.0) + S::constant(one - 3.0 * k2)) * gt.sin();

        let d = -(g2.scale(32.0 * k2) * f * f);
        let e = -(g2.scale(64.0 * k2) * mix * four_g2_k2 * f);

        ClosedFormTerms { a, b, c, d, e, f }
    }

    /// Combine the terms into G²(τ) with the fused, non-positive exponents.
    pub fn coincidence(&self, kappa: f64, tau: f64) -> S {
        let decay_gamma = S::constant((-tau).exp());
        let decay_kappa = S::constant((-kappa * tau).exp());
        let decay_mixed = S::constant((-0.5 * (kappa + 1.0) * tau).exp());
        (self.b + self.c * decay_gamma + self.d * decay_kappa + self.e * decay_mixed) / self.a
    }
}

fn check_degenerate(point: &OperatingPoint) -> Result<()> {
    if point.g() == 0.0 && point.kappa() == point.gamma() {
        return Err(Error::DegeneratePoint);
    }
    Ok(())
}

fn evaluate_scaled<S: Scalar>(g: S, kappa: f64, tau: f64) -> Result<S> {
    let terms = ClosedFormTerms::evaluate(g, kappa, tau);
    let a = terms.a.value();
    if a == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    if !a.is_finite() {
        return Err(Error::Conditioning(format!(
            "closed-form denominator overflowed at g/γ = {}, κ/γ = {kappa}",
            g.value()
        )));
    }
    let value = terms.coincidence(kappa, tau);
    if tau == 0.0 {
        let direct = (terms.b + terms.c + terms.d + terms.e).value() / a;
        debug_assert!((direct - value.value()).abs() <= 1e-12 * direct.abs().max(1.0));
    }
    Ok(value)
}

/// G²(τ) from the analytic expression. Negative τ is evaluated at |τ|
/// (identical cavities make the dip symmetric).
pub fn g2_closed_form(point: &OperatingPoint) -> Result<CoincidenceResult> {
    check_degenerate(point)?;
    let s = point.scaled();
    let value = evaluate_scaled(s.g, s.kappa, s.tau.abs())?;
    Ok(CoincidenceResult {
        value,
        method: Method::ClosedForm,
        numerator: None,
        denominator: None,
    })
}

/// G² over a sorted grid of separations (seconds).
pub fn g2_dip_curve(point: &OperatingPoint, tau_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    for (i, &t) in tau_grid.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::GridMismatch(format!("tau grid entry {i} is not finite")));
        }
        if i > 0 && t < tau_grid[i - 1] {
            return Err(Error::GridMismatch(format!("tau grid is not sorted at entry {i}")));
        }
    }
    tau_grid
        .iter()
        .map(|&t| {
            let p = point.with_tau(t)?;
            Ok((t, g2_closed_form(&p)?.value))
        })
        .collect()
}

/// dG²/dg in 1/Hz at the point's separation, via exact forward-mode
/// differentiation of the closed form.
pub fn dg2_dg(point: &OperatingPoint) -> Result<f64> {
    let (_, slope) = g2_with_slope(point)?;
    Ok(slope)
}

/// G² and dG²/dg (1/Hz) in one pass.
pub fn g2_with_slope(point: &OperatingPoint) -> Result<(f64, f64)> {
    check_degenerate(point)?;
    let s = point.scaled();
    let v = evaluate_scaled(Dual::variable(s.g), s.kappa, s.tau.abs())?;
    Ok((v.re, v.eps / point.gamma()))
}

/// G²(0) as a function of a dual-valued coupling in γ units. Lets callers
/// push their own chain rule (g as a function of x or n) through the
/// closed form.
pub fn g2_zero_delay_dual(g_over_gamma: Dual, kappa_over_gamma: f64) -> Result<Dual> {
    if g_over_gamma.re == 0.0 && kappa_over_gamma == 1.0 {
        return Err(Error::DegeneratePoint);
    }
    evaluate_scaled(g_over_gamma, kappa_over_gamma, 0.0)
}
