//! Force and refractive-index sensing built on the coupling model, and
//! Cramér-Rao trial counts for the candidate input states.

use serde::{Deserialize, Serialize};

use crate::closed_form::g2_with_slope;
use crate::error::{ensure_positive, Error, Result};
use crate::metrics::{min_detectable_from, NoiseBudget, ResponsivityMap, SignalAxis};
use crate::par;
use crate::point::OperatingPoint;
use crate::tmm::CouplingFit;

/// Separation bias range of the force maps, nm.
pub const FORCE_BIAS_RANGE_NM: (f64, f64) = (800.0, 1400.0);

/// Relative tolerance of the chain-rule cross-check on every cell.
pub const CHAIN_RULE_TOL: f64 = 1e-10;

/// Membrane material. Stiffness is `k = E·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub youngs_modulus_gpa: f64,
    pub thickness_um: f64,
}

impl MaterialSpec {
    pub fn new(youngs_modulus_gpa: f64, thickness_um: f64) -> Result<Self> {
        ensure_positive("youngs_modulus_gpa", youngs_modulus_gpa)?;
        ensure_positive("thickness_um", thickness_um)?;
        Ok(MaterialSpec {
            youngs_modulus_gpa,
            thickness_um,
        })
    }

    pub fn gaas() -> Self {
        MaterialSpec {
            youngs_modulus_gpa: 85.5,
            thickness_um: 1.0,
        }
    }

    /// N/m.
    pub fn stiffness(&self) -> f64 {
        self.youngs_modulus_gpa * 1e9 * self.thickness_um * 1e-6
    }
}

/// One cell of a force or refractive-index map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorPerformancePoint {
    pub x_bias: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub g: f64,
    pub g2: f64,
    /// `R_g` in 1/Hz.
    pub responsivity_g: f64,
    /// `R_x` in 1/nm or `R_n` in 1/RIU.
    pub responsivity: f64,
    /// Hz/√Hz.
    pub dg_min: f64,
    /// nm/√Hz or RIU/√Hz.
    pub signal_min: f64,
    /// N/√Hz, force maps only.
    pub force_min: Option<f64>,
    pub in_calibration: bool,
}

/// Cells over (κ, signal), row-major by κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMap {
    pub kappa_axis: Vec<f64>,
    pub signal_axis: Vec<f64>,
    pub cells: Vec<SensorPerformancePoint>,
}

impl SensorMap {
    pub fn responsivity_map(&self) -> ResponsivityMap {
        ResponsivityMap {
            kappa_axis: self.kappa_axis.clone(),
            signal_axis: self.signal_axis.clone(),
            values: self.cells.iter().map(|c| c.responsivity).collect(),
            ridge: Vec::new(),
        }
    }

    pub fn all_in_calibration(&self) -> bool {
        self.cells.iter().all(|c| c.in_calibration)
    }
}

fn check_chain_rule(direct: f64, composed: f64, what: &str) -> Result<()> {
    if (direct - composed).abs() > CHAIN_RULE_TOL * direct.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Conditioning(format!(
            "{what} chain rule mismatch: {direct:e} vs {composed:e}"
        )));
    }
    Ok(())
}

struct Base {
    g: f64,
    g2: f64,
    rg: f64,
    dg_min: f64,
}

fn base_cell(g: f64, kappa: f64, gamma: f64, budget: &NoiseBudget) -> Result<Base> {
    let point = OperatingPoint::new(g, kappa, gamma, 0.0)?;
    let (g2, slope) = g2_with_slope(&point)?;
    let rg = slope.abs();
    let dg_min = min_detectable_from(g2, rg, point.slowest_rate(), budget)?;
    Ok(Base { g, g2, rg, dg_min })
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::GridMismatch(format!(
            "{name} grid must be non-empty and positive"
        )));
    }
    Ok(())
}

/// Force-sensing performance over separation bias and cavity damping.
pub fn force_map(
    fit: &CouplingFit,
    material: &MaterialSpec,
    x_grid: &[f64],
    kappa_grid: &[f64],
    gamma: f64,
    budget: &NoiseBudget,
) -> Result<SensorMap> {
    check_grid("x", x_grid)?;
    check_grid("kappa", kappa_grid)?;
    ensure_positive("gamma", gamma)?;
    let model = fit.model;
    let axis = SignalAxis::Separation { model, gamma };
    let k = material.stiffness();
    let cols = x_grid.len();
    let cells = par::try_map_indexed(kappa_grid.len() * cols, |i| {
        let (kappa, x) = (kappa_grid[i / cols], x_grid[i % cols]);
        let base = base_cell(model.g(x, 1.0), kappa, gamma, budget)?;
        let rx = axis.responsivity(kappa, x)?;
        check_chain_rule(rx, base.rg * model.b * base.g, "R_x")?;
        let dx = base.dg_min / (model.b * base.g);
        Ok(SensorPerformancePoint {
            x_bias: x,
            kappa,
            gamma,
            g: base.g,
            g2: base.g2,
            responsivity_g: base.rg,
            responsivity: rx,
            dg_min: base.dg_min,
            signal_min: dx,
            force_min: Some(k * dx * 1e-9),
            in_calibration: fit.in_calibration(x, 1.0),
        })
    })?;
    Ok(SensorMap {
        kappa_axis: kappa_grid.to_vec(),
        signal_axis: x_grid.to_vec(),
        cells,
    })
}

/// Refractive-index sensing at a fixed separation, evaluated at n = 1.
pub fn ri_map(
    fit: &CouplingFit,
    x_bias: f64,
    kappa_grid: &[f64],
    gamma: f64,
    budget: &NoiseBudget,
) -> Result<SensorMap> {
    check_grid("kappa", kappa_grid)?;
    ensure_positive("x_bias", x_bias)?;
    ensure_positive("gamma", gamma)?;
    let model = fit.model;
    let n = 1.0;
    let axis = SignalAxis::Index { model, x_bias, gamma };
    let cells = par::try_map_indexed(kappa_grid.len(), |i| {
        let kappa = kappa_grid[i];
        let base = base_cell(model.g(x_bias, n), kappa, gamma, budget)?;
        let rn = axis.responsivity(kappa, n)?;
        check_chain_rule(rn, base.rg * 2.0 * model.d * n * base.g, "R_n")?;
        Ok(SensorPerformancePoint {
            x_bias,
            kappa,
            gamma,
            g: base.g,
            g2: base.g2,
            responsivity_g: base.rg,
            responsivity: rn,
            dg_min: base.dg_min,
            signal_min: base.dg_min / (2.0 * model.d * n * base.g),
            force_min: None,
            in_calibration: fit.in_calibration(x_bias, n),
        })
    })?;
    Ok(SensorMap {
        kappa_axis: kappa_grid.to_vec(),
        signal_axis: vec![n],
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputConfig {
    /// Coherent state with mean photon number 1.
    CoherentN1,
    /// Coherent state with mean photon number 2.
    CoherentN2,
    /// Two single-photon runs per trial, one after the other.
    FockSerialN1,
    /// One photon in each input port.
    FockHomN2,
}

impl InputConfig {
    pub const ALL: [InputConfig; 4] = [
        InputConfig::CoherentN1,
        InputConfig::CoherentN2,
        InputConfig::FockSerialN1,
        InputConfig::FockHomN2,
    ];

    /// Lossless Fisher information per trial about g.
    pub fn base_information(self) -> f64 {
        match self {
            InputConfig::CoherentN1 => 1.0,
            InputConfig::CoherentN2 => 4.0,
            InputConfig::FockSerialN1 => 2.0 * 4.0,
            InputConfig::FockHomN2 => 16.0,
        }
    }

    /// Information retained under port transmissions `t1`, `t2`.
    pub fn loss_factor(self, t1: f64, t2: f64) -> f64 {
        match self {
            InputConfig::FockHomN2 => t1 * t1 * t2 * t2,
            _ => t1 * t1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherRecord {
    pub config: InputConfig,
    pub mse_target: f64,
    pub t1: f64,
    pub t2: f64,
    pub base_information: f64,
    pub effective_information: f64,
    /// `1/(mse·I_eff)`.
    pub trials: f64,
    pub trials_ceil: u64,
}

/// Trials needed for the Cramér-Rao bound to reach `mse_target`.
pub fn fisher_comparison(mse_target: f64, config: InputConfig, loss: (f64, f64)) -> Result<FisherRecord> {
    ensure_positive("mse_target", mse_target)?;
    let (t1, t2) = loss;
    for (name, t) in [("t1", t1), ("t2", t2)] {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain(name, format!("transmission must lie in (0, 1], got {t}")));
        }
    }
    let base = config.base_information();
    let effective = base * config.loss_factor(t1, t2);
    let trials = (1.0 / mse_target) / effective;
    Ok(FisherRecord {
        config,
        mse_target,
        t1,
        t2,
        base_information: base,
        effective_information: effective,
        trials,
        trials_ceil: trials.ceil() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaas_stiffness() {
        assert!((MaterialSpec::gaas().stiffness() - 85.5e3).abs() < 1e-9);
        assert!(MaterialSpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn hom_trial_count() {
        let r = fisher_comparison(1e-4, InputConfig::FockHomN2, (1.0, 1.0)).unwrap();
        assert_eq!(r.trials, 625.0);
        assert_eq!(r.trials_ceil, 625);
    }

    #[test]
    fn fisher_domain_errors() {
        assert!(fisher_comparison(0.0, InputConfig::FockHomN2, (1.0, 1.0)).is_err());
        assert!(fisher_comparison(1e-4, InputConfig::FockHomN2, (0.0, 1.0)).is_err());
        assert!(fisher_comparison(1e-4, InputConfig::CoherentN1, (1.0, 1.1)).is_err());
    }
}
