use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Working point of the coupled-cavity device.
///
/// Rates are in Hz, the photon separation `tau` in seconds. Both cavities
/// share the damping rate `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    g: f64,
    kappa: f64,
    gamma: f64,
    tau: f64,
}

/// The point with every rate divided by `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub g: f64,
    pub kappa: f64,
    pub tau: f64,
}

impl OperatingPoint {
    pub fn new(g: f64, kappa: f64, gamma: f64, tau: f64) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        ensure_positive("kappa", kappa)?;
        ensure_finite("g", g)?;
        ensure_finite("tau", tau)?;
        if g < 0.0 {
            return Err(Error::domain("g", format!("must be >= 0, got {g}")));
        }
        let point = OperatingPoint { g, kappa, gamma, tau };
        let s = point.scaled();
        if !(s.g.is_finite() && s.kappa.is_finite() && s.tau.is_finite()) {
            return Err(Error::domain("gamma", "dimensionless ratios overflow"));
        }
        Ok(point)
    }

    /// Build from the dimensionless triple (g/γ, κ/γ, τγ) and the bandwidth γ.
    pub fn from_ratios(g_over_gamma: f64, kappa_over_gamma: f64, tau_gamma: f64, gamma: f64) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        Self::new(g_over_gamma * gamma, kappa_over_gamma * gamma, gamma, tau_gamma / gamma)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn scaled(&self) -> Scaled {
        Scaled {
            g: self.g / self.gamma,
            kappa: self.kappa / self.gamma,
            tau: self.tau * self.gamma,
        }
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(g, self.kappa, self.gamma, self.tau)
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.g, self.kappa, self.gamma, tau)
    }

    /// `min{γ, κ}`, the rate that limits the trial repetition.
    pub fn slowest_rate(&self) -> f64 {
        self.gamma.min(self.kappa)
    }

    /// `max{1/κ, 1/γ}`, the time between successive trials.
    pub fn repetition_interval(&self) -> f64 {
        (1.0 / self.kappa).max(1.0 / self.gamma)
    }
}
