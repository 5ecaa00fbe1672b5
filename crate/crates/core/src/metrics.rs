//! Sensor figures of merit built on the closed form: responsivity,
//! shot-noise-limited resolution, linear dynamic range, and the ridge of
//! maximum responsivity over a (κ, signal) plane.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::closed_form::{g2_with_slope, g2_zero_delay_dual};
use crate::dual::{Dual, Scalar};
use crate::error::{ensure_positive, Error, Result};
use crate::par;
use crate::point::OperatingPoint;
use crate::tmm::CouplingModel;

/// Trial statistics of a measurement run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// Number of trials N.
    pub trials: f64,
    /// Fraction of heralded-failed trials, in [0, 1).
    pub epsilon: f64,
    /// Detection bandwidth in Hz.
    pub f_hz: f64,
    /// Time between trials in seconds.
    pub tau_rep: f64,
}

impl NoiseBudget {
    pub fn new(trials: f64, epsilon: f64, f_hz: f64, tau_rep: f64) -> Result<Self> {
        if !(trials >= 1.0 && trials.is_finite()) {
            return Err(Error::domain("trials", format!("need N >= 1, got {trials}")));
        }
        check_epsilon(epsilon)?;
        ensure_positive("f_hz", f_hz)?;
        ensure_positive("tau_rep", tau_rep)?;
        Ok(NoiseBudget {
            trials,
            epsilon,
            f_hz,
            tau_rep,
        })
    }

    /// The budget implied by a detection bandwidth: `N = ⌈min{γ,κ}/(2f)⌉`.
    pub fn for_bandwidth(point: &OperatingPoint, f_hz: f64, epsilon: f64) -> Result<Self> {
        ensure_positive("f_hz", f_hz)?;
        let trials = (point.slowest_rate() / (2.0 * f_hz)).ceil().max(1.0);
        Self::new(trials, epsilon, f_hz, point.repetition_interval())
    }

    /// One-sigma rule `N ≥ min{γ,κ}/(2f)`.
    pub fn confidence_ok(&self, point: &OperatingPoint) -> bool {
        self.trials >= point.slowest_rate() / (2.0 * self.f_hz)
    }

    pub fn effective_trials(&self) -> f64 {
        self.trials * (1.0 - self.epsilon)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::domain(
            "epsilon",
            format!("loss factor must lie in [0, 1), got {epsilon}"),
        ));
    }
    Ok(())
}

/// `R_g = |dG²(0)/dg|` in 1/Hz. The point's τ is ignored.
pub fn responsivity_g(point: &OperatingPoint) -> Result<f64> {
    let (_, slope) = g2_with_slope(&point.with_tau(0.0)?)?;
    Ok(slope.abs())
}

/// Bernoulli standard deviation of the coincidence estimate.
pub fn g2_noise(g2: f64, budget: &NoiseBudget) -> Result<f64> {
    if !(0.0..=1.0).contains(&g2) {
        return Err(Error::domain("g2", format!("probability must lie in [0, 1], got {g2}")));
    }
    check_epsilon(budget.epsilon)?;
    Ok((g2 * (1.0 - g2) / budget.effective_trials()).sqrt())
}

/// Noise-equivalent coupling shift per √Hz of detection bandwidth,
/// `√(2f·G²(1−G²)) / (R_g·√(min{γ,κ}(1−ε)))`, in Hz.
pub fn min_detectable_g(point: &OperatingPoint, budget: &NoiseBudget) -> Result<f64> {
    check_epsilon(budget.epsilon)?;
    let p = point.with_tau(0.0)?;
    let (g2, slope) = g2_with_slope(&p)?;
    min_detectable_from(g2, slope.abs(), p.slowest_rate(), budget)
}

pub(crate) fn min_detectable_from(g2: f64, responsivity: f64, slowest_rate: f64, budget: &NoiseBudget) -> Result<f64> {
    if responsivity == 0.0 {
        return Err(Error::Insensitive);
    }
    let g2 = g2.clamp(0.0, 1.0);
    let num = (2.0 * budget.f_hz * g2 * (1.0 - g2)).sqrt();
    Ok(num / (responsivity * (slowest_rate * (1.0 - budget.epsilon)).sqrt()))
}

pub fn ldr_db(dg_max: f64, dg_min: f64) -> f64 {
    20.0 * (dg_max / dg_min).log10()
}

/// Outcome of a linear-dynamic-range search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicRange {
    pub ldr_db: f64,
    pub dg_min: f64,
    /// The smaller of the two one-sided ranges.
    pub dg_max: f64,
    pub dg_max_up: Option<f64>,
    pub dg_max_down: Option<f64>,
    pub responsivity_max: f64,
}

/// Relative slope `|dR/dg|·g₀/R` above which a bias is not a maximum.
pub const MAX_RELATIVE_SLOPE: f64 = 1e-3;

fn responsivity_at(point: &OperatingPoint, g: f64) -> Result<f64> {
    responsivity_g(&point.with_g(g)?)
}

fn responsivity_slope(point: &OperatingPoint) -> Result<f64> {
    let g0 = point.g();
    let h = 1e-4 * point.gamma().min(g0.max(f64::MIN_POSITIVE));
    let central =
        |h: f64| -> Result<f64> { Ok((responsivity_at(point, g0 + h)? - responsivity_at(point, g0 - h)?) / (2.0 * h)) };
    Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
}

/// LDR at a bias on the responsivity ridge. `δg_max` is searched by
/// bisection on both sides of the bias; the smaller side is reported.
pub fn linear_dynamic_range(point: &OperatingPoint, budget: &NoiseBudget, linearity_tol: f64) -> Result<DynamicRange> {
    if !(linearity_tol > 0.0 && linearity_tol < 1.0) {
        return Err(Error::domain("linearity_tol", "must lie in (0, 1)"));
    }
    let point = point.with_tau(0.0)?;
    let g0 = point.g();
    ensure_positive("g", g0)?;
    let r0 = responsivity_g(&point)?;
    if r0 == 0.0 {
        return Err(Error::Insensitive);
    }
    let slope = (responsivity_slope(&point)? * g0 / r0).abs();
    if slope > MAX_RELATIVE_SLOPE {
        return Err(Error::NotAtMaximum { slope });
    }
    let target = (1.0 - linearity_tol) * r0;
    let up = one_sided_range(&point, target, 1.0)?;
    let down = one_sided_range(&point, target, -1.0)?;
    let dg_max = match (up, down) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::Conditioning(
                "responsivity never drops by the linearity tolerance".into(),
            ))
        }
    };
    let dg_min = min_detectable_g(&point, budget)?;
    Ok(DynamicRange {
        ldr_db: ldr_db(dg_max, dg_min),
        dg_min,
        dg_max,
        dg_max_up: up,
        dg_max_down: down,
        responsivity_max: r0,
    })
}

fn one_sided_range(point: &OperatingPoint, target: f64, dir: f64) -> Result<Option<f64>> {
    let g0 = point.g();
    let below = |delta: f64| -> Result<bool> { Ok(responsivity_at(point, g0 + dir * delta)? <= target) };
    let mut lo = 0.0;
    let mut hi = 1e-6 * g0;
    loop {
        if dir < 0.0 && hi >= g0 {
            return Ok(None);
        }
        if hi > 10.0 * g0 {
            return Ok(None);
        }
        if below(hi)? {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Maximise `R_g` in g within `[lo, hi]` (Hz) by golden-section search.
pub fn refine_ridge_g(kappa: f64, gamma: f64, lo: f64, hi: f64) -> Result<f64> {
    ensure_positive("lo", lo)?;
    if !(hi > lo) {
        return Err(Error::domain("hi", "bracket must satisfy hi > lo"));
    }
    let base = OperatingPoint::new(lo, kappa, gamma, 0.0)?;
    let r = |g: f64| responsivity_at(&base, g);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut rc, mut rd) = (r(c)?, r(d)?);
    while (b - a) > 1e-12 * b {
        if rc > rd {
            b = d;
            d = c;
            rd = rc;
            c = b - phi * (b - a);
            rc = r(c)?;
        } else {
            a = c;
            c = d;
            rc = rd;
            d = a + phi * (b - a);
            rd = r(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bias on the strongest responsivity maximum at damping `kappa` (Hz):
/// a scan over g/γ ∈ (0, 10] followed by golden-section refinement.
pub fn ridge_bias(kappa: f64, gamma: f64) -> Result<f64> {
    ensure_positive("kappa", kappa)?;
    ensure_positive("gamma", gamma)?;
    let step = 5e-3;
    let grid: Vec<f64> = (1..=2000).map(|i| step * i as f64).collect();
    let map = find_ridge(&[kappa / gamma], &grid, SignalAxis::CouplingRatio)?;
    let g = map.ridge[0].signal;
    refine_ridge_g(kappa, gamma, (g - step).max(0.5 * step) * gamma, (g + step) * gamma)
}

/// Which parameter the signal axis of a map represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axis")]
pub enum SignalAxis {
    /// Signal axis g/γ, κ axis κ/γ; values `|dG²(0)/d(g/γ)|`.
    CouplingRatio,
    /// Signal axis x (nm) at n = 1, κ axis in Hz; values `R_x` in 1/nm.
    Separation { model: CouplingModel, gamma: f64 },
    /// Signal axis n at fixed x (nm), κ axis in Hz; values `R_n` in 1/RIU.
    Index {
        model: CouplingModel,
        x_bias: f64,
        gamma: f64,
    },
}

impl SignalAxis {
    /// Responsivity to the signal at one cell, by differentiating G²(0)
    /// through the coupling model with a dual-valued signal.
    pub fn responsivity(&self, kappa: f64, signal: f64) -> Result<f64> {
        let (g, kappa_ratio) = match *self {
            SignalAxis::CouplingRatio => (Dual::variable(signal), kappa),
            SignalAxis::Separation { model, gamma } => {
                ensure_positive("gamma", gamma)?;
                (
                    model
                        .g_dual(Dual::variable(signal), Dual::constant(1.0))
                        .scale(1.0 / gamma),
                    kappa / gamma,
                )
            }
            SignalAxis::Index { model, x_bias, gamma } => {
                ensure_positive("gamma", gamma)?;
                (
                    model
                        .g_dual(Dual::constant(x_bias), Dual::variable(signal))
                        .scale(1.0 / gamma),
                    kappa / gamma,
                )
            }
        };
        ensure_positive("kappa", kappa_ratio)?;
        Ok(g2_zero_delay_dual(g, kappa_ratio)?.eps.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub kappa: f64,
    pub signal: f64,
    pub value: f64,
}

/// Responsivity sampled on a (κ, signal) grid, rows indexed by κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsivityMap {
    pub kappa_axis: Vec<f64>,
    pub signal_axis: Vec<f64>,
    /// Row-major: `values[row * signal_axis.len() + col]`.
    pub values: Vec<f64>,
    pub ridge: Vec<RidgePoint>,
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::GridMismatch(format!("{name} grid is empty")));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::GridMismatch(format!("{name} grid has non-finite entries")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

impl ResponsivityMap {
    /// Evaluate `f(kappa, signal)` over the grid; cells are independent and
    /// computed in parallel, assembled by index.
    pub fn evaluate<F>(kappa_axis: &[f64], signal_axis: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Sync + Send,
    {
        check_axis("kappa", kappa_axis)?;
        check_axis("signal", signal_axis)?;
        let cols = signal_axis.len();
        let values = par::try_map_indexed(kappa_axis.len() * cols, |i| {
            f(kappa_axis[i / cols], signal_axis[i % cols])
        })?;
        Ok(ResponsivityMap {
            kappa_axis: kappa_axis.to_vec(),
            signal_axis: signal_axis.to_vec(),
            values,
            ridge: Vec::new(),
        })
    }

    pub fn evaluate_seq<F>(kappa_axis: &[f64], signal_axis: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        check_axis("kappa", kappa_axis)?;
        check_axis("signal", signal_axis)?;
        let cols = signal_axis.len();
        let values = par::try_map_indexed_seq(kappa_axis.len() * cols, |i| {
            f(kappa_axis[i / cols], signal_axis[i % cols])
        })?;
        Ok(ResponsivityMap {
            kappa_axis: kappa_axis.to_vec(),
            signal_axis: signal_axis.to_vec(),
            values,
            ridge: Vec::new(),
        })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let cols = self.signal_axis.len();
        &self.values[r * cols..(r + 1) * cols]
    }

    /// Interior local maxima of one row, interpolated: `(signal, value)`.
    pub fn row_maxima(&self, r: usize) -> Vec<(f64, f64)> {
        let row = self.row(r);
        let x = &self.signal_axis;
        (1..row.len().saturating_sub(1))
            .filter(|&i| row[i] > row[i - 1] && row[i] >= row[i + 1])
            .map(|i| parabolic_vertex(x[i - 1], x[i], x[i + 1], row[i - 1], row[i], row[i + 1]))
            .collect()
    }

    /// Per row, the strongest interior maximum.
    pub fn locate_ridge(&self) -> Result<Vec<RidgePoint>> {
        (0..self.kappa_axis.len())
            .map(|r| {
                self.row_maxima(r)
                    .into_iter()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(signal, value)| RidgePoint {
                        kappa: self.kappa_axis[r],
                        signal,
                        value,
                    })
                    .ok_or(Error::NoRidge { row: r })
            })
            .collect()
    }

    pub fn with_ridge(mut self) -> Result<Self> {
        self.ridge = self.locate_ridge()?;
        Ok(self)
    }
}

/// Vertex of the parabola through three points.
fn parabolic_vertex(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature >= 0.0 {
        return (x1, y1);
    }
    // y = y1 + d·(x − x1) + c·(x − x1)(x − x0) rewritten around x1
    let slope_at_x1 = d01 + curvature * (x1 - x0);
    let shift = -slope_at_x1 / (2.0 * curvature);
    let x = x1 + shift;
    (x, y1 + slope_at_x1 * shift + curvature * shift * shift)
}

/// Responsivity map on the chosen axis with its ridge located.
pub fn find_ridge(kappa_grid: &[f64], signal_grid: &[f64], axis: SignalAxis) -> Result<ResponsivityMap> {
    ResponsivityMap::evaluate(kappa_grid, signal_grid, |k, s| axis.responsivity(k, s))?.with_ridge()
}

/// Monte-Carlo replicates of the plug-in estimator `Ĝ² = coincidences / heralded`.
///
/// Each replicate runs `trials` Bernoulli trials: a trial is heralded with
/// probability `1 − ε` and a heralded trial is a coincidence with
/// probability `g2`. Sums of Bernoulli draws are sampled as binomials.
/// Replicate `i` uses ChaCha stream `i` of `seed`, so results do not depend
/// on scheduling.
pub fn simulate_g2_estimates(g2: f64, trials: u64, epsilon: f64, replicates: usize, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&g2) {
        return Err(Error::domain("g2", "probability must lie in [0, 1]"));
    }
    check_epsilon(epsilon)?;
    if trials == 0 {
        return Err(Error::domain("trials", "need at least one trial"));
    }
    let heralds = Binomial::new(trials, 1.0 - epsilon).map_err(|e| Error::domain("epsilon", e.to_string()))?;
    Ok(par::map_indexed(replicates, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        loop {
            let k = heralds.sample(&mut rng);
            if k == 0 {
                continue;
            }
            let hits = Binomial::new(k, g2).expect("probability validated").sample(&mut rng);
            break hits as f64 / k as f64;
        }
    }))
}

/// Sample standard deviation of [`simulate_g2_estimates`].
pub fn monte_carlo_g2_noise(g2: f64, trials: u64, epsilon: f64, replicates: usize, seed: u64) -> Result<f64> {
    if replicates < 2 {
        return Err(Error::domain("replicates", "need at least two replicates"));
    }
    let xs = simulate_g2_estimates(g2, trials, epsilon, replicates, seed)?;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}
