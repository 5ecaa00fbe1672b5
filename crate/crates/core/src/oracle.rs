//! Brute-force G²(τ): integrate each photon's single-photon response through
//! the coupled cavities, then integrate the two-photon output amplitude.
//!
//! The dynamics is linear and the input is a product of two single photons,
//! so the two-photon amplitude at the detectors factorises as
//! `ψ(t, t') = u₁(t)v₂(t') + v₁(t)u₂(t')`, where `u` is the output of the
//! photon entering port 1 and `v` that of the photon entering port 2.
//! Vacuum inputs never appear: every moment here is normally ordered.
//!
//! Two evaluation paths are provided for the single-photon response: a
//! fixed-step RK4 integration of the cavity equations, and a direct
//! convolution with the analytic propagator kernels A(t)..D(t).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{CoincidenceResult, Method};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::par;
use crate::point::OperatingPoint;
use crate::quadrature::{simpson, simpson_weights};

/// Largest allowed step as a fraction of the fastest time scale.
pub const MAX_STEP_FRACTION: f64 = 0.01;
/// Residual (unemitted) norm tolerated beyond the horizon.
pub const HORIZON_RESIDUAL: f64 = 1e-8;
/// Pulses must be normalised to this tolerance.
pub const NORM_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    /// `ξ(t) = √γ e^{-γ(t-delay)/2}` for `t ≥ delay`.
    DecayingExponential,
    /// Amplitudes on a uniform grid starting at `delay`, linearly interpolated.
    Sampled { dt: f64, samples: Vec<Complex64> },
}

/// Temporal mode of one input photon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub kind: PulseKind,
    /// Bandwidth in Hz; for sampled pulses it sets the resolution and horizon.
    pub gamma: f64,
    /// Start time in seconds.
    pub delay: f64,
}

impl PulseShape {
    pub fn exponential(gamma: f64, delay: f64) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        ensure_finite("delay", delay)?;
        if delay < 0.0 {
            return Err(Error::domain("delay", "pulse delays must be >= 0"));
        }
        Ok(PulseShape {
            kind: PulseKind::DecayingExponential,
            gamma,
            delay,
        })
    }

    /// A user-sampled pulse. The samples must already be normalised.
    pub fn sampled(samples: Vec<Complex64>, dt: f64, delay: f64, gamma: f64) -> Result<Self> {
        ensure_positive("dt", dt)?;
        ensure_positive("gamma", gamma)?;
        ensure_finite("delay", delay)?;
        if delay < 0.0 {
            return Err(Error::domain("delay", "pulse delays must be >= 0"));
        }
        if samples.len() < 2 {
            return Err(Error::domain("samples", "need at least two samples"));
        }
        let pulse = PulseShape {
            kind: PulseKind::Sampled { dt, samples },
            gamma,
            delay,
        };
        let norm = pulse.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(
                "samples",
                format!("pulse norm is {norm}, expected 1 within {NORM_TOLERANCE:e}"),
            ));
        }
        Ok(pulse)
    }

    /// Like [`PulseShape::sampled`] but rescales the samples to unit norm first.
    pub fn sampled_normalized(mut samples: Vec<Complex64>, dt: f64, delay: f64, gamma: f64) -> Result<Self> {
        let intensity: Vec<f64> = samples.iter().map(|s| s.norm_sqr()).collect();
        let norm = trapezoid(&intensity, dt);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("samples", "pulse has zero or non-finite norm"));
        }
        let k = norm.sqrt().recip();
        samples.iter_mut().for_each(|s| *s *= k);
        Self::sampled(samples, dt, delay, gamma)
    }

    /// The pair (ξ, η) for the operating point: identical exponentials
    /// separated by τ. For τ < 0 the port-1 photon is the delayed one.
    pub fn hom_pair(point: &OperatingPoint) -> Result<(PulseShape, PulseShape)> {
        let tau = point.tau();
        let gamma = point.gamma();
        if tau >= 0.0 {
            Ok((Self::exponential(gamma, 0.0)?, Self::exponential(gamma, tau)?))
        } else {
            Ok((Self::exponential(gamma, -tau)?, Self::exponential(gamma, 0.0)?))
        }
    }

    pub fn with_delay(&self, delay: f64) -> Result<Self> {
        ensure_finite("delay", delay)?;
        if delay < 0.0 {
            return Err(Error::domain("delay", "pulse delays must be >= 0"));
        }
        Ok(PulseShape { delay, ..self.clone() })
    }

    /// Amplitude at time `t`, taking the right limit at the pulse start.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.amplitude_since_start(t - self.delay)
    }

    /// Amplitude `s` seconds after the pulse start; `s = 0` is the right limit.
    pub fn amplitude_since_start(&self, s: f64) -> Complex64 {
        if s < 0.0 {
            return ZERO;
        }
        match &self.kind {
            PulseKind::DecayingExponential => Complex64::new(self.gamma.sqrt() * (-0.5 * self.gamma * s).exp(), 0.0),
            PulseKind::Sampled { dt, samples } => {
                let x = s / dt;
                let i = x.floor() as usize;
                if i + 1 >= samples.len() {
                    return if i + 1 == samples.len() && x == i as f64 {
                        samples[i]
                    } else {
                        ZERO
                    };
                }
                let frac = x - i as f64;
                samples[i] * (1.0 - frac) + samples[i + 1] * frac
            }
        }
    }

    /// Time after which the amplitude is identically zero (infinite for the exponential).
    pub fn support_end(&self) -> f64 {
        match &self.kind {
            PulseKind::DecayingExponential => f64::INFINITY,
            PulseKind::Sampled { dt, samples } => self.delay + dt * (samples.len() - 1) as f64,
        }
    }

    /// Duration after the delay that has to be covered before the
    /// cavity ring-down starts.
    fn active_duration(&self) -> f64 {
        match &self.kind {
            PulseKind::DecayingExponential => 0.0,
            PulseKind::Sampled { dt, samples } => dt * (samples.len() - 1) as f64,
        }
    }

    /// `∫_t^∞ |ξ|²`.
    pub fn tail_norm(&self, t: f64) -> f64 {
        match &self.kind {
            PulseKind::DecayingExponential => {
                let s = (t - self.delay).max(0.0);
                (-self.gamma * s).exp()
            }
            PulseKind::Sampled { .. } => {
                let end = self.support_end();
                if t >= end {
                    return 0.0;
                }
                let n = 2001;
                let start = t.max(self.delay);
                let h = (end - start) / (n - 1) as f64;
                let v: Vec<f64> = (0..n)
                    .map(|i| self.amplitude(start + i as f64 * h).norm_sqr())
                    .collect();
                trapezoid(&v, h)
            }
        }
    }

    /// `∫|ξ|²`; exact for the exponential, trapezoidal on the samples otherwise.
    pub fn norm(&self) -> f64 {
        match &self.kind {
            PulseKind::DecayingExponential => 1.0,
            PulseKind::Sampled { dt, samples } => {
                let v: Vec<f64> = samples.iter().map(|s| s.norm_sqr()).collect();
                trapezoid(&v, *dt)
            }
        }
    }
}

fn trapezoid(v: &[f64], dt: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    dt * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// Input waveguide a photon is launched into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Port {
    One,
    Two,
}

/// Propagator kernels of the closed two-cavity system.
///
/// `U(t) = [[A, B], [B, A]]` evolves the cavity amplitudes and
/// `U(-t) = [[C, D], [D, C]]` is its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinKernels {
    pub kappa: f64,
    pub g: f64,
}

impl LangevinKernels {
    pub fn new(point: &OperatingPoint) -> Self {
        LangevinKernels {
            kappa: point.kappa(),
            g: point.g(),
        }
    }

    pub fn a(&self, t: f64) -> Complex64 {
        Complex64::new((-0.5 * self.kappa * t).exp() * (self.g * t).cos(), 0.0)
    }

    pub fn b(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, -(-0.5 * self.kappa * t).exp() * (self.g * t).sin())
    }

    pub fn c(&self, t: f64) -> Complex64 {
        Complex64::new((0.5 * self.kappa * t).exp() * (self.g * t).cos(), 0.0)
    }

    pub fn d(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, (0.5 * self.kappa * t).exp() * (self.g * t).sin())
    }
}

/// Uniform grid `t_i = i·dt`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.len - 1)
    }
}

/// Output amplitudes at both detectors for one launched photon.
///
/// Values before `start` are zero; the value stored at `start` is the
/// right limit (the input pulse may switch on discontinuously there).
#[derive(Debug, Clone, PartialEq)]
pub struct PortResponse {
    pub grid: TimeGrid,
    pub start: usize,
    pub out1: Vec<Complex64>,
    pub out2: Vec<Complex64>,
    /// Norm still inside the cavities or not yet injected at the horizon.
    pub residual: f64,
}

impl PortResponse {
    fn scaled(&self, t1: f64, t2: f64) -> Self {
        let (a1, a2) = (t1.sqrt(), t2.sqrt());
        PortResponse {
            grid: self.grid,
            start: self.start,
            out1: self.out1.iter().map(|z| z * a1).collect(),
            out2: self.out2.iter().map(|z| z * a2).collect(),
            residual: self.residual,
        }
    }

    /// `∫(|out₁|² + |out₂|²) dt`, the emitted photon number.
    pub fn emitted_norm(&self) -> f64 {
        integrate_segmented(self.grid, &[self.start], |i, left| {
            let a = one_sided(self, &self.out1, i, left);
            let b = one_sided(self, &self.out2, i, left);
            a.norm_sqr() + b.norm_sqr()
        })
    }
}

/// Responses of both photons on a shared grid: `u` for port 1, `v` for port 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePhotonResponse {
    pub u: PortResponse,
    pub v: PortResponse,
}

impl SinglePhotonResponse {
    pub fn u1(&self) -> &[Complex64] {
        &self.u.out1
    }
    pub fn u2(&self) -> &[Complex64] {
        &self.u.out2
    }
    pub fn v1(&self) -> &[Complex64] {
        &self.v.out1
    }
    pub fn v2(&self) -> &[Complex64] {
        &self.v.out2
    }
}

/// Resolution knobs for [`g2_oracle_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Step as a fraction of the fastest time scale (≤ [`MAX_STEP_FRACTION`]).
    pub step_fraction: f64,
    /// Horizon in units of `max{1/κ, 1/γ}`, added to the latest pulse start.
    pub horizon_factor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            step_fraction: 0.5 * MAX_STEP_FRACTION,
            horizon_factor: 30.0,
        }
    }
}

/// Largest step that resolves `1/κ`, `1/max(g, γ)` and `1/γ`.
pub fn max_step(point: &OperatingPoint, gamma: f64) -> f64 {
    let fastest = point.kappa().max(point.g().max(gamma)).max(gamma);
    MAX_STEP_FRACTION / fastest
}

fn check_step(point: &OperatingPoint, pulse: &PulseShape, dt: f64) -> Result<()> {
    ensure_positive("dt", dt)?;
    let limit = max_step(point, pulse.gamma).min(max_step(point, point.gamma()));
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, limit });
    }
    Ok(())
}

fn minimum_horizon(point: &OperatingPoint, pulse: &PulseShape) -> f64 {
    10.0 * (1.0 / pulse.gamma).max(1.0 / point.kappa()) + pulse.delay + pulse.active_duration()
}

fn grid_index(delay: f64, dt: f64) -> Result<usize> {
    let k = (delay / dt).round();
    if (k * dt - delay).abs() > 1e-9 * dt.max(delay) {
        return Err(Error::GridMismatch(format!(
            "pulse delay {delay:e} s is not a multiple of dt = {dt:e} s"
        )));
    }
    Ok(k as usize)
}

fn port_vector(port: Port, x: Complex64) -> [Complex64; 2] {
    match port {
        Port::One => [x, ZERO],
        Port::Two => [ZERO, x],
    }
}

fn prepare(pulse: &PulseShape, point: &OperatingPoint, horizon: f64, dt: f64) -> Result<(TimeGrid, usize)> {
    check_step(point, pulse, dt)?;
    ensure_positive("horizon", horizon)?;
    let needed = minimum_horizon(point, pulse);
    if horizon < needed * (1.0 - 1e-12) {
        return Err(Error::Horizon {
            horizon,
            residual: f64::NAN,
            limit: HORIZON_RESIDUAL,
        });
    }
    let start = grid_index(pulse.delay, dt)?;
    let steps = (horizon / dt).ceil() as usize;
    Ok((TimeGrid { dt, len: steps + 1 }, start))
}

fn finish(
    grid: TimeGrid,
    start: usize,
    out1: Vec<Complex64>,
    out2: Vec<Complex64>,
    stored: f64,
    pulse: &PulseShape,
) -> Result<PortResponse> {
    let residual = stored + pulse.tail_norm(grid.horizon());
    if !(residual <= HORIZON_RESIDUAL) {
        return Err(Error::Horizon {
            horizon: grid.horizon(),
            residual,
            limit: HORIZON_RESIDUAL,
        });
    }
    Ok(PortResponse {
        grid,
        start,
        out1,
        out2,
        residual,
    })
}

/// RK4 integration of the cavity amplitudes driven by `pulse` on `port`,
/// mapped to the output fields `√κ·c_j − a_{j,in}`.
pub fn integrate_response(
    pulse: &PulseShape,
    port: Port,
    point: &OperatingPoint,
    horizon: f64,
    dt: f64,
) -> Result<PortResponse> {
    let (grid, start) = prepare(pulse, point, horizon, dt)?;
    let kappa = point.kappa();
    let sqrt_k = kappa.sqrt();
    let ig = I * point.g();
    let half_k = 0.5 * kappa;

    // Times below are measured from the pulse start.
    let rhs = |c: [Complex64; 2], s: f64| -> [Complex64; 2] {
        let drive = port_vector(port, pulse.amplitude_since_start(s) * sqrt_k);
        [
            -ig * c[1] - half_k * c[0] + drive[0],
            -ig * c[0] - half_k * c[1] + drive[1],
        ]
    };

    let mut out1 = vec![ZERO; grid.len];
    let mut out2 = vec![ZERO; grid.len];
    let mut c = [ZERO; 2];
    let emit = |c: [Complex64; 2], s: f64, o1: &mut Complex64, o2: &mut Complex64| {
        let input = port_vector(port, pulse.amplitude_since_start(s));
        *o1 = c[0] * sqrt_k - input[0];
        *o2 = c[1] * sqrt_k - input[1];
    };
    emit(c, 0.0, &mut out1[start], &mut out2[start]);
    for i in start..grid.len - 1 {
        let t = (i - start) as f64 * dt;
        let h = dt;
        let k1 = rhs(c, t);
        let k2 = rhs(axpy(c, k1, 0.5 * h), t + 0.5 * h);
        let k3 = rhs(axpy(c, k2, 0.5 * h), t + 0.5 * h);
        let k4 = rhs(axpy(c, k3, h), t + h);
        for j in 0..2 {
            c[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
        emit(c, (i + 1 - start) as f64 * dt, &mut out1[i + 1], &mut out2[i + 1]);
    }
    let stored = c[0].norm_sqr() + c[1].norm_sqr();
    finish(grid, start, out1, out2, stored, pulse)
}

fn axpy(c: [Complex64; 2], k: [Complex64; 2], h: f64) -> [Complex64; 2] {
    [c[0] + k[0] * h, c[1] + k[1] * h]
}

/// The same response from the closed-system kernels:
/// `c(t) = √κ·U(t)·∫₀ᵗ U(−t')·a_in(t') dt'`, with the running integral
/// advanced by Simpson's rule on each step.
///
/// The kernels `C`, `D` grow like `e^{κt/2}`; horizons with `κT > 1400`
/// are refused as ill-conditioned.
pub fn kernel_response(
    pulse: &PulseShape,
    port: Port,
    point: &OperatingPoint,
    horizon: f64,
    dt: f64,
) -> Result<PortResponse> {
    let (grid, start) = prepare(pulse, point, horizon, dt)?;
    let kernels = LangevinKernels::new(point);
    if 0.5 * kernels.kappa * grid.horizon() > 700.0 {
        return Err(Error::Conditioning(format!(
            "kernel path overflows for κT/2 = {}",
            0.5 * kernels.kappa * grid.horizon()
        )));
    }
    let sqrt_k = kernels.kappa.sqrt();
    // U(-t)·e_port·a_in(t)
    let t0 = grid.time(start);
    let integrand = |t: f64| -> [Complex64; 2] {
        let x = pulse.amplitude_since_start(t - t0);
        let (c, d) = (kernels.c(t), kernels.d(t));
        match port {
            Port::One => [c * x, d * x],
            Port::Two => [d * x, c * x],
        }
    };
    let mut acc = [ZERO; 2];
    let mut out1 = vec![ZERO; grid.len];
    let mut out2 = vec![ZERO; grid.len];
    let emit = |acc: [Complex64; 2], t: f64| -> (Complex64, Complex64) {
        let (a, b) = (kernels.a(t), kernels.b(t));
        let c1 = (a * acc[0] + b * acc[1]) * sqrt_k;
        let c2 = (b * acc[0] + a * acc[1]) * sqrt_k;
        let input = port_vector(port, pulse.amplitude_since_start(t - t0));
        (c1 * sqrt_k - input[0], c2 * sqrt_k - input[1])
    };
    let (o1, o2) = emit(acc, t0);
    out1[start] = o1;
    out2[start] = o2;
    let mut prev = integrand(grid.time(start));
    for i in start..grid.len - 1 {
        let t = grid.time(i);
        let mid = integrand(t + 0.5 * dt);
        let next = integrand(t + dt);
        for j in 0..2 {
            acc[j] += (prev[j] + mid[j] * 4.0 + next[j]) * (dt / 6.0);
        }
        prev = next;
        let (o1, o2) = emit(acc, t + dt);
        out1[i + 1] = o1;
        out2[i + 1] = o2;
    }
    let t_end = grid.horizon();
    let (a, b) = (kernels.a(t_end), kernels.b(t_end));
    let stored = ((a * acc[0] + b * acc[1]) * sqrt_k).norm_sqr() + ((b * acc[0] + a * acc[1]) * sqrt_k).norm_sqr();
    finish(grid, start, out1, out2, stored, pulse)
}

/// Responses of both photons on a common grid.
pub fn respond_pair(
    pulse1: &PulseShape,
    pulse2: &PulseShape,
    point: &OperatingPoint,
    horizon: f64,
    dt: f64,
) -> Result<SinglePhotonResponse> {
    Ok(SinglePhotonResponse {
        u: integrate_response(pulse1, Port::One, point, horizon, dt)?,
        v: integrate_response(pulse2, Port::Two, point, horizon, dt)?,
    })
}

/// Value of `series` at node `i` as seen from a segment that lies to the
/// left (`left == true`) or right of node `i`.
fn one_sided(resp: &PortResponse, series: &[Complex64], i: usize, left: bool) -> Complex64 {
    if i < resp.start || (left && i == resp.start && resp.start > 0) {
        ZERO
    } else {
        series[i]
    }
}

/// Integrate a nodal function over segments split at `breaks`. The callback
/// receives the node index and whether it is being read as a left limit
/// (node is the right end of its segment).
fn integrate_segmented<F>(grid: TimeGrid, breaks: &[usize], f: F) -> f64
where
    F: Fn(usize, bool) -> f64,
{
    segments(grid.len, breaks)
        .into_iter()
        .map(|(a, b)| {
            let values: Vec<f64> = (a..=b).map(|i| f(i, i == b && i != grid.len - 1)).collect();
            simpson(&values, grid.dt)
        })
        .sum()
}

fn integrate_segmented_complex<F>(grid: TimeGrid, breaks: &[usize], f: F) -> Complex64
where
    F: Fn(usize, bool) -> Complex64,
{
    segments(grid.len, breaks)
        .into_iter()
        .map(|(a, b)| {
            let values: Vec<Complex64> = (a..=b).map(|i| f(i, i == b && i != grid.len - 1)).collect();
            simpson(&values, grid.dt)
        })
        .fold(ZERO, |x, y| x + y)
}

fn segments(len: usize, breaks: &[usize]) -> Vec<(usize, usize)> {
    let mut cuts: Vec<usize> = breaks.iter().copied().filter(|&b| b > 0 && b + 1 < len).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut a = 0;
    for c in cuts {
        out.push((a, c));
        a = c;
    }
    out.push((a, len - 1));
    out
}

fn check_common_grid(u: &PortResponse, v: &PortResponse) -> Result<()> {
    if u.grid != v.grid || u.out1.len() != v.out1.len() {
        return Err(Error::GridMismatch(format!(
            "responses on different grids (dt {:e} vs {:e}, len {} vs {})",
            u.grid.dt, v.grid.dt, u.grid.len, v.grid.len
        )));
    }
    Ok(())
}

/// Numerator and denominator of G² from two responses, using the
/// factorised form of the double integral.
pub fn coincidence_from_responses(u: &PortResponse, v: &PortResponse) -> Result<CoincidenceResult> {
    check_common_grid(u, v)?;
    let grid = u.grid;
    let breaks = [u.start, v.start];
    let power = |r: &PortResponse, s: &[Complex64]| {
        integrate_segmented(grid, &breaks, |i, left| one_sided(r, s, i, left).norm_sqr())
    };
    let overlap = |r1: &PortResponse, s1: &[Complex64], r2: &PortResponse, s2: &[Complex64]| {
        integrate_segmented_complex(grid, &breaks, |i, left| {
            one_sided(r1, s1, i, left) * one_sided(r2, s2, i, left).conj()
        })
    };
    let pu1 = power(u, &u.out1);
    let pu2 = power(u, &u.out2);
    let pv1 = power(v, &v.out1);
    let pv2 = power(v, &v.out2);
    let x = overlap(u, &u.out1, v, &v.out1);
    let y = overlap(v, &v.out2, u, &u.out2);
    let numerator = pu1 * pv2 + pv1 * pu2 + 2.0 * (x * y).re;
    let denominator = (pu1 + pv1) * (pu2 + pv2);
    build_result(numerator, denominator)
}

fn build_result(numerator: f64, denominator: f64) -> Result<CoincidenceResult> {
    if !(denominator > 0.0) {
        return Err(Error::Conditioning("no intensity reaches one of the detectors".into()));
    }
    Ok(CoincidenceResult {
        value: numerator / denominator,
        method: Method::Oracle,
        numerator: Some(numerator.max(0.0)),
        denominator: Some(denominator),
    })
}

/// The numerator evaluated literally as a double sum over the product grid,
/// `Σᵢ Σⱼ wᵢ wⱼ |u₁(tᵢ)v₂(tⱼ) + v₁(tᵢ)u₂(tⱼ)|²`, blockwise on the segments.
/// O(n²); meant for cross-checking the factorised form on coarse grids.
pub fn two_photon_numerator_direct(u: &PortResponse, v: &PortResponse) -> Result<f64> {
    check_common_grid(u, v)?;
    let grid = u.grid;
    let segs = segments(grid.len, &[u.start, v.start]);
    let mut total = 0.0;
    for &(a1, b1) in &segs {
        let w1 = simpson_weights(b1 - a1 + 1, grid.dt);
        for &(a2, b2) in &segs {
            let w2 = simpson_weights(b2 - a2 + 1, grid.dt);
            let rows = par::map_indexed(b1 - a1 + 1, |ii| {
                let i = a1 + ii;
                let left_i = i == b1 && i != grid.len - 1;
                let u1 = one_sided(u, &u.out1, i, left_i);
                let v1 = one_sided(v, &v.out1, i, left_i);
                let mut row = 0.0;
                for (jj, &wj) in w2.iter().enumerate() {
                    let j = a2 + jj;
                    let left_j = j == b2 && j != grid.len - 1;
                    let v2 = one_sided(v, &v.out2, j, left_j);
                    let u2 = one_sided(u, &u.out2, j, left_j);
                    row += wj * (u1 * v2 + v1 * u2).norm_sqr();
                }
                w1[ii] * row
            });
            total += rows.iter().sum::<f64>();
        }
    }
    Ok(total)
}

/// Grid and aligned pulses chosen for an oracle run: time origin at the
/// earlier pulse, step dividing the relative delay.
fn plan(
    pulse1: &PulseShape,
    pulse2: &PulseShape,
    point: &OperatingPoint,
    config: &OracleConfig,
) -> Result<(PulseShape, PulseShape, f64, f64)> {
    if !(config.step_fraction > 0.0 && config.step_fraction <= MAX_STEP_FRACTION) {
        return Err(Error::domain(
            "step_fraction",
            format!("must lie in (0, {MAX_STEP_FRACTION}]"),
        ));
    }
    ensure_positive("horizon_factor", config.horizon_factor)?;
    let origin = pulse1.delay.min(pulse2.delay);
    let p1 = pulse1.with_delay(pulse1.delay - origin)?;
    let p2 = pulse2.with_delay(pulse2.delay - origin)?;
    let gamma_fast = p1.gamma.max(p2.gamma);
    let target = config.step_fraction / MAX_STEP_FRACTION * max_step(point, gamma_fast);
    let lag = p1.delay.max(p2.delay);
    let dt = if lag > 0.0 { lag / (lag / target).ceil() } else { target };
    let late = |p: &PulseShape| p.delay + p.active_duration();
    let scale = (1.0 / p1.gamma.min(p2.gamma)).max(1.0 / point.kappa());
    let horizon = config.horizon_factor * scale + late(&p1).max(late(&p2));
    Ok((p1, p2, horizon, dt))
}

/// G² for the given pulses at the default resolution.
pub fn g2_oracle(pulse1: &PulseShape, pulse2: &PulseShape, point: &OperatingPoint) -> Result<CoincidenceResult> {
    g2_oracle_with(pulse1, pulse2, point, &OracleConfig::default())
}

pub fn g2_oracle_with(
    pulse1: &PulseShape,
    pulse2: &PulseShape,
    point: &OperatingPoint,
    config: &OracleConfig,
) -> Result<CoincidenceResult> {
    let resp = oracle_responses(pulse1, pulse2, point, config)?;
    coincidence_from_responses(&resp.u, &resp.v)
}

/// The responses an oracle run would use, for inspection.
pub fn oracle_responses(
    pulse1: &PulseShape,
    pulse2: &PulseShape,
    point: &OperatingPoint,
    config: &OracleConfig,
) -> Result<SinglePhotonResponse> {
    let (p1, p2, horizon, dt) = plan(pulse1, pulse2, point, config)?;
    respond_pair(&p1, &p2, point, horizon, dt)
}

/// G² with detector losses: output `k` reaches its detector with
/// probability `T_k`. Numerator and denominator both pick up `T₁T₂`.
pub fn g2_oracle_lossy(
    pulse1: &PulseShape,
    pulse2: &PulseShape,
    point: &OperatingPoint,
    t1_out: f64,
    t2_out: f64,
) -> Result<CoincidenceResult> {
    for (name, t) in [("t1_out", t1_out), ("t2_out", t2_out)] {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain(name, format!("transmission must lie in (0, 1], got {t}")));
        }
    }
    let resp = oracle_responses(pulse1, pulse2, point, &OracleConfig::default())?;
    coincidence_from_responses(&resp.u.scaled(t1_out, t2_out), &resp.v.scaled(t1_out, t2_out))
}

/// Convenience: oracle G² for the exponential HOM pair of `point`.
pub fn g2_oracle_point(point: &OperatingPoint) -> Result<CoincidenceResult> {
    let (p1, p2) = PulseShape::hom_pair(point)?;
    g2_oracle(&p1, &p2, point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::g2_closed_form;

    fn point(g: f64, k: f64, t: f64) -> OperatingPoint {
        OperatingPoint::from_ratios(g, k, t, 1.0).unwrap()
    }

    #[test]
    fn kernels_start_at_identity() {
        let k = LangevinKernels { kappa: 2.0, g: 1.8 };
        assert_eq!(k.a(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(k.b(0.0).norm(), 0.0);
        assert_eq!(k.c(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(k.d(0.0).norm(), 0.0);
        for t in [0.1, 0.7, 3.0] {
            let lhs = k.a(t).norm_sqr() + k.b(t).norm_sqr();
            assert!((lhs - (-2.0 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupled_photon_stays_in_its_port() {
        let p = point(0.0, 2.0, 0.0);
        let pulse = PulseShape::exponential(1.0, 0.0).unwrap();
        let r = integrate_response(&pulse, Port::One, &p, 30.0, 0.004).unwrap();
        assert!(r.out2.iter().all(|z| z.norm() == 0.0));
        assert!((r.emitted_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coarse_step_is_rejected() {
        let p = point(1.8, 2.0, 0.0);
        let pulse = PulseShape::exponential(1.0, 0.0).unwrap();
        let err = integrate_response(&pulse, Port::One, &p, 30.0, 0.01).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn short_horizon_is_rejected() {
        let p = point(1.8, 2.0, 0.0);
        let pulse = PulseShape::exponential(1.0, 0.0).unwrap();
        let err = integrate_response(&pulse, Port::One, &p, 5.0, 0.002).unwrap_err();
        assert!(matches!(err, Error::Horizon { .. }));
        // long enough for the precondition, too short for the residual
        let err = integrate_response(&pulse, Port::One, &p, 12.0, 0.002).unwrap_err();
        assert!(matches!(err, Error::Horizon { residual, .. } if residual > HORIZON_RESIDUAL));
    }

    #[test]
    fn off_grid_delay_is_rejected() {
        let p = point(1.0, 2.0, 0.0);
        let pulse = PulseShape::exponential(1.0, 0.0013).unwrap();
        let err = integrate_response(&pulse, Port::Two, &p, 40.0, 0.002).unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
    }

    #[test]
    fn responses_on_different_grids_are_rejected() {
        let p = point(1.0, 2.0, 0.0);
        let pulse = PulseShape::exponential(1.0, 0.0).unwrap();
        let a = integrate_response(&pulse, Port::One, &p, 40.0, 0.004).unwrap();
        let b = integrate_response(&pulse, Port::Two, &p, 40.0, 0.002).unwrap();
        assert!(matches!(
            coincidence_from_responses(&a, &b),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn unnormalised_samples_are_rejected() {
        let samples = vec![Complex64::new(1.0, 0.0); 21];
        assert!(PulseShape::sampled(samples.clone(), 0.1, 0.0, 1.0).is_err());
        let p = PulseShape::sampled_normalized(samples, 0.1, 0.0, 1.0).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decoupled_pair_gives_unit_coincidence() {
        let r = g2_oracle_point(&point(0.0, 2.0, 0.0)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_matches_closed_form_at_ridge_point() {
        let p = point(1.8, 2.0, 0.0);
        let o = g2_oracle_point(&p).unwrap().value;
        let c = g2_closed_form(&p).unwrap().value;
        assert!((o - c).abs() < 1e-8, "oracle {o} closed {c}");
    }

    #[test]
    fn lossy_rejects_out_of_range_transmission() {
        let p = point(1.0, 2.0, 0.0);
        let (a, b) = PulseShape::hom_pair(&p).unwrap();
        assert!(g2_oracle_lossy(&a, &b, &p, 0.0, 0.5).is_err());
        assert!(g2_oracle_lossy(&a, &b, &p, 0.5, 1.5).is_err());
    }

    #[test]
    fn segments_split_at_starts() {
        assert_eq!(segments(10, &[0, 4]), vec![(0, 4), (4, 9)]);
        assert_eq!(segments(10, &[0, 0]), vec![(0, 9)]);
    }
}
