//! Normal-incidence transfer-matrix model of a dielectric stack holding two
//! coupled cavities, extraction of the normal-mode splitting, and the
//! exponential coupling model `g(x, n) = a·e^{−bx + dn²}`.

use std::ops::{Mul, Range};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{ensure_positive, Error, Result};
use crate::par;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    #[default]
    Mirror,
    Cavity,
    /// A layer between the two cavities.
    Spacer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub thickness_nm: f64,
    pub index: f64,
    #[serde(default)]
    pub role: LayerRole,
}

impl Layer {
    pub fn new(thickness_nm: f64, index: f64, role: LayerRole) -> Result<Self> {
        let layer = Layer {
            thickness_nm,
            index,
            role,
        };
        layer.validate()?;
        Ok(layer)
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("thickness_nm", self.thickness_nm)?;
        if !(self.index >= 1.0 && self.index.is_finite()) {
            return Err(Error::domain(
                "index",
                format!("need a finite index >= 1, got {}", self.index),
            ));
        }
        Ok(())
    }

    /// Characteristic matrix at vacuum wavelength `lambda_nm`.
    pub fn matrix(&self, lambda_nm: f64) -> Matrix2 {
        let phase = 2.0 * std::f64::consts::PI * self.index * self.thickness_nm / lambda_nm;
        let (s, c) = phase.sin_cos();
        let i = Complex64::i();
        Matrix2([
            [Complex64::new(c, 0.0), i * (s / self.index)],
            [i * (s * self.index), Complex64::new(c, 0.0)],
        ])
    }
}

/// 2×2 complex characteristic matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

impl Matrix2 {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Matrix2([[o, z], [z, o]])
    }

    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (self.0, rhs.0);
        Matrix2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Reflectance and transmittance at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub reflectance: f64,
    pub transmittance: f64,
}

/// An ordered stack between an ambient (input) and substrate (output) medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub layers: Vec<Layer>,
    #[serde(default = "unit_index")]
    pub ambient_index: f64,
    #[serde(default = "unit_index")]
    pub substrate_index: f64,
}

fn unit_index() -> f64 {
    1.0
}

impl StackSpec {
    pub fn new(layers: Vec<Layer>, ambient_index: f64, substrate_index: f64) -> Result<Self> {
        let stack = StackSpec {
            layers,
            ambient_index,
            substrate_index,
        };
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<()> {
        for layer in &self.layers {
            layer.validate()?;
        }
        for (name, n) in [
            ("ambient_index", self.ambient_index),
            ("substrate_index", self.substrate_index),
        ] {
            if !(n >= 1.0 && n.is_finite()) {
                return Err(Error::domain(name, format!("need a finite index >= 1, got {n}")));
            }
        }
        Ok(())
    }

    fn cavity_positions(&self) -> Result<(usize, usize)> {
        let idx: Vec<usize> = (0..self.layers.len())
            .filter(|&i| self.layers[i].role == LayerRole::Cavity)
            .collect();
        match idx[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::domain(
                "layers",
                format!("need exactly two cavity layers, found {}", idx.len()),
            )),
        }
    }

    /// Summed thickness between the two cavity layers, in nm.
    pub fn cavity_separation(&self) -> Result<f64> {
        let (a, b) = self.cavity_positions()?;
        Ok(self.layers[a + 1..b].iter().map(|l| l.thickness_nm).sum())
    }

    /// Smallest index among the inter-cavity layers: the hole material.
    pub fn hole_index(&self) -> Result<f64> {
        let (a, b) = self.cavity_positions()?;
        Ok(self.layers[a + 1..b]
            .iter()
            .map(|l| l.index)
            .fold(f64::INFINITY, f64::min))
    }

    pub fn matrix_range(&self, lambda_nm: f64, range: Range<usize>) -> Matrix2 {
        self.layers[range]
            .iter()
            .fold(Matrix2::identity(), |m, layer| m * layer.matrix(lambda_nm))
    }

    pub fn matrix(&self, lambda_nm: f64) -> Matrix2 {
        self.matrix_range(lambda_nm, 0..self.layers.len())
    }

    pub fn response(&self, lambda_nm: f64) -> Result<Response> {
        let m = self.matrix(lambda_nm);
        if !m.is_finite() {
            return Err(Error::Conditioning(format!(
                "transfer matrix overflowed at {lambda_nm} nm"
            )));
        }
        let (n0, ns) = (self.ambient_index, self.substrate_index);
        let b = m.0[0][0] + m.0[0][1] * ns;
        let c = m.0[1][0] + m.0[1][1] * ns;
        let denom = b * n0 + c;
        let r = (b * n0 - c) / denom;
        let t = 2.0 * n0 / denom;
        Ok(Response {
            reflectance: r.norm_sqr(),
            transmittance: ns / n0 * t.norm_sqr(),
        })
    }
}

fn check_wavelengths(grid: &[f64]) -> Result<()> {
    if let Some(bad) = grid.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::GridMismatch(format!("wavelength {bad} is not positive")));
    }
    Ok(())
}

/// `(λ, T)` over a wavelength grid in nm, wavelengths evaluated in parallel.
pub fn transmission_spectrum(stack: &StackSpec, lambda_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_wavelengths(lambda_grid)?;
    par::try_map_indexed(lambda_grid.len(), |i| {
        let l = lambda_grid[i];
        Ok((l, stack.response(l)?.transmittance))
    })
}

pub fn transmission_spectrum_seq(stack: &StackSpec, lambda_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_wavelengths(lambda_grid)?;
    par::try_map_indexed_seq(lambda_grid.len(), |i| {
        let l = lambda_grid[i];
        Ok((l, stack.response(l)?.transmittance))
    })
}

/// Peak reflectance of `(HL)^N` quarter-wave pairs at the design wavelength.
pub fn quarter_wave_reflectance(n_high: f64, n_low: f64, pairs: u32, ambient: f64, substrate: f64) -> f64 {
    let y = (n_high / n_low).powi(2 * pairs as i32) * substrate;
    ((ambient - y) / (ambient + y)).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingResult {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub delta_lambda: f64,
    /// Mean of the two mode wavelengths, nm.
    pub lambda: f64,
    /// Coupling `πcΔλ/λ²` in Hz.
    pub g: f64,
}

impl SplittingResult {
    fn from_peaks(a: f64, b: f64) -> Self {
        let (lambda_minus, lambda_plus) = if a < b { (a, b) } else { (b, a) };
        let delta_lambda = lambda_plus - lambda_minus;
        let lambda = 0.5 * (lambda_plus + lambda_minus);
        SplittingResult {
            lambda_plus,
            lambda_minus,
            delta_lambda,
            lambda,
            g: coupling_from_splitting(delta_lambda, lambda),
        }
    }
}

/// `g = πcΔλ/λ²` in Hz, both wavelengths in nm.
pub fn coupling_from_splitting(delta_lambda_nm: f64, lambda_nm: f64) -> f64 {
    std::f64::consts::PI * SPEED_OF_LIGHT * delta_lambda_nm / (lambda_nm * lambda_nm) * 1e9
}

/// Minimum peak prominence, in transmittance units.
pub const PROMINENCE: f64 = 0.05;

/// Indices of interior local maxima with their prominence.
fn prominent_peaks(t: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for i in 1..t.len().saturating_sub(1) {
        if !(t[i] > t[i - 1] && t[i] >= t[i + 1]) {
            continue;
        }
        let mut left_min = t[i];
        for &v in t[..i].iter().rev() {
            if v > t[i] {
                break;
            }
            left_min = left_min.min(v);
        }
        let mut right_min = t[i];
        for &v in &t[i + 1..] {
            if v > t[i] {
                break;
            }
            right_min = right_min.min(v);
        }
        let prominence = t[i] - left_min.max(right_min);
        if prominence >= PROMINENCE {
            out.push((i, prominence));
        }
    }
    out
}

fn interpolate_peak(spectrum: &[(f64, f64)], i: usize) -> f64 {
    let (x0, y0) = spectrum[i - 1];
    let (x1, y1) = spectrum[i];
    let (x2, y2) = spectrum[i + 1];
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a >= 0.0 {
        return x1;
    }
    -b / (2.0 * a)
}

fn two_dominant(peaks: &[(usize, f64)]) -> Result<[usize; 2]> {
    if peaks.len() < 2 {
        return Err(Error::UnresolvedSplitting { found: peaks.len() });
    }
    let mut sorted = peaks.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok([sorted[0].0, sorted[1].0])
}

/// Splitting from a sampled spectrum: the two most prominent peaks,
/// each refined by three-point quadratic interpolation.
pub fn extract_splitting(spectrum: &[(f64, f64)]) -> Result<SplittingResult> {
    let t: Vec<f64> = spectrum.iter().map(|p| p.1).collect();
    let [a, b] = two_dominant(&prominent_peaks(&t))?;
    Ok(SplittingResult::from_peaks(
        interpolate_peak(spectrum, a),
        interpolate_peak(spectrum, b),
    ))
}

/// Wavelength scan: a coarse pass brackets the peaks, a fine pass around
/// each bracket locates them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPlan {
    pub lo_nm: f64,
    pub hi_nm: f64,
    pub coarse_nm: f64,
    pub fine_nm: f64,
}

impl Default for ScanPlan {
    fn default() -> Self {
        ScanPlan {
            lo_nm: 940.0,
            hi_nm: 1030.0,
            coarse_nm: 0.05,
            fine_nm: 0.001,
        }
    }
}

impl ScanPlan {
    fn validate(&self) -> Result<()> {
        ensure_positive("lo_nm", self.lo_nm)?;
        ensure_positive("coarse_nm", self.coarse_nm)?;
        ensure_positive("fine_nm", self.fine_nm)?;
        if !(self.hi_nm > self.lo_nm + 2.0 * self.coarse_nm) {
            return Err(Error::domain(
                "hi_nm",
                "scan window must span at least two coarse steps",
            ));
        }
        if self.fine_nm > self.coarse_nm {
            return Err(Error::domain("fine_nm", "fine step must not exceed the coarse step"));
        }
        Ok(())
    }
}

/// Uniform grid `start, start + step, …` with `count` points.
pub fn uniform_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + step * i as f64).collect()
}

pub fn scan_splitting(stack: &StackSpec, plan: &ScanPlan) -> Result<SplittingResult> {
    plan.validate()?;
    let count = ((plan.hi_nm - plan.lo_nm) / plan.coarse_nm).floor() as usize + 1;
    let coarse = transmission_spectrum(stack, &uniform_grid(plan.lo_nm, plan.coarse_nm, count))?;
    let t: Vec<f64> = coarse.iter().map(|p| p.1).collect();
    let brackets = two_dominant(&prominent_peaks(&t))?;
    let fine_count = (2.0 * plan.coarse_nm / plan.fine_nm).round() as usize + 1;
    let mut peaks = [0.0; 2];
    for (slot, &i) in peaks.iter_mut().zip(&brackets) {
        let fine = transmission_spectrum(stack, &uniform_grid(coarse[i - 1].0, plan.fine_nm, fine_count))?;
        let best = (1..fine.len() - 1)
            .max_by(|&a, &b| fine[a].1.total_cmp(&fine[b].1))
            .expect("fine window has interior points");
        *slot = interpolate_peak(&fine, best);
    }
    Ok(SplittingResult::from_peaks(peaks[0], peaks[1]))
}

/// Two identical cavities between Bragg mirrors, separated by
/// `(L (H L)^m)` spacer layers whose low-index material can be replaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoupledCavityDesign {
    pub mirror_pairs: usize,
    pub spacer_pairs: usize,
    pub hole_index: f64,
    pub high_index: f64,
    pub low_index: f64,
    pub high_nm: f64,
    pub low_nm: f64,
    pub cavity_nm: f64,
}

impl Default for CoupledCavityDesign {
    fn default() -> Self {
        CoupledCavityDesign {
            mirror_pairs: 3,
            spacer_pairs: 1,
            hole_index: 1.0,
            high_index: 3.5,
            low_index: 1.0,
            high_nm: 225.0,
            low_nm: 112.0,
            cavity_nm: 450.0,
        }
    }
}

impl CoupledCavityDesign {
    pub fn with_spacer_pairs(self, spacer_pairs: usize) -> Self {
        CoupledCavityDesign { spacer_pairs, ..self }
    }

    pub fn with_hole_index(self, hole_index: f64) -> Self {
        CoupledCavityDesign { hole_index, ..self }
    }

    pub fn separation_nm(&self) -> f64 {
        self.low_nm + self.spacer_pairs as f64 * (self.high_nm + self.low_nm)
    }

    pub fn build(&self) -> Result<StackSpec> {
        let high = |role| Layer::new(self.high_nm, self.high_index, role);
        let low = |role| Layer::new(self.low_nm, self.low_index, role);
        let hole = Layer::new(self.low_nm, self.hole_index, LayerRole::Spacer)?;
        let mut layers = Vec::new();
        for _ in 0..self.mirror_pairs {
            layers.push(high(LayerRole::Mirror)?);
            layers.push(low(LayerRole::Mirror)?);
        }
        layers.push(Layer::new(self.cavity_nm, self.high_index, LayerRole::Cavity)?);
        layers.push(hole);
        for _ in 0..self.spacer_pairs {
            layers.push(high(LayerRole::Spacer)?);
            layers.push(hole);
        }
        layers.push(Layer::new(self.cavity_nm, self.high_index, LayerRole::Cavity)?);
        for _ in 0..self.mirror_pairs {
            layers.push(low(LayerRole::Mirror)?);
            layers.push(high(LayerRole::Mirror)?);
        }
        StackSpec::new(layers, 1.0, 1.0)
    }
}

/// `g(x, n) = a·e^{−bx + dn²}` with x in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingModel {
    /// Hz.
    pub a: f64,
    /// 1/nm.
    pub b: f64,
    pub d: f64,
    pub lambda_nm: f64,
}

impl CouplingModel {
    pub fn new(a: f64, b: f64, d: f64, lambda_nm: f64) -> Result<Self> {
        ensure_positive("a", a)?;
        ensure_positive("b", b)?;
        ensure_positive("d", d)?;
        ensure_positive("lambda_nm", lambda_nm)?;
        Ok(CouplingModel { a, b, d, lambda_nm })
    }

    pub fn g(&self, x_nm: f64, n: f64) -> f64 {
        self.g_dual(x_nm, n)
    }

    /// The model over any [`Scalar`], for exact derivatives in x or n.
    pub fn g_dual<S: Scalar>(&self, x_nm: S, n: S) -> S {
        (x_nm.scale(-self.b) + (n * n).scale(self.d)).exp().scale(self.a)
    }

    /// `dg/dx = −b·g`.
    pub fn dg_dx(&self, x_nm: f64, n: f64) -> f64 {
        -self.b * self.g(x_nm, n)
    }

    /// `dg/dn = 2dn·g`.
    pub fn dg_dn(&self, x_nm: f64, n: f64) -> f64 {
        2.0 * self.d * n * self.g(x_nm, n)
    }
}

/// A fitted coupling model with its goodness of fit and calibrated ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingFit {
    pub model: CouplingModel,
    pub r2_x: f64,
    pub r2_n: f64,
    pub x_range: (f64, f64),
    pub n_range: (f64, f64),
    /// Separation at which the n samples were taken, nm.
    pub x_at_n: Option<f64>,
}

impl CouplingFit {
    pub fn in_calibration(&self, x_nm: f64, n: f64) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12);
        inside(x_nm, self.x_range) && inside(n, self.n_range)
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    r2: f64,
}

fn ols(points: &[(f64, f64)], axis: &'static str) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(Error::domain(
            axis,
            format!("need at least 3 samples, got {}", points.len()),
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * n {
        return Err(Error::DegenerateDesign { axis });
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LineFit { slope, intercept, r2 })
}

fn log_samples(samples: &[(f64, f64)], axis: &'static str, square: bool) -> Result<Vec<(f64, f64)>> {
    samples
        .iter()
        .map(|&(s, g)| {
            if !(g > 0.0 && g.is_finite() && s.is_finite()) {
                return Err(Error::domain(
                    axis,
                    format!("coupling must be positive and finite, got {g} at {s}"),
                ));
            }
            Ok((if square { s * s } else { s }, g.ln()))
        })
        .collect()
}

/// Fit `ln g = ln a − bx + dn²` from an x sweep at n = 1 and an n sweep at
/// fixed x, one ordinary least-squares line per axis.
pub fn fit_coupling_model(samples_x: &[(f64, f64)], samples_n: &[(f64, f64)], lambda_nm: f64) -> Result<CouplingFit> {
    let fx = ols(&log_samples(samples_x, "x", false)?, "x")?;
    let fn_ = ols(&log_samples(samples_n, "n", true)?, "n")?;
    let b = -fx.slope;
    let d = fn_.slope;
    // at n = 1 the x-axis intercept is ln a + d
    let a = (fx.intercept - d).exp();
    let model = CouplingModel::new(a, b, d, lambda_nm)?;
    let range = |s: &[(f64, f64)]| {
        s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        })
    };
    Ok(CouplingFit {
        model,
        r2_x: fx.r2,
        r2_n: fn_.r2,
        x_range: range(samples_x),
        n_range: range(samples_n),
        x_at_n: None,
    })
}

/// Coupling sweeps generated from the transfer-matrix model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSweeps {
    /// `(x, result)` at n = design hole index, over spacer pairs.
    pub x_sweep: Vec<(f64, SplittingResult)>,
    /// `(n, result)` at the design separation.
    pub n_sweep: Vec<(f64, SplittingResult)>,
    pub x_at_n: f64,
}

impl CouplingSweeps {
    pub fn x_samples(&self) -> Vec<(f64, f64)> {
        self.x_sweep.iter().map(|(x, s)| (*x, s.g)).collect()
    }

    pub fn n_samples(&self) -> Vec<(f64, f64)> {
        self.n_sweep.iter().map(|(n, s)| (*n, s.g)).collect()
    }

    /// Mean mode wavelength over all sweeps, nm.
    pub fn mean_lambda(&self) -> f64 {
        let all: Vec<f64> = self
            .x_sweep
            .iter()
            .chain(&self.n_sweep)
            .map(|(_, s)| s.lambda)
            .collect();
        all.iter().sum::<f64>() / all.len() as f64
    }

    pub fn fit(&self) -> Result<CouplingFit> {
        let mut fit = fit_coupling_model(&self.x_samples(), &self.n_samples(), self.mean_lambda())?;
        fit.x_at_n = Some(self.x_at_n);
        Ok(fit)
    }
}

/// Splitting over spacer counts (x axis) and hole indices (n axis).
pub fn coupling_sweeps(
    design: &CoupledCavityDesign,
    spacer_pairs: &[usize],
    hole_indices: &[f64],
    plan: &ScanPlan,
) -> Result<CouplingSweeps> {
    let x_sweep = spacer_pairs
        .iter()
        .map(|&m| {
            let d = design.with_spacer_pairs(m);
            Ok((d.separation_nm(), scan_splitting(&d.build()?, plan)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_sweep = hole_indices
        .iter()
        .map(|&n| Ok((n, scan_splitting(&design.with_hole_index(n).build()?, plan)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CouplingSweeps {
        x_sweep,
        n_sweep,
        x_at_n: design.separation_nm(),
    })
}

/// Spacer pair counts of the reference x sweep.
pub const REFERENCE_SPACER_PAIRS: [usize; 5] = [1, 2, 3, 4, 5];
/// Hole indices of the reference n sweep.
pub const REFERENCE_HOLE_INDICES: [f64; 6] = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5];

/// Sweeps of the default design over the reference axes.
pub fn reference_sweeps() -> Result<CouplingSweeps> {
    coupling_sweeps(
        &CoupledCavityDesign::default(),
        &REFERENCE_SPACER_PAIRS,
        &REFERENCE_HOLE_INDICES,
        &ScanPlan::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_of_a_four_nm_splitting() {
        let g = coupling_from_splitting(4.0, 1000.0);
        assert!((g - 3.767e12).abs() < 1e9, "{g}");
    }

    #[test]
    fn empty_stack_is_transparent() {
        let s = StackSpec::new(Vec::new(), 1.0, 1.0).unwrap();
        for l in [400.0, 1000.0, 1550.0] {
            let r = s.response(l).unwrap();
            assert!((r.transmittance - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn design_geometry() {
        let d = CoupledCavityDesign::default().with_spacer_pairs(2).with_hole_index(1.3);
        let s = d.build().unwrap();
        assert_eq!(d.separation_nm(), 786.0);
        assert_eq!(s.cavity_separation().unwrap(), 786.0);
        assert_eq!(s.hole_index().unwrap(), 1.3);
    }

    #[test]
    fn rejects_bad_layers() {
        assert!(Layer::new(0.0, 2.0, LayerRole::Mirror).is_err());
        assert!(Layer::new(10.0, 0.5, LayerRole::Mirror).is_err());
        let one = StackSpec::new(vec![Layer::new(10.0, 2.0, LayerRole::Cavity).unwrap()], 1.0, 1.0).unwrap();
        assert!(one.cavity_separation().is_err());
    }

    #[test]
    fn synthetic_lorentzian_pair() {
        let lor = |l: f64, c: f64| 1.0 / (1.0 + ((l - c) / 0.3).powi(2));
        let spectrum: Vec<(f64, f64)> = uniform_grid(990.0, 0.01, 2001)
            .into_iter()
            .map(|l| (l, lor(l, 998.0) + lor(l, 1002.0)))
            .collect();
        let s = extract_splitting(&spectrum).unwrap();
        assert!((s.delta_lambda - 4.0).abs() < 1e-3, "{}", s.delta_lambda);
    }

    #[test]
    fn single_peak_is_unresolved() {
        let spectrum: Vec<(f64, f64)> = uniform_grid(990.0, 0.1, 101)
            .into_iter()
            .map(|l| (l, 1.0 / (1.0 + (l - 995.0).powi(2))))
            .collect();
        assert_eq!(
            extract_splitting(&spectrum),
            Err(Error::UnresolvedSplitting { found: 1 })
        );
    }

    #[test]
    fn model_derivatives() {
        let m = CouplingModel::new(8e13, 2.65e-3, 0.2, 1000.0).unwrap();
        let x = crate::dual::Dual::variable(900.0);
        let g = m.g_dual(x, crate::dual::Dual::constant(1.0));
        assert!((g.eps - m.dg_dx(900.0, 1.0)).abs() < 1e-12 * g.re);
    }

    #[test]
    fn degenerate_x_design() {
        let xs = [(500.0, 1e12), (500.0, 2e12), (500.0, 3e12)];
        let ns = [(1.0, 1e12), (1.2, 1.1e12), (1.4, 1.3e12)];
        assert_eq!(
            fit_coupling_model(&xs, &ns, 1000.0),
            Err(Error::DegenerateDesign { axis: "x" })
        );
    }
}
