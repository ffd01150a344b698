//! Whole-space linear decay by radial quadrature in Fourier space.
//!
//! For radial data the norm of a propagated component is
//!
//! `‖Λᵏ c(t)‖² = 4π ∫₀^∞ r^{2k+2} |G_c(r, t) · (n̂₀(r), v̂₀(r))|² dr`,
//!
//! with `G_c` the row of the Green matrix belonging to `c ∈ {n, w}` (for a
//! curl-free velocity `‖w‖ = ‖v‖`). The integral is evaluated adaptively on
//! `[0, r₀]`; beyond `r₀` a rigorous Gaussian tail bound is added to the
//! error estimate. Transforms are unitary, so Parseval holds
//! without `2π` factors.

mod quadrature;

pub use quadrature::{integrate, Integral};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::{spectral_gap, Symbol, SymbolKind, DEFAULT_SPLIT_RADIUS};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
const MAX_PANELS: usize = 20_000;

/// Radial Fourier profile of an initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    Zero,
    /// Transform of `a·exp(−|x|²/(2σ²))`, namely `a σ³ exp(−σ²r²/2)`.
    Gaussian { amplitude: f64, sigma: f64 },
}

impl RadialProfile {
    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(amplitude.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Gaussian needs finite amplitude and positive width, got a = {amplitude}, σ = {sigma}"
            )));
        }
        Ok(Self::Gaussian { amplitude, sigma })
    }

    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Gaussian { amplitude, sigma } => {
                amplitude * sigma.powi(3) * (-0.5 * sigma * sigma * r * r).exp()
            }
        }
    }

    /// `∫ f dx` of the physical datum.
    pub fn mass(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Gaussian { amplitude, sigma } => amplitude * (2.0 * PI).powf(1.5) * sigma.powi(3),
        }
    }

    /// `‖f‖₂²` of the physical datum.
    pub fn l2_norm_sq(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Gaussian { amplitude, sigma } => amplitude * amplitude * PI.powf(1.5) * sigma.powi(3),
        }
    }

    /// Radius beyond which `|value|²` is below `1e−40` of its peak.
    pub fn decay_bound(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Gaussian { sigma, .. } => (2.0 * 40.0 * 10f64.ln()).sqrt() / sigma,
        }
    }

    /// `(peak², σ)` such that `|value(r)|² ≤ peak² e^{−σ²r²}`.
    fn envelope(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Zero => None,
            Self::Gaussian { amplitude, sigma } => Some(((amplitude * sigma.powi(3)).powi(2), sigma)),
        }
    }
}

/// Which unknown of a block is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    N,
    W,
}

impl Component {
    pub fn label(&self) -> &'static str {
        match self {
            Self::N => "n",
            Self::W => "w",
        }
    }

    fn row(&self) -> usize {
        match self {
            Self::N => 0,
            Self::W => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayExperiment {
    pub kind: SymbolKind,
    pub n0: RadialProfile,
    pub v0: RadialProfile,
    pub k: u32,
    pub times: Vec<f64>,
    pub tolerance: f64,
}

/// `count` geometrically spaced times from `lo` to `hi`.
pub fn geometric_times(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo < hi and at least two samples, got [{lo}, {hi}] × {count}"
        )));
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect())
}

/// `count` evenly spaced times from `lo` to `hi`.
pub fn linear_times(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo < hi and at least two samples, got [{lo}, {hi}] × {count}"
        )));
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

impl DecayExperiment {
    pub fn new(
        kind: SymbolKind,
        n0: RadialProfile,
        v0: RadialProfile,
        k: u32,
        times: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        if k > 3 {
            return Err(Error::InvalidArgument(format!("derivative order {k} exceeds 3")));
        }
        if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "times must be positive and strictly increasing".into(),
            ));
        }
        if !(tolerance > 0.0 && tolerance <= 1e-4) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must lie in (0, 1e-4], got {tolerance}"
            )));
        }
        Ok(Self {
            kind,
            n0,
            v0,
            k,
            times,
            tolerance,
        })
    }

    /// Unit Gaussian density bump with zero velocity.
    pub fn gaussian(kind: SymbolKind, k: u32, times: Vec<f64>) -> Result<Self> {
        Self::new(
            kind,
            RadialProfile::gaussian(1.0, 1.0)?,
            RadialProfile::Zero,
            k,
            times,
            DEFAULT_TOLERANCE,
        )
    }

    fn integrand(&self, component: Component, t: f64) -> impl Fn(f64) -> f64 + '_ {
        let row = component.row();
        let power = 2 * self.k as i32 + 2;
        move |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            let g = Symbol::new(self.kind, r).expect("positive radius").exp(t);
            let c = g[row][0] * self.n0.value(r) + g[row][1] * self.v0.value(r);
            4.0 * PI * r.powi(power) * c * c
        }
    }

    /// Upper bound of the integral over `[r₀, ∞)`, using `|Gᵢⱼ| ≤ 4e^{−t/2}`
    /// for `r ≥ 1`.
    fn tail_bound(&self, r0: f64, t: f64) -> f64 {
        let envs: Vec<_> = [self.n0, self.v0].iter().filter_map(|p| p.envelope()).collect();
        if envs.is_empty() {
            return 0.0;
        }
        let peak: f64 = envs.iter().map(|e| e.0).sum();
        let sigma = envs.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let m = 2 * self.k as i32 + 2;
        // r^m e^{−σ²r²} has log-slope ≤ −σ²r₀ on [r₀, ∞) once σ²r₀² ≥ m
        let integral = r0.powi(m) * (-sigma * sigma * r0 * r0).exp() / (sigma * sigma * r0);
        4.0 * PI * 32.0 * (-t).exp() * peak * integral
    }

    fn cutoff(&self) -> f64 {
        let m = 2.0 * self.k as f64 + 2.0;
        let bound = self.n0.decay_bound().max(self.v0.decay_bound());
        let sigma = [self.n0, self.v0]
            .iter()
            .filter_map(|p| p.envelope())
            .map(|e| e.1)
            .fold(f64::INFINITY, f64::min);
        let needed = if sigma.is_finite() { m.sqrt() / sigma } else { 0.0 };
        bound.max(needed).max(1.0)
    }

    /// `‖Λᵏ component(t)‖₂` with relative accuracy `tolerance`.
    pub fn l2_norm_at(&self, component: Component, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
        }
        let r0 = self.cutoff();
        let scale = 1.0 / (1.0 + t).sqrt();
        let mut breaks = vec![0.0];
        let mut b = 1e-4 * scale;
        while b < r0 {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(r0);
        let tail = self.tail_bound(r0, t);
        // identically vanishing components are resolved to this absolute level
        let floor = self.tolerance * 1e-30 * (self.n0.l2_norm_sq() + self.v0.l2_norm_sq());
        let integral = integrate(
            self.integrand(component, t),
            &breaks,
            0.1 * self.tolerance,
            floor.max(f64::MIN_POSITIVE),
            MAX_PANELS,
        )?;
        let value = integral.value.max(0.0);
        let error = integral.error + tail;
        if error > (self.tolerance * value).max(floor) {
            return Err(Error::Quadrature {
                achieved: if value > 0.0 { error / value } else { error },
                requested: self.tolerance,
            });
        }
        Ok(value.sqrt())
    }

    /// Norm of the whole block, `(‖Λᵏn‖² + ‖Λᵏw‖²)^{1/2}`.
    pub fn block_norm_at(&self, t: f64) -> Result<f64> {
        Ok(self
            .l2_norm_at(Component::N, t)?
            .hypot(self.l2_norm_at(Component::W, t)?))
    }

    pub fn series(&self, component: Component) -> Result<Vec<(f64, f64)>> {
        self.times
            .iter()
            .map(|&t| Ok((t, self.l2_norm_at(component, t)?)))
            .collect()
    }

    pub fn block_series(&self) -> Result<Vec<(f64, f64)>> {
        self.times
            .iter()
            .map(|&t| Ok((t, self.block_norm_at(t)?)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `log norm` against `log(1 + t)`.
    Algebraic,
    /// `log norm` against `t`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub mode: FitMode,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub window: [f64; 2],
}

/// Least-squares line through the log-transformed series.
pub fn fit_exponent(series: &[(f64, f64)], mode: FitMode) -> Result<ExponentFit> {
    if series.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "need at least 5 samples, got {}",
            series.len()
        )));
    }
    if let Some(&(t, v)) = series.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "norm at t = {t} is not positive: {v}"
        )));
    }
    let xs: Vec<f64> = series
        .iter()
        .map(|(t, _)| match mode {
            FitMode::Algebraic => t.ln_1p(),
            FitMode::Exponential => *t,
        })
        .collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("sample times are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let t_lo = series.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_hi = series.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentFit {
        mode,
        slope,
        intercept,
        residual,
        window: [t_lo, t_hi],
    })
}

/// Default algebraic fit window and sample count.
pub const ALGEBRAIC_WINDOW: (f64, f64, usize) = (10.0, 1e3, 25);
/// Default exponential fit window and sample count.
pub const EXPONENTIAL_WINDOW: (f64, f64, usize) = (1.0, 20.0, 25);
pub const ALGEBRAIC_TOLERANCE: f64 = 0.05;
pub const EXPONENTIAL_TOLERANCE: f64 = 0.02;

/// One sample of a decay series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub norm: f64,
    pub component: String,
    pub k: u32,
}

/// Predicted against fitted decay exponent of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    /// `n`, `w`, or `block` for the combined norm.
    pub component: String,
    pub predicted: f64,
    pub fit: ExponentFit,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub kind: SymbolKind,
    pub k: u32,
    pub profile: RadialProfile,
    pub rows: Vec<RateRow>,
    /// High-frequency spectral gap of the block at the default split radius.
    pub spectral_gap: f64,
    pub split_radius: f64,
    #[serde(skip)]
    pub samples: Vec<DecayRow>,
}

impl RateReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Fit windows used by [`rate_report_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportWindow {
    pub t_lo: f64,
    pub t_hi: f64,
    pub samples: usize,
}

impl ReportWindow {
    pub fn default_for(kind: SymbolKind) -> Self {
        let (t_lo, t_hi, samples) = match kind {
            SymbolKind::EulerDamped => ALGEBRAIC_WINDOW,
            SymbolKind::EulerPoissonDamped => EXPONENTIAL_WINDOW,
        };
        Self { t_lo, t_hi, samples }
    }
}

/// Decay study with unit Gaussian density data and the default window.
pub fn rate_report(kind: SymbolKind, k: u32) -> Result<RateReport> {
    rate_report_with(
        kind,
        k,
        RadialProfile::gaussian(1.0, 1.0)?,
        ReportWindow::default_for(kind),
    )
}

/// Fits decay exponents and compares them with the predicted rates:
/// `−(3/4 + k/2)` for `n` and `−(5/4 + k/2)` for `w` in the damped-Euler
/// block, and the exponential rate `½` of the Euler–Poisson block.
pub fn rate_report_with(
    kind: SymbolKind,
    k: u32,
    profile: RadialProfile,
    window: ReportWindow,
) -> Result<RateReport> {
    if k > 1 {
        return Err(Error::InvalidArgument(format!(
            "decay predictions are tabulated for k ∈ {{0, 1}}, got {k}"
        )));
    }
    let times = match kind {
        SymbolKind::EulerDamped => geometric_times(window.t_lo, window.t_hi, window.samples)?,
        SymbolKind::EulerPoissonDamped => linear_times(window.t_lo, window.t_hi, window.samples)?,
    };
    let exp = DecayExperiment::new(kind, profile, RadialProfile::Zero, k, times, DEFAULT_TOLERANCE)?;
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    let half_k = 0.5 * k as f64;
    let mut series_of = |c: Component| -> Result<Vec<(f64, f64)>> {
        let s = exp.series(c)?;
        samples.extend(s.iter().map(|&(t, norm)| DecayRow {
            t,
            norm,
            component: c.label().into(),
            k,
        }));
        Ok(s)
    };
    match kind {
        SymbolKind::EulerDamped => {
            for (c, predicted) in [(Component::N, -0.75 - half_k), (Component::W, -1.25 - half_k)] {
                let fit = fit_exponent(&series_of(c)?, FitMode::Algebraic)?;
                rows.push(RateRow {
                    component: c.label().into(),
                    predicted,
                    pass: (fit.slope - predicted).abs() <= ALGEBRAIC_TOLERANCE,
                    fit,
                    tolerance: ALGEBRAIC_TOLERANCE,
                });
            }
        }
        SymbolKind::EulerPoissonDamped => {
            let n = series_of(Component::N)?;
            let w = series_of(Component::W)?;
            let block: Vec<(f64, f64)> = n.iter().zip(&w).map(|(a, b)| (a.0, a.1.hypot(b.1))).collect();
            let fit = fit_exponent(&block, FitMode::Exponential)?;
            rows.push(RateRow {
                component: "block".into(),
                predicted: -0.5,
                pass: (fit.slope + 0.5).abs() <= EXPONENTIAL_TOLERANCE,
                fit,
                tolerance: EXPONENTIAL_TOLERANCE,
            });
        }
    }
    Ok(RateReport {
        kind,
        k,
        profile,
        rows,
        spectral_gap: spectral_gap(kind, DEFAULT_SPLIT_RADIUS)?,
        split_radius: DEFAULT_SPLIT_RADIUS,
        samples,
    })
}
