//! Periodic-box grids, Fourier transforms, spectral derivatives, Poisson
//! solves and discrete norms.
//!
//! Normalization: the forward transform carries the factor `1/N` with
//! `N = n^dim`, so the zero mode is the box average and a real cosine
//! `cos(k·x)` has two coefficients of value `1/2`. The inverse transform is
//! unnormalized. With this convention Parseval reads
//! `‖f‖²_{L²} = V · Σ_ξ |f̂(ξ)|²` where `V = L^dim` is the box volume.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `|zero mode|` of a Poisson right-hand side.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Uniform periodic grid on `[0, L)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Points per axis, even and at least 4.
    pub n: usize,
    /// Box side length.
    pub length: f64,
    /// Spatial dimension, 1 or 3.
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    3
}

impl GridSpec {
    pub fn new(n: usize, length: f64, dim: usize) -> Result<Self> {
        let grid = Self { n, length, dim };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {}",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {}",
                self.length
            )));
        }
        if self.dim != 1 && self.dim != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 3, got {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Smallest nonzero wavenumber `2π/L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed integer mode in `[−n/2, n/2)` for an index along one axis.
    pub fn signed_mode(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Per-axis indices of a flat index; unused axes are zero.
    pub fn axis_indices(&self, idx: usize) -> [usize; 3] {
        match self.dim {
            1 => [idx, 0, 0],
            _ => {
                let n = self.n;
                [idx / (n * n), (idx / n) % n, idx % n]
            }
        }
    }

    /// Integer mode triple of a flat spectral index.
    pub fn modes(&self, idx: usize) -> [i64; 3] {
        let [a, b, c] = self.axis_indices(idx);
        match self.dim {
            1 => [self.signed_mode(a), 0, 0],
            _ => [self.signed_mode(a), self.signed_mode(b), self.signed_mode(c)],
        }
    }

    /// Flat index of an integer mode triple, wrapping periodically.
    pub fn index_of_mode(&self, m: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |v: i64| v.rem_euclid(n) as usize;
        match self.dim {
            1 => wrap(m[0]),
            _ => (wrap(m[0]) * self.n + wrap(m[1])) * self.n + wrap(m[2]),
        }
    }

    /// Physical coordinates of a flat index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let [a, b, c] = self.axis_indices(idx);
        match self.dim {
            1 => [a as f64 * h, 0.0, 0.0],
            _ => [a as f64 * h, b as f64 * h, c as f64 * h],
        }
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// Real field sampled on the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Complex Fourier coefficients of a scalar field, indexed like the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.check_len(coeffs.len())?;
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the zero mode, i.e. the box average.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * s)
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    /// Sum of `|f̂(ξ)|²` over all modes.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest deviation from `f̂(−ξ) = conj f̂(ξ)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let m = self.grid.modes(i);
                let j = self.grid.index_of_mode([-m[0], -m[1], -m[2]]);
                (self.coeffs[j] - self.coeffs[i].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Vector field in spectral form with one component per spatial axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    comps: Vec<SpectralField>,
}

impl SpectralVector {
    pub fn new(comps: Vec<SpectralField>) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| Error::InvalidArgument("vector field needs components".into()))?;
        let grid = *first.grid();
        if comps.len() != grid.dim {
            return Err(Error::DimensionMismatch {
                expected: grid.dim,
                found: comps.len(),
            });
        }
        if comps.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { comps })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            comps: (0..grid.dim).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.comps[0].grid()
    }

    pub fn comps(&self) -> &[SpectralField] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [SpectralField] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<SpectralField> {
        self.comps
    }

    /// Zero-mode vector (spatial mean).
    pub fn mean(&self) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.mean()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            comps: self.comps.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if self.comps.len() != other.comps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.comps.len(),
                found: other.comps.len(),
            });
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.add_scaled(b, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { comps })
    }

    pub fn energy(&self) -> f64 {
        self.comps.iter().map(SpectralField::energy).sum()
    }
}

/// Discrete `L¹`, `L²` and `L∞` norms of a physical field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Riemann-sum norms over the box.
pub fn norms(field: &PhysicalField) -> Norms {
    let dv = field.grid().cell_volume();
    let (mut l1, mut l2, mut linf) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &v in field.values() {
        let a = v.abs();
        l1 += a;
        l2 += a * a;
        linf = linf.max(a);
    }
    Norms {
        l1: l1 * dv,
        l2: (l2 * dv).sqrt(),
        linf,
    }
}

/// FFT plans and wavenumber tables for one grid.
#[derive(Clone)]
pub struct FourierBox {
    grid: GridSpec,
    forward_plan: Arc<dyn Fft<f64>>,
    inverse_plan: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl fmt::Debug for FourierBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierBox").field("grid", &self.grid).finish()
    }
}

impl FourierBox {
    pub fn new(grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let mut planner = FftPlanner::new();
        let wavenumbers = (0..grid.n)
            .map(|i| grid.signed_mode(i) as f64 * grid.fundamental())
            .collect();
        Ok(Self {
            grid,
            forward_plan: planner.plan_fft_forward(grid.n),
            inverse_plan: planner.plan_fft_inverse(grid.n),
            wavenumbers,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Wavevector `ξ` of a flat spectral index.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [a, b, c] = self.grid.axis_indices(idx);
        match self.grid.dim {
            1 => [self.wavenumbers[a], 0.0, 0.0],
            _ => [self.wavenumbers[a], self.wavenumbers[b], self.wavenumbers[c]],
        }
    }

    pub fn wavevector_norm(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    }

    /// Highest mode kept by the 2/3 truncation: `3K < n`.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.grid.n as i64 - 1) / 3
    }

    /// Whether a flat index survives the 2/3 truncation.
    pub fn keeps_mode(&self, idx: usize) -> bool {
        let k = self.dealias_cutoff();
        self.grid.modes(idx).iter().all(|m| m.abs() <= k)
    }

    fn check(&self, grid: &GridSpec) -> Result<()> {
        if *grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn forward(&self, field: &PhysicalField) -> Result<SpectralField> {
        self.check(field.grid())?;
        let mut data: Vec<Complex64> = field
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.transform(&mut data, &self.forward_plan);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        SpectralField::new(self.grid, data)
    }

    /// Inverse transform; returns the real part of the synthesized field.
    pub fn inverse(&self, field: &SpectralField) -> Result<PhysicalField> {
        self.check(field.grid())?;
        let mut data = field.coeffs().to_vec();
        self.transform(&mut data, &self.inverse_plan);
        PhysicalField::new(self.grid, data.into_iter().map(|c| c.re).collect())
    }

    pub fn forward_vector(&self, comps: &[PhysicalField]) -> Result<SpectralVector> {
        SpectralVector::new(
            comps
                .iter()
                .map(|c| self.forward(c))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn inverse_vector(&self, field: &SpectralVector) -> Result<Vec<PhysicalField>> {
        field.comps().iter().map(|c| self.inverse(c)).collect()
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Contiguous last axis: one batched call.
        plan.process_with_scratch(data, &mut scratch);
        if self.grid.dim == 1 {
            return;
        }
        let mut batch = vec![Complex64::new(0.0, 0.0); n * n];
        // Axis 1: for each slab i0 gather columns (stride n).
        for i0 in 0..n {
            let slab = &mut data[i0 * n * n..(i0 + 1) * n * n];
            for i1 in 0..n {
                for i2 in 0..n {
                    batch[i2 * n + i1] = slab[i1 * n + i2];
                }
            }
            plan.process_with_scratch(&mut batch, &mut scratch);
            for i1 in 0..n {
                for i2 in 0..n {
                    slab[i1 * n + i2] = batch[i2 * n + i1];
                }
            }
        }
        // Axis 0: stride n².
        for i1 in 0..n {
            for i0 in 0..n {
                for i2 in 0..n {
                    batch[i2 * n + i0] = data[(i0 * n + i1) * n + i2];
                }
            }
            plan.process_with_scratch(&mut batch, &mut scratch);
            for i0 in 0..n {
                for i2 in 0..n {
                    data[(i0 * n + i1) * n + i2] = batch[i2 * n + i0];
                }
            }
        }
    }

    /// Applies `∂^α` with `|α| ≤ 3`: multiplies each coefficient by `(iξ)^α`.
    ///
    /// Odd derivatives annihilate the Nyquist mode of the corresponding axis
    /// so that real fields stay real.
    pub fn derive(&self, field: &SpectralField, multi_index: [u8; 3]) -> Result<SpectralField> {
        self.check(field.grid())?;
        let order: u32 = multi_index.iter().map(|&a| a as u32).sum();
        if order > 3 {
            return Err(Error::InvalidArgument(format!(
                "derivative order {order} exceeds 3"
            )));
        }
        if self.grid.dim == 1 && (multi_index[1] != 0 || multi_index[2] != 0) {
            return Err(Error::InvalidArgument(
                "only the first axis exists on a one-dimensional grid".into(),
            ));
        }
        let nyq = -(self.grid.n as i64 / 2);
        let mut out = field.clone();
        for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
            let k = self.wavevector(idx);
            let m = self.grid.modes(idx);
            let mut factor = Complex64::new(1.0, 0.0);
            for axis in 0..3 {
                let a = multi_index[axis];
                if a == 0 {
                    continue;
                }
                if a % 2 == 1 && m[axis] == nyq {
                    factor = Complex64::new(0.0, 0.0);
                    break;
                }
                factor *= Complex64::new(0.0, k[axis]).powu(a as u32);
            }
            *c *= factor;
        }
        Ok(out)
    }

    /// Spectral gradient of a scalar field.
    pub fn gradient(&self, field: &SpectralField) -> Result<SpectralVector> {
        let comps = (0..self.grid.dim)
            .map(|axis| {
                let mut alpha = [0u8; 3];
                alpha[axis] = 1;
                self.derive(field, alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralVector::new(comps)
    }

    /// Spectral divergence of a vector field.
    pub fn divergence(&self, field: &SpectralVector) -> Result<SpectralField> {
        let mut acc = SpectralField::zeros(self.grid);
        for (axis, comp) in field.comps().iter().enumerate() {
            let mut alpha = [0u8; 3];
            alpha[axis] = 1;
            acc = acc.add_scaled(&self.derive(comp, alpha)?, 1.0)?;
        }
        Ok(acc)
    }

    /// Solves `Δφ = rhs` with `φ̂(0) = 0`.
    pub fn solve_poisson(&self, rhs: &SpectralField) -> Result<SpectralField> {
        self.check(rhs.grid())?;
        let mean = rhs.mean().norm();
        if mean > MEAN_TOLERANCE {
            return Err(Error::NonZeroMean {
                mean,
                tolerance: MEAN_TOLERANCE,
            });
        }
        let mut out = rhs.clone();
        for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
            if idx == 0 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let k = self.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            *c = -*c / k2;
        }
        Ok(out)
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self, field: &SpectralField) -> Result<SpectralField> {
        self.check(field.grid())?;
        let mut out = field.clone();
        for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
            let k = self.wavevector(idx);
            *c *= -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        }
        Ok(out)
    }

    /// Zeroes every mode outside the 2/3 band.
    pub fn dealias(&self, field: &mut SpectralField) {
        for (idx, c) in field.coeffs_mut().iter_mut().enumerate() {
            if !self.keeps_mode(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `‖Λ^k f‖_{L²}` via Parseval; `k = 0` is the plain `L²` norm.
    pub fn lambda_norm(&self, field: &SpectralField, k: u32) -> f64 {
        let sum: f64 = field
            .coeffs()
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let weight = if k == 0 {
                    1.0
                } else {
                    self.wavevector_norm(idx).powi(2 * k as i32)
                };
                weight * c.norm_sqr()
            })
            .sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// `‖Λ^k w‖_{L²}` summed over vector components.
    pub fn lambda_norm_vector(&self, field: &SpectralVector, k: u32) -> f64 {
        field
            .comps()
            .iter()
            .map(|c| self.lambda_norm(c, k).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Random real, zero-mean field whose modes satisfy `1 ≤ max|mᵢ| ≤ max_mode`.
///
/// Coefficients are drawn uniformly in the unit square and symmetrized so
/// that the synthesized field is real. Draws run over the mode cube
/// `[−max_mode, max_mode]^dim` in lexicographic order, so the same seed
/// yields the same continuum field on every grid that resolves it.
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: GridSpec,
    max_mode: i64,
    rng: &mut R,
) -> SpectralField {
    let mut field = SpectralField::zeros(grid);
    let kmax = max_mode.clamp(0, grid.n as i64 / 2 - 1);
    let span = 2 * kmax + 1;
    let count = span.pow(grid.dim as u32);
    let mut raw = vec![Complex64::new(0.0, 0.0); count as usize];
    for slot in raw.iter_mut() {
        *slot = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let mode_of = |mut j: i64| -> [i64; 3] {
        let mut m = [0i64; 3];
        for a in (0..grid.dim).rev() {
            m[a] = j % span - kmax;
            j /= span;
        }
        m
    };
    let slot_of = |m: [i64; 3]| -> usize {
        let mut j = 0;
        for v in m.iter().take(grid.dim) {
            j = j * span + v + kmax;
        }
        j as usize
    };
    for j in 0..count {
        let m = mode_of(j);
        let inf = m.iter().map(|v| v.abs()).max().unwrap_or(0);
        if inf == 0 {
            continue;
        }
        let mirror = slot_of([-m[0], -m[1], -m[2]]);
        field.coeffs[grid.index_of_mode(m)] = 0.5 * (raw[j as usize] + raw[mirror].conj());
    }
    field
}

/// Copies the shared modes of `field` onto `target`, truncating or
/// zero-padding; the Nyquist planes of the smaller grid are dropped.
pub fn resample(field: &SpectralField, target: GridSpec) -> Result<SpectralField> {
    let source = *field.grid();
    if source.dim != target.dim || source.length != target.length {
        return Err(Error::GridMismatch);
    }
    let half = source.n.min(target.n) as i64 / 2;
    let mut out = SpectralField::zeros(target);
    for idx in 0..source.len() {
        let m = source.modes(idx);
        if m.iter().take(source.dim).all(|v| v.abs() < half) {
            out.coeffs[target.index_of_mode(m)] = field.coeffs[idx];
        }
    }
    Ok(out)
}
