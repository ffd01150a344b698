//! Primitive and sum/difference unknowns, the exact change of variables
//! between them, and the γ-law pressure nonlinearity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FourierBox, GridSpec, PhysicalField, SpectralField, SpectralVector};

/// Admissible density box for simulation states.
pub const DENSITY_MIN: f64 = 0.5;
pub const DENSITY_MAX: f64 = 2.0;

/// γ-law pressure `P(ρ) = ρ^γ / γ`, normalized so that `P'(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureLaw {
    pub gamma: f64,
}

impl Default for PressureLaw {
    fn default() -> Self {
        Self { gamma: 5.0 / 3.0 }
    }
}

impl PressureLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "adiabatic exponent must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        rho.powf(self.gamma) / self.gamma
    }

    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 1.0)
    }

    /// `h(ρ) = P'(ρ)/ρ − 1 = ρ^{γ−2} − 1`, unchecked.
    #[inline]
    pub fn h(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 2.0) - 1.0
    }
}

/// `h(ρ) = P'(ρ)/ρ − 1` for `ρ > 0`.
pub fn h_value(rho: f64, law: &PressureLaw) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::NonPositiveDensity { value: rho });
    }
    Ok(law.h(rho))
}

fn check_vector(grid: &GridSpec, v: &[PhysicalField]) -> Result<()> {
    if v.len() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            found: v.len(),
        });
    }
    if v.iter().any(|c| c.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn combine(a: &PhysicalField, b: &PhysicalField, f: impl Fn(f64, f64) -> f64) -> PhysicalField {
    a.zip_with(b, f).expect("grids checked at construction")
}

fn combine_vec(
    a: &[PhysicalField],
    b: &[PhysicalField],
    f: impl Fn(f64, f64) -> f64 + Copy,
) -> Vec<PhysicalField> {
    a.iter().zip(b).map(|(x, y)| combine(x, y, f)).collect()
}

/// Densities and velocities of the two species. The potential is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState {
    pub rho1: PhysicalField,
    pub u1: Vec<PhysicalField>,
    pub rho2: PhysicalField,
    pub u2: Vec<PhysicalField>,
}

impl PrimitiveState {
    pub fn new(
        rho1: PhysicalField,
        u1: Vec<PhysicalField>,
        rho2: PhysicalField,
        u2: Vec<PhysicalField>,
    ) -> Result<Self> {
        let grid = *rho1.grid();
        if *rho2.grid() != grid {
            return Err(Error::GridMismatch);
        }
        check_vector(&grid, &u1)?;
        check_vector(&grid, &u2)?;
        for rho in [&rho1, &rho2] {
            let min = rho.min();
            if !(min > 0.0) {
                return Err(Error::NonPositiveDensity { value: min });
            }
        }
        Ok(Self { rho1, u1, rho2, u2 })
    }

    /// Uniform background `ρ1 = ρ2 = 1`, `u1 = u2 = 0`.
    pub fn background(grid: GridSpec) -> Self {
        let zero = || (0..grid.dim).map(|_| PhysicalField::zeros(grid)).collect();
        Self {
            rho1: PhysicalField::constant(grid, 1.0),
            u1: zero(),
            rho2: PhysicalField::constant(grid, 1.0),
            u2: zero(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.rho1.grid()
    }

    /// Errors unless both densities lie in `[1/2, 2]` pointwise.
    pub fn check_admissible(&self) -> Result<()> {
        let min = self.rho1.min().min(self.rho2.min());
        let max = self.rho1.max().max(self.rho2.max());
        if min < DENSITY_MIN || max > DENSITY_MAX || !min.is_finite() || !max.is_finite() {
            return Err(Error::Inadmissible { min, max });
        }
        Ok(())
    }

    /// Potential with `Δφ = ρ1 − ρ2` and zero mean.
    pub fn potential(&self, fourier: &FourierBox) -> Result<PhysicalField> {
        let diff = combine(&self.rho1, &self.rho2, |a, b| a - b);
        fourier.inverse(&fourier.solve_poisson(&fourier.forward(&diff)?)?)
    }
}

/// The unknowns `(n1, w1, n2, w2)` in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct SumDiffState {
    pub n1: PhysicalField,
    pub w1: Vec<PhysicalField>,
    pub n2: PhysicalField,
    pub w2: Vec<PhysicalField>,
}

impl SumDiffState {
    pub fn new(
        n1: PhysicalField,
        w1: Vec<PhysicalField>,
        n2: PhysicalField,
        w2: Vec<PhysicalField>,
    ) -> Result<Self> {
        let grid = *n1.grid();
        if *n2.grid() != grid {
            return Err(Error::GridMismatch);
        }
        check_vector(&grid, &w1)?;
        check_vector(&grid, &w2)?;
        Ok(Self { n1, w1, n2, w2 })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let zero = || (0..grid.dim).map(|_| PhysicalField::zeros(grid)).collect();
        Self {
            n1: PhysicalField::zeros(grid),
            w1: zero(),
            n2: PhysicalField::zeros(grid),
            w2: zero(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.n1.grid()
    }

    /// Potential with `Δφ = n2`.
    pub fn potential(&self, fourier: &FourierBox) -> Result<PhysicalField> {
        fourier.inverse(&fourier.solve_poisson(&fourier.forward(&self.n2)?)?)
    }

    pub fn to_spectral(&self, fourier: &FourierBox) -> Result<SpectralState> {
        Ok(SpectralState {
            n1: fourier.forward(&self.n1)?,
            w1: fourier.forward_vector(&self.w1)?,
            n2: fourier.forward(&self.n2)?,
            w2: fourier.forward_vector(&self.w2)?,
        })
    }
}

/// `n1 = ρ1 + ρ2 − 2`, `n2 = ρ1 − ρ2`, `w1 = u1 + u2`, `w2 = u1 − u2`.
pub fn to_sumdiff(state: &PrimitiveState) -> SumDiffState {
    SumDiffState {
        n1: combine(&state.rho1, &state.rho2, |a, b| a + b - 2.0),
        w1: combine_vec(&state.u1, &state.u2, |a, b| a + b),
        n2: combine(&state.rho1, &state.rho2, |a, b| a - b),
        w2: combine_vec(&state.u1, &state.u2, |a, b| a - b),
    }
}

/// Inverse of [`to_sumdiff`]; fails if a reconstructed density is not positive.
pub fn from_sumdiff(state: &SumDiffState) -> Result<PrimitiveState> {
    let rho1 = combine(&state.n1, &state.n2, |a, b| 0.5 * (a + b) + 1.0);
    let rho2 = combine(&state.n1, &state.n2, |a, b| 0.5 * (a - b) + 1.0);
    let min = rho1.min().min(rho2.min());
    if !(min > 0.0) {
        return Err(Error::NonPositiveDensity { value: min });
    }
    Ok(PrimitiveState {
        rho1,
        u1: combine_vec(&state.w1, &state.w2, |a, b| 0.5 * (a + b)),
        rho2,
        u2: combine_vec(&state.w1, &state.w2, |a, b| 0.5 * (a - b)),
    })
}

/// Sum/difference unknowns in spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub n1: SpectralField,
    pub w1: SpectralVector,
    pub n2: SpectralField,
    pub w2: SpectralVector,
}

impl SpectralState {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            n1: SpectralField::zeros(grid),
            w1: SpectralVector::zeros(grid),
            n2: SpectralField::zeros(grid),
            w2: SpectralVector::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.n1.grid()
    }

    pub fn to_physical(&self, fourier: &FourierBox) -> Result<SumDiffState> {
        SumDiffState::new(
            fourier.inverse(&self.n1)?,
            fourier.inverse_vector(&self.w1)?,
            fourier.inverse(&self.n2)?,
            fourier.inverse_vector(&self.w2)?,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n1: self.n1.scaled(s),
            w1: self.w1.scaled(s),
            n2: self.n2.scaled(s),
            w2: self.w2.scaled(s),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        Ok(Self {
            n1: self.n1.add_scaled(&other.n1, s)?,
            w1: self.w1.add_scaled(&other.w1, s)?,
            n2: self.n2.add_scaled(&other.n2, s)?,
            w2: self.w2.add_scaled(&other.w2, s)?,
        })
    }

    /// Discrete `L²` norm of the stacked unknowns.
    pub fn l2_norm(&self) -> f64 {
        let e = self.n1.energy() + self.w1.energy() + self.n2.energy() + self.w2.energy();
        (self.grid().volume() * e).sqrt()
    }

    /// `L²` norm of the difference block `(n2, w2)`.
    pub fn difference_block_norm(&self) -> f64 {
        (self.grid().volume() * (self.n2.energy() + self.w2.energy())).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.n1.is_finite()
            && self.n2.is_finite()
            && self.w1.comps().iter().all(SpectralField::is_finite)
            && self.w2.comps().iter().all(SpectralField::is_finite)
    }
}
