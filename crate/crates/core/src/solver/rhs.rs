//! Nonlinear right-hand sides, evaluated pseudospectrally.
//!
//! Products are formed pointwise in physical space from (optionally 2/3
//! truncated) inputs; derivatives are spectral. In sum/difference variables
//! the continuity sources are written in flux form,
//!
//! * `f1 = −½ div(n1 w1 + n2 w2)`,
//! * `f3 = −½ div(n1 w2 + n2 w1)`,
//!
//! obtained by adding and subtracting `∂ₜρᵢ + div((ρᵢ − 1) uᵢ) + div uᵢ = 0`.
//! The momentum sources are
//!
//! * `f2 = −½ [(w1·∇)w1 + (w2·∇)w2 + (h₊ + h₋)∇n1 + (h₊ − h₋)∇n2]`,
//! * `f4 = −½ [(w1·∇)w2 + (w2·∇)w1 + (h₊ − h₋)∇n1 + (h₊ + h₋)∇n2]`,
//!
//! with `h± = h((n1 ± n2)/2 + 1)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{FourierBox, PhysicalField, SpectralField, SpectralVector};
use crate::state::{PressureLaw, SpectralState, DENSITY_MAX, DENSITY_MIN};

/// Sources for the four slots plus the largest species speed seen.
#[derive(Debug, Clone)]
pub struct RhsEval {
    pub terms: SpectralState,
    pub max_speed: f64,
}

/// Physical samples of a density/velocity pair and their first derivatives.
struct PairSamples {
    a: Vec<f64>,
    grad_a: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    /// `grad_u[i][j] = ∂_j u_i`
    grad_u: Vec<Vec<Vec<f64>>>,
}

fn masked(fourier: &FourierBox, f: &SpectralField, dealias: bool) -> SpectralField {
    let mut out = f.clone();
    if dealias {
        fourier.dealias(&mut out);
    }
    out
}

fn samples(
    fourier: &FourierBox,
    density: &SpectralField,
    velocity: &SpectralVector,
    dealias: bool,
) -> Result<PairSamples> {
    let to_phys = |f: &SpectralField| -> Result<Vec<f64>> { Ok(fourier.inverse(f)?.into_values()) };
    let a_hat = masked(fourier, density, dealias);
    let a = to_phys(&a_hat)?;
    let grad_a = fourier
        .gradient(&a_hat)?
        .comps()
        .iter()
        .map(to_phys)
        .collect::<Result<Vec<_>>>()?;
    let mut u = Vec::with_capacity(velocity.comps().len());
    let mut grad_u = Vec::with_capacity(velocity.comps().len());
    for comp in velocity.comps() {
        let c_hat = masked(fourier, comp, dealias);
        u.push(to_phys(&c_hat)?);
        grad_u.push(
            fourier
                .gradient(&c_hat)?
                .comps()
                .iter()
                .map(to_phys)
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(PairSamples {
        a,
        grad_a,
        u,
        grad_u,
    })
}

fn to_spectral(
    fourier: &FourierBox,
    values: Vec<f64>,
    dealias: bool,
) -> Result<SpectralField> {
    let field = PhysicalField::new(*fourier.grid(), values)?;
    let mut hat = fourier.forward(&field)?;
    if dealias {
        fourier.dealias(&mut hat);
    }
    Ok(hat)
}

fn vector_to_spectral(
    fourier: &FourierBox,
    comps: Vec<Vec<f64>>,
    dealias: bool,
) -> Result<SpectralVector> {
    SpectralVector::new(
        comps
            .into_iter()
            .map(|c| to_spectral(fourier, c, dealias))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// `−½ div(flux)` with the zero mode removed.
fn half_divergence(fourier: &FourierBox, flux: &SpectralVector) -> Result<SpectralField> {
    let mut out = fourier.divergence(flux)?.scaled(-0.5);
    out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok(out)
}

fn check_box(min: f64, max: f64) -> Result<()> {
    if !(min >= DENSITY_MIN && max <= DENSITY_MAX) {
        return Err(Error::Inadmissible { min, max });
    }
    Ok(())
}

/// Nonlinear sources `(f1, f2, f3, f4)` of the sum/difference system.
///
/// The result is packed into a [`SpectralState`] with `f1` in the `n1`
/// slot, `f2` in `w1`, `f3` in `n2` and `f4` in `w2`.
pub fn nonlinear_rhs(
    fourier: &FourierBox,
    law: &PressureLaw,
    state: &SpectralState,
    dealias: bool,
) -> Result<RhsEval> {
    if state.grid() != fourier.grid() {
        return Err(Error::GridMismatch);
    }
    let dim = fourier.grid().dim;
    let len = fourier.grid().len();
    let s1 = samples(fourier, &state.n1, &state.w1, dealias)?;
    let s2 = samples(fourier, &state.n2, &state.w2, dealias)?;

    let mut flux1 = vec![vec![0.0; len]; dim];
    let mut flux3 = vec![vec![0.0; len]; dim];
    let mut f2 = vec![vec![0.0; len]; dim];
    let mut f4 = vec![vec![0.0; len]; dim];
    let (mut min, mut max, mut speed) = (f64::INFINITY, f64::NEG_INFINITY, 0.0_f64);
    for p in 0..len {
        let n1 = s1.a[p];
        let n2 = s2.a[p];
        let rho_plus = 0.5 * (n1 + n2) + 1.0;
        let rho_minus = 0.5 * (n1 - n2) + 1.0;
        min = min.min(rho_plus.min(rho_minus));
        max = max.max(rho_plus.max(rho_minus));
        let hp = law.h(rho_plus);
        let hm = law.h(rho_minus);
        for i in 0..dim {
            let w1 = s1.u[i][p];
            let w2 = s2.u[i][p];
            speed = speed.max((0.5 * (w1 + w2)).abs().max((0.5 * (w1 - w2)).abs()));
            flux1[i][p] = n1 * w1 + n2 * w2;
            flux3[i][p] = n1 * w2 + n2 * w1;
            let mut adv11 = 0.0;
            let mut adv22 = 0.0;
            let mut adv12 = 0.0;
            let mut adv21 = 0.0;
            for j in 0..dim {
                adv11 += s1.u[j][p] * s1.grad_u[i][j][p];
                adv22 += s2.u[j][p] * s2.grad_u[i][j][p];
                adv12 += s1.u[j][p] * s2.grad_u[i][j][p];
                adv21 += s2.u[j][p] * s1.grad_u[i][j][p];
            }
            let gn1 = s1.grad_a[i][p];
            let gn2 = s2.grad_a[i][p];
            f2[i][p] = -0.5 * (adv11 + adv22 + (hp + hm) * gn1 + (hp - hm) * gn2);
            f4[i][p] = -0.5 * (adv12 + adv21 + (hp - hm) * gn1 + (hp + hm) * gn2);
        }
    }
    check_box(min, max)?;

    let terms = SpectralState {
        n1: half_divergence(fourier, &vector_to_spectral(fourier, flux1, dealias)?)?,
        w1: vector_to_spectral(fourier, f2, dealias)?,
        n2: half_divergence(fourier, &vector_to_spectral(fourier, flux3, dealias)?)?,
        w2: vector_to_spectral(fourier, f4, dealias)?,
    };
    Ok(RhsEval {
        terms,
        max_speed: speed,
    })
}

/// Right-hand side of the primitive form in the slots
/// `(ρ1 − 1, u1, ρ2 − 1, u2)`:
///
/// * `−div((ρᵢ − 1) uᵢ)` for the densities,
/// * `−(uᵢ·∇)uᵢ − h(ρᵢ)∇ρᵢ ± ∇φ` for the velocities, `Δφ = ρ1 − ρ2`.
///
/// The `±∇φ` coupling is linear but off-block, so it is carried here; with
/// `nonlinear == false` it is the only contribution.
pub fn primitive_rhs(
    fourier: &FourierBox,
    law: &PressureLaw,
    slots: &SpectralState,
    dealias: bool,
    nonlinear: bool,
) -> Result<RhsEval> {
    if slots.grid() != fourier.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *fourier.grid();
    let dim = grid.dim;
    let len = grid.len();

    let charge = slots.n1.add_scaled(&slots.n2, -1.0)?;
    let phi = fourier.solve_poisson(&charge)?;
    let grad_phi = fourier.gradient(&phi)?;

    let mut terms = SpectralState::zeros(grid);
    let mut speed = 0.0_f64;
    if nonlinear {
        let species = [
            samples(fourier, &slots.n1, &slots.w1, dealias)?,
            samples(fourier, &slots.n2, &slots.w2, dealias)?,
        ];
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut results = Vec::with_capacity(2);
        for s in &species {
            let mut flux = vec![vec![0.0; len]; dim];
            let mut mom = vec![vec![0.0; len]; dim];
            for p in 0..len {
                let rho = 1.0 + s.a[p];
                min = min.min(rho);
                max = max.max(rho);
                let h = law.h(rho);
                for i in 0..dim {
                    speed = speed.max(s.u[i][p].abs());
                    flux[i][p] = s.a[p] * s.u[i][p];
                    let mut adv = 0.0;
                    for j in 0..dim {
                        adv += s.u[j][p] * s.grad_u[i][j][p];
                    }
                    mom[i][p] = -adv - h * s.grad_a[i][p];
                }
            }
            let mut density = fourier.divergence(&vector_to_spectral(fourier, flux, dealias)?)?;
            density = density.scaled(-1.0);
            density.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
            results.push((density, vector_to_spectral(fourier, mom, dealias)?));
        }
        check_box(min, max)?;
        let (d2, m2) = results.pop().expect("two species");
        let (d1, m1) = results.pop().expect("two species");
        terms = SpectralState {
            n1: d1,
            w1: m1,
            n2: d2,
            w2: m2,
        };
    }
    terms.w1 = terms.w1.add_scaled(&grad_phi, 1.0)?;
    terms.w2 = terms.w2.add_scaled(&grad_phi, -1.0)?;
    Ok(RhsEval {
        terms,
        max_speed: speed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn zero_state_has_zero_sources() {
        let g = GridSpec::new(8, 2.0 * PI, 3).unwrap();
        let fb = FourierBox::new(g).unwrap();
        let out = nonlinear_rhs(&fb, &PressureLaw::default(), &SpectralState::zeros(g), true).unwrap();
        assert_eq!(out.terms.l2_norm(), 0.0);
    }

    #[test]
    fn constant_sum_density_has_zero_sources() {
        let g = GridSpec::new(8, 2.0 * PI, 3).unwrap();
        let fb = FourierBox::new(g).unwrap();
        let mut s = SpectralState::zeros(g);
        s.n1.coeffs_mut()[0] = Complex64::new(0.3, 0.0);
        let out = nonlinear_rhs(&fb, &PressureLaw::default(), &s, true).unwrap();
        assert!(out.terms.l2_norm() < 1e-15);
    }

    #[test]
    fn inadmissible_state_is_rejected() {
        let g = GridSpec::new(8, 2.0 * PI, 1).unwrap();
        let fb = FourierBox::new(g).unwrap();
        let mut s = SpectralState::zeros(g);
        s.n1.coeffs_mut()[0] = Complex64::new(2.5, 0.0);
        assert!(matches!(
            nonlinear_rhs(&fb, &PressureLaw::default(), &s, false),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn primitive_linear_part_is_the_field_coupling() {
        let g = GridSpec::new(16, 2.0 * PI, 1).unwrap();
        let fb = FourierBox::new(g).unwrap();
        let mut s = SpectralState::zeros(g);
        // ρ1 − 1 = δ cos x  ⇒  φ = −δ cos x, ∇φ = δ sin x
        let delta = 1e-3;
        s.n1 = fb
            .forward(&PhysicalField::from_fn(g, |x| delta * x[0].cos()))
            .unwrap();
        let out = primitive_rhs(&fb, &PressureLaw::default(), &s, true, false).unwrap();
        let e1 = fb.inverse(&out.terms.w1.comps()[0]).unwrap();
        let expect = PhysicalField::from_fn(g, |x| delta * x[0].sin());
        assert!(e1.zip_with(&expect, |a, b| a - b).unwrap().max_abs() < 1e-17);
        assert!(out.terms.n1.energy() == 0.0);
    }
}
