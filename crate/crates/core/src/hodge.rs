//! Fourier-space Hodge splitting of velocity fields.
//!
//! For `ξ ≠ 0` the compressible amplitude is `v̂ = |ξ|⁻¹ iξ·ŵ` and the
//! incompressible part is the solenoidal projection `d̂ = (I − ξξᵀ/|ξ|²) ŵ`.
//! With this sign the pair `(n̂, v̂)` of the linearized damped Euler system
//! obeys `d/dt (n̂, v̂) = [[0, −|ξ|], [|ξ|, −1]] (n̂, v̂)`, and `ŵ` is recovered
//! as `ŵ = −iξ/|ξ| v̂ + d̂`.
//!
//! The compressible-amplitude equation of the linearized system reads
//! `∂ₜv + v + Λn = 0`; writing `w` in place of the first `v` there is a slip,
//! the closed form above is what the propagators implement.
//!
//! The solenoidal vector `d̂` carries the same `L²` information as the
//! matrix-valued `Λ⁻¹ curl w` (whose Frobenius norm is `√2` times larger).
//! The zero mode has no compressible amplitude; it is kept aside in
//! [`ZeroModePolicy`] and re-injected on reconstruction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{FourierBox, SpectralField, SpectralVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Compressible amplitude and solenoidal remainder of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeParts {
    pub v: SpectralField,
    pub d: SpectralVector,
}

/// The spatial mean of a vector field, which the splitting cannot represent.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroModePolicy {
    pub mean: Vec<Complex64>,
}

impl ZeroModePolicy {
    pub fn capture(w: &SpectralVector) -> Self {
        Self { mean: w.mean() }
    }
}

/// Splits one nonzero mode: returns `(v̂, d̂)`.
#[inline]
pub(crate) fn split_mode(xi: &[f64; 3], r: f64, w: &[Complex64]) -> (Complex64, [Complex64; 3]) {
    let mut xi_dot_w = ZERO;
    for (k, c) in xi.iter().zip(w) {
        xi_dot_w += c * *k;
    }
    let v = Complex64::new(0.0, 1.0) * xi_dot_w / r;
    let mut d = [ZERO; 3];
    for (a, c) in w.iter().enumerate() {
        d[a] = c - xi_dot_w * (xi[a] / (r * r));
    }
    (v, d)
}

/// Inverse of [`split_mode`] for one nonzero mode.
#[inline]
pub(crate) fn join_mode(
    xi: &[f64; 3],
    r: f64,
    v: Complex64,
    d: &[Complex64],
    out: &mut [Complex64],
) {
    for (a, o) in out.iter_mut().enumerate() {
        *o = Complex64::new(0.0, -xi[a] / r) * v + d[a];
    }
}

/// Splits `w` into compressible amplitude and solenoidal part.
pub fn decompose(fourier: &FourierBox, w: &SpectralVector) -> Result<HodgeParts> {
    let grid = *fourier.grid();
    if *w.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let dim = grid.dim;
    let mut v = SpectralField::zeros(grid);
    let mut d = SpectralVector::zeros(grid);
    let mut buf = [ZERO; 3];
    for idx in 1..grid.len() {
        let xi = fourier.wavevector(idx);
        let r = fourier.wavevector_norm(idx);
        for (a, b) in buf.iter_mut().take(dim).enumerate() {
            *b = w.comps()[a].coeffs()[idx];
        }
        let (vm, dm) = split_mode(&xi, r, &buf[..dim]);
        v.coeffs_mut()[idx] = vm;
        for (a, comp) in d.comps_mut().iter_mut().enumerate() {
            comp.coeffs_mut()[idx] = dm[a];
        }
    }
    Ok(HodgeParts { v, d })
}

/// Rebuilds `w` from its parts and stored mean.
pub fn reconstruct(
    fourier: &FourierBox,
    parts: &HodgeParts,
    zero_mode: &ZeroModePolicy,
) -> Result<SpectralVector> {
    let grid = *fourier.grid();
    if *parts.v.grid() != grid || *parts.d.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if zero_mode.mean.len() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            found: zero_mode.mean.len(),
        });
    }
    let dim = grid.dim;
    let mut w = SpectralVector::zeros(grid);
    for (a, comp) in w.comps_mut().iter_mut().enumerate() {
        comp.coeffs_mut()[0] = zero_mode.mean[a];
    }
    let mut d = [ZERO; 3];
    let mut out = [ZERO; 3];
    for idx in 1..grid.len() {
        let xi = fourier.wavevector(idx);
        let r = fourier.wavevector_norm(idx);
        for (a, slot) in d.iter_mut().take(dim).enumerate() {
            *slot = parts.d.comps()[a].coeffs()[idx];
        }
        join_mode(&xi, r, parts.v.coeffs()[idx], &d[..dim], &mut out[..dim]);
        for (a, comp) in w.comps_mut().iter_mut().enumerate() {
            comp.coeffs_mut()[idx] = out[a];
        }
    }
    Ok(w)
}

/// Curl-free part `−iξ/|ξ| v̂` of a compressible amplitude.
pub fn curl_free_part(fourier: &FourierBox, v: &SpectralField) -> Result<SpectralVector> {
    let grid = *fourier.grid();
    let parts = HodgeParts {
        v: v.clone(),
        d: SpectralVector::zeros(grid),
    };
    reconstruct(
        fourier,
        &parts,
        &ZeroModePolicy {
            mean: vec![ZERO; grid.dim],
        },
    )
}
