//! Closed-form eigenvalues and Green matrices of the two linear blocks.
//!
//! Per frequency `r = |ξ| > 0` both blocks are `d/dt (n̂, v̂) = S (n̂, v̂)` with
//! a real symbol of the form `S = [[0, a01], [a10, −1]]`:
//!
//! * damped Euler: `a01 = −r`, `a10 = r`, characteristic polynomial
//!   `λ² + λ + r²`, double root at `r = 1/2`;
//! * damped Euler–Poisson: `a01 = −r`, `a10 = r + 2/r`, characteristic
//!   polynomial `λ² + λ + r² + 2`, so `Re λ± = −1/2` for every `r`.
//!
//! Since `tr S = −1`, `(S + I/2)² = q I` with `q = 1/4 + a01·a10`, and
//! `e^{tS} = e^{−t/2} [C(t) I + Σ(t) (S + I/2)]` where `C, Σ` are
//! `cosh(√q t), sinh(√q t)/√q` for `q > 0` and `cos, sin` for `q < 0`.
//! Near the double root (`|λ₊ − λ₋| < 1e−6`) a three-term Taylor expansion in
//! `q` is used instead of the divided differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodge::{join_mode, split_mode};
use crate::spectral::{FourierBox, SpectralField, SpectralVector, MEAN_TOLERANCE};
use crate::state::SpectralState;

/// Eigenvalue gap below which the Taylor branch is used.
pub const DOUBLE_ROOT_GAP: f64 = 1e-6;

/// Default split radius for spectral-gap reports.
pub const DEFAULT_SPLIT_RADIUS: f64 = 0.25;

/// Real 2×2 matrix, row major.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Largest absolute entry.
pub fn max_abs(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Which linear block a symbol belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    /// `(n1, w1)`: damped Euler.
    EulerDamped,
    /// `(n2, w2)`: damped Euler–Poisson.
    EulerPoissonDamped,
}

impl SymbolKind {
    pub const ALL: [SymbolKind; 2] = [SymbolKind::EulerDamped, SymbolKind::EulerPoissonDamped];

    pub fn label(&self) -> &'static str {
        match self {
            SymbolKind::EulerDamped => "euler",
            SymbolKind::EulerPoissonDamped => "euler-poisson",
        }
    }

    /// `λ₊ λ₋` as a function of `r`.
    pub fn determinant(&self, r: f64) -> f64 {
        match self {
            SymbolKind::EulerDamped => r * r,
            SymbolKind::EulerPoissonDamped => r * r + 2.0,
        }
    }
}

/// Symbol `[[0, a01], [a10, −1]]` of one block at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symbol {
    pub a01: f64,
    pub a10: f64,
}

impl Symbol {
    pub fn new(kind: SymbolKind, r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(match kind {
            SymbolKind::EulerDamped => Self { a01: -r, a10: r },
            SymbolKind::EulerPoissonDamped => Self {
                a01: -r,
                a10: r + 2.0 / r,
            },
        })
    }

    pub fn matrix(&self) -> Mat2 {
        [[0.0, self.a01], [self.a10, -1.0]]
    }

    /// `λ₊ λ₋ = det S`.
    fn product(&self) -> f64 {
        -self.a01 * self.a10
    }

    /// `q = ((λ₊ − λ₋)/2)²`, negative for complex pairs.
    fn half_gap_sq(&self) -> f64 {
        0.25 + self.a01 * self.a10
    }

    /// Roots of `λ² + λ + det S = 0`.
    pub fn eigenvalues(&self) -> EigenPair {
        let q = self.half_gap_sq();
        if q > 0.0 {
            let s = q.sqrt();
            let minus = -0.5 - s;
            // λ₊ from the product avoids cancellation for small det S
            let plus = self.product() / minus;
            EigenPair {
                plus: Complex64::new(plus, 0.0),
                minus: Complex64::new(minus, 0.0),
            }
        } else {
            let w = (-q).sqrt();
            EigenPair {
                plus: Complex64::new(-0.5, w),
                minus: Complex64::new(-0.5, -w),
            }
        }
    }

    /// `e^{tS}`.
    pub fn exp(&self, t: f64) -> Mat2 {
        let q = self.half_gap_sq();
        let a = self.a01;
        let b = self.a10;
        if 2.0 * q.abs().sqrt() < DOUBLE_ROOT_GAP {
            let em = (-0.5 * t).exp();
            let qt2 = q * t * t;
            let c = em * (1.0 + qt2 / 2.0 + qt2 * qt2 / 24.0);
            let s = em * t * (1.0 + qt2 / 6.0 + qt2 * qt2 / 120.0);
            return [[c + 0.5 * s, a * s], [b * s, c - 0.5 * s]];
        }
        if q > 0.0 {
            let root = q.sqrt();
            let eig = self.eigenvalues();
            let ep = (eig.plus.re * t).exp();
            let en = (eig.minus.re * t).exp();
            // Σ = (e^{λ₊t} − e^{λ₋t}) / (λ₊ − λ₋) without cancellation
            let s = -ep * (-2.0 * root * t).exp_m1() / (2.0 * root);
            if root > 0.25 {
                // diagonal entries with the 1/2 ± 1/(4√q) weights resolved
                let kappa = self.product() / (root * (1.0 + 2.0 * root));
                let g00 = ep + kappa * (ep - en);
                let g11 = en - kappa * (ep - en);
                [[g00, a * s], [b * s, g11]]
            } else {
                let c = 0.5 * (ep + en);
                [[c + 0.5 * s, a * s], [b * s, c - 0.5 * s]]
            }
        } else {
            let w = (-q).sqrt();
            let em = (-0.5 * t).exp();
            let c = em * (w * t).cos();
            let s = em * (w * t).sin() / w;
            [[c + 0.5 * s, a * s], [b * s, c - 0.5 * s]]
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "frequency magnitude must be positive, got {r}"
        )));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    Ok(())
}

/// Growth rates of one frequency, ordered by real part then imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl EigenPair {
    pub fn sum(&self) -> Complex64 {
        self.plus + self.minus
    }

    pub fn product(&self) -> Complex64 {
        self.plus * self.minus
    }
}

pub fn eigenvalues(kind: SymbolKind, r: f64) -> Result<EigenPair> {
    Ok(Symbol::new(kind, r)?.eigenvalues())
}

/// Value of a Green matrix at one `(r, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorSample {
    pub r: f64,
    pub t: f64,
    pub matrix: Mat2,
}

pub fn propagator(kind: SymbolKind, r: f64, t: f64) -> Result<PropagatorSample> {
    check_time(t)?;
    let symbol = Symbol::new(kind, r)?;
    Ok(PropagatorSample {
        r,
        t,
        matrix: symbol.exp(t),
    })
}

/// `inf_{r ≥ η} −Re λ₊(r)`: the exponential rate of the high-frequency part.
pub fn spectral_gap(kind: SymbolKind, eta: f64) -> Result<f64> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "split radius must be positive, got {eta}"
        )));
    }
    Ok(match kind {
        SymbolKind::EulerPoissonDamped => 0.5,
        SymbolKind::EulerDamped if eta >= 0.5 => 0.5,
        // (1 − √(1 − 4η²))/2 written without cancellation
        SymbolKind::EulerDamped => 2.0 * eta * eta / (1.0 + (1.0 - 4.0 * eta * eta).sqrt()),
    })
}

/// Per-frequency Green matrices of both blocks for a fixed time step.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    t: f64,
    damping: f64,
    euler: Vec<Mat2>,
    euler_poisson: Vec<Mat2>,
}

impl LinearPropagator {
    pub fn new(fourier: &FourierBox, t: f64) -> Result<Self> {
        check_time(t)?;
        let len = fourier.grid().len();
        let mut euler = vec![IDENTITY; len];
        let mut euler_poisson = vec![IDENTITY; len];
        for idx in 1..len {
            let r = fourier.wavevector_norm(idx);
            euler[idx] = Symbol::new(SymbolKind::EulerDamped, r)?.exp(t);
            euler_poisson[idx] = Symbol::new(SymbolKind::EulerPoissonDamped, r)?.exp(t);
        }
        Ok(Self {
            t,
            damping: (-t).exp(),
            euler,
            euler_poisson,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Propagates one `(density, velocity)` pair with the given block.
    ///
    /// The density zero mode is left untouched and the velocity mean decays
    /// like `e^{−t}`.
    pub fn apply_pair(
        &self,
        fourier: &FourierBox,
        kind: SymbolKind,
        density: &mut SpectralField,
        velocity: &mut SpectralVector,
    ) {
        let table = match kind {
            SymbolKind::EulerDamped => &self.euler,
            SymbolKind::EulerPoissonDamped => &self.euler_poisson,
        };
        let grid = *fourier.grid();
        let dim = grid.dim;
        let zero = Complex64::new(0.0, 0.0);
        for comp in velocity.comps_mut() {
            comp.coeffs_mut()[0] *= self.damping;
        }
        let mut w = [zero; 3];
        let mut out = [zero; 3];
        for (idx, g) in table.iter().enumerate().skip(1) {
            let xi = fourier.wavevector(idx);
            let r = fourier.wavevector_norm(idx);
            for (a, slot) in w.iter_mut().take(dim).enumerate() {
                *slot = velocity.comps()[a].coeffs()[idx];
            }
            let (v, mut d) = split_mode(&xi, r, &w[..dim]);
            let n = density.coeffs()[idx];
            let n_new = n * g[0][0] + v * g[0][1];
            let v_new = n * g[1][0] + v * g[1][1];
            d.iter_mut().for_each(|c| *c *= self.damping);
            join_mode(&xi, r, v_new, &d[..dim], &mut out[..dim]);
            density.coeffs_mut()[idx] = n_new;
            for (a, comp) in velocity.comps_mut().iter_mut().enumerate() {
                comp.coeffs_mut()[idx] = out[a];
            }
        }
    }

    /// Applies `Ĝ₁` to `(n1, w1)` and `Ĝ₂` to `(n2, w2)`.
    pub fn apply(&self, fourier: &FourierBox, state: &SpectralState) -> Result<SpectralState> {
        if state.grid() != fourier.grid() {
            return Err(Error::GridMismatch);
        }
        check_difference_mean(&state.n2)?;
        let mut out = state.clone();
        self.apply_pair(fourier, SymbolKind::EulerDamped, &mut out.n1, &mut out.w1);
        self.apply_pair(
            fourier,
            SymbolKind::EulerPoissonDamped,
            &mut out.n2,
            &mut out.w2,
        );
        Ok(out)
    }
}

pub(crate) fn check_difference_mean(n2: &SpectralField) -> Result<()> {
    let mean = n2.mean().norm();
    if mean > MEAN_TOLERANCE {
        return Err(Error::NonZeroMean {
            mean,
            tolerance: MEAN_TOLERANCE,
        });
    }
    Ok(())
}

/// Exact linear evolution of a spectral sum/difference state over time `t`.
pub fn apply_linear_semigroup(
    fourier: &FourierBox,
    state: &SpectralState,
    t: f64,
) -> Result<SpectralState> {
    LinearPropagator::new(fourier, t)?.apply(fourier, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_band_limited, GridSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn euler_eigenvalues_small_r_and_double_root() {
        let e = eigenvalues(SymbolKind::EulerDamped, 1e-9).unwrap();
        assert!(e.plus.norm() < 1e-17);
        assert!(close(e.minus, Complex64::new(-1.0, 0.0), 1e-15));
        let d = eigenvalues(SymbolKind::EulerDamped, 0.5).unwrap();
        assert!(close(d.plus, Complex64::new(-0.5, 0.0), 1e-15));
        assert!(close(d.minus, Complex64::new(-0.5, 0.0), 1e-15));
    }

    #[test]
    fn euler_poisson_eigenvalues_at_one() {
        let e = eigenvalues(SymbolKind::EulerPoissonDamped, 1.0).unwrap();
        let root = 11f64.sqrt() / 2.0;
        assert!(close(e.plus, Complex64::new(-0.5, root), 1e-15));
        assert!(close(e.minus, Complex64::new(-0.5, -root), 1e-15));
    }

    #[test]
    fn invalid_inputs() {
        assert!(eigenvalues(SymbolKind::EulerDamped, 0.0).is_err());
        assert!(eigenvalues(SymbolKind::EulerDamped, -1.0).is_err());
        assert!(propagator(SymbolKind::EulerDamped, 1.0, -0.1).is_err());
        assert!(propagator(SymbolKind::EulerDamped, f64::NAN, 1.0).is_err());
        assert!(spectral_gap(SymbolKind::EulerDamped, 0.0).is_err());
    }

    #[test]
    fn identity_at_time_zero() {
        for kind in SymbolKind::ALL {
            for r in [1e-3, 0.3, 0.5, 0.5 + 1e-8, 2.0, 100.0] {
                let m = propagator(kind, r, 0.0).unwrap().matrix;
                for i in 0..2 {
                    for j in 0..2 {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((m[i][j] - e).abs() < 1e-15, "{kind:?} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn euler_small_frequency_limit() {
        for t in [0.5, 3.0, 20.0] {
            let m = propagator(SymbolKind::EulerDamped, 1e-9, t).unwrap().matrix;
            assert!((m[0][0] - 1.0).abs() < 1e-12);
            assert!((m[1][1] - (-t).exp()).abs() < 1e-12);
            assert!(m[0][1].abs() < 1e-8 && m[1][0].abs() < 1e-8);
        }
    }

    #[test]
    fn taylor_branch_is_continuous() {
        // across the double root the closed form must not jump
        let t = 3.0;
        let at = propagator(SymbolKind::EulerDamped, 0.5, t).unwrap().matrix;
        for dr in [1e-13, 1e-10, 1e-8, 1e-6, 1e-4] {
            for r in [0.5 - dr, 0.5 + dr] {
                let m = propagator(SymbolKind::EulerDamped, r, t).unwrap().matrix;
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((m[i][j] - at[i][j]).abs() < 10.0 * dr + 1e-14, "r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn spectral_gap_examples() {
        for eta in [0.01, 0.25, 1.0, 7.0] {
            assert_eq!(spectral_gap(SymbolKind::EulerPoissonDamped, eta).unwrap(), 0.5);
        }
        assert_eq!(spectral_gap(SymbolKind::EulerDamped, 0.5).unwrap(), 0.5);
        let b = spectral_gap(SymbolKind::EulerDamped, 0.25).unwrap();
        assert!((b - (1.0 - 0.75f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((b - 0.066987).abs() < 1e-6);
        // the gap is −Re λ₊ at the split radius
        let e = eigenvalues(SymbolKind::EulerDamped, 0.25).unwrap();
        assert!((b + e.plus.re).abs() < 1e-15);
    }

    #[test]
    fn low_frequency_expansion_of_the_euler_block() {
        // λ₊ = −r² − r⁴ + O(r⁶) and
        // Ĝ₁[0][0] = (1 + r²) e^{−r²t} − r² e^{−t} + O(r⁴ t e^{−r²t} + r⁴)
        for &r in &[1e-4, 1e-3, 3e-3, 1e-2] {
            let e = eigenvalues(SymbolKind::EulerDamped, r).unwrap();
            assert!((e.plus.re + r * r).abs() <= 2.0 * r.powi(4));
            for &t in &[0.0, 0.1, 1.0, 5.0, 10.0, 100.0, 1e3, 1e4, 1e5] {
                let g = propagator(SymbolKind::EulerDamped, r, t).unwrap().matrix;
                let heat = (-r * r * t).exp();
                let approx = heat + r * r * (heat - (-t).exp());
                let bound = 4.0 * (r.powi(4) * t * (-r * r * t / 2.0).exp() + r.powi(4));
                assert!((g[0][0] - approx).abs() <= bound, "r={r} t={t}");
            }
        }
    }

    #[test]
    fn euler_poisson_entries_decay_uniformly() {
        for i in 0..60 {
            let r = 10f64.powf(-3.0 + 5.0 * i as f64 / 59.0);
            for &t in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
                let g = propagator(SymbolKind::EulerPoissonDamped, r, t).unwrap().matrix;
                let bound = 4.0 * (1.0 + r + 1.0 / r) * (-t / 2.0).exp();
                assert!(max_abs(&g) <= bound, "r={r} t={t}");
                // apart from the Λ⁻¹ coupling entry the (1 + r) bound holds
                let tight = 4.0 * (1.0 + r) * (-t / 2.0).exp();
                assert!(g[0][0].abs().max(g[0][1].abs()).max(g[1][1].abs()) <= tight);
            }
        }
    }

    #[test]
    fn semigroup_at_zero_time_and_solenoidal_decay() {
        let g = GridSpec::new(8, 2.0 * std::f64::consts::PI, 3).unwrap();
        let fb = FourierBox::new(g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = SpectralState::zeros(g);
        s.n1 = random_band_limited(g, 2, &mut rng);
        s.n2 = random_band_limited(g, 2, &mut rng);
        for c in s.w1.comps_mut().iter_mut().chain(s.w2.comps_mut()) {
            *c = random_band_limited(g, 2, &mut rng);
        }
        let same = apply_linear_semigroup(&fb, &s, 0.0).unwrap();
        assert!(same.add_scaled(&s, -1.0).unwrap().l2_norm() < 1e-14 * s.l2_norm());

        // purely solenoidal w1 with n1 = 0
        let parts = crate::hodge::decompose(&fb, &s.w1).unwrap();
        let mut sol = SpectralState::zeros(g);
        sol.w1 = parts.d.clone();
        let t = 0.7;
        let out = apply_linear_semigroup(&fb, &sol, t).unwrap();
        let before = fb.lambda_norm_vector(&sol.w1, 0);
        let after = fb.lambda_norm_vector(&out.w1, 0);
        assert!((after - (-t).exp() * before).abs() < 1e-13 * before);
        assert!(out.n1.energy() < 1e-28);

        let mut bad = s.clone();
        bad.n2.coeffs_mut()[0] = Complex64::new(1e-6, 0.0);
        assert!(matches!(
            apply_linear_semigroup(&fb, &bad, 0.1),
            Err(Error::NonZeroMean { .. })
        ));
    }

    proptest! {
        #[test]
        fn structural_identities(lr in -3.0f64..2.0, t in 0.0f64..10.0, s in 0.0f64..10.0, ep in any::<bool>()) {
            let kind = if ep { SymbolKind::EulerPoissonDamped } else { SymbolKind::EulerDamped };
            let r = 10f64.powf(lr);
            let e = eigenvalues(kind, r).unwrap();
            prop_assert!((e.sum() + 1.0).norm() <= 1e-14);
            let p = kind.determinant(r);
            prop_assert!((e.product() - p).norm() <= 1e-14 * p);
            prop_assert!(e.plus.re <= 0.0 && e.minus.re <= 0.0);
            prop_assert!(e.plus.re >= e.minus.re);
            if kind == SymbolKind::EulerPoissonDamped {
                prop_assert_eq!(e.plus.re, -0.5);
                prop_assert!(e.plus.im >= 0.0);
            }
            let gt = propagator(kind, r, t).unwrap().matrix;
            prop_assert!((det(&gt) / (-t).exp() - 1.0).abs() <= 1e-10);
            let gs = propagator(kind, r, s).unwrap().matrix;
            let gts = propagator(kind, r, t + s).unwrap().matrix;
            let prod = mat_mul(&gt, &gs);
            let scale = max_abs(&gts);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((prod[i][j] - gts[i][j]).abs() <= 1e-10 * scale);
                }
            }
        }
    }
}
