//! Brute-force references for the fast code paths.
//!
//! * [`ode_propagator`]: classical RK4 on the per-frequency linear system,
//!   assembled from the transport, pressure, damping and field terms rather
//!   than from the symbol matrices of [`crate::propagators`].
//! * [`fd_check_rhs`]: the nonlinear sources in expanded (non-flux) form with
//!   finite-difference derivatives and no dealiasing.
//! * [`reference_simulate`]: the same integrator on a doubled grid with a
//!   ten times smaller step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagators::{det, mat_mul, max_abs, Mat2, Symbol, SymbolKind};
use crate::solver::{simulate, SimConfig, Trajectory};
use crate::spectral::{GridSpec, PhysicalField};
use crate::state::{PressureLaw, SumDiffState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOracleConfig {
    pub dt: f64,
}

impl Default for OdeOracleConfig {
    fn default() -> Self {
        Self { dt: 1e-4 }
    }
}

/// Time derivative of `(n̂, v̂)` at frequency `|ξ| = r`.
fn linear_rhs(kind: SymbolKind, r: f64, n: f64, v: f64) -> (f64, f64) {
    // continuity: ∂ₜn̂ = −iξ·ŵ = −r v̂
    let dn = -r * v;
    // momentum, projected on iξ/r: damping, pressure and field force
    let pressure = r * n;
    let field = match kind {
        SymbolKind::EulerDamped => 0.0,
        SymbolKind::EulerPoissonDamped => {
            // the difference block feels 2∇φ with −|ξ|²φ̂ = n̂
            let phi = -n / (r * r);
            -2.0 * r * phi
        }
    };
    (dn, -v + pressure + field)
}

/// Green matrix at `(r, t)` by fixed-step RK4 from the identity.
pub fn ode_propagator(kind: SymbolKind, r: f64, t: f64, config: &OdeOracleConfig) -> Result<Mat2> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {r}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    if !(config.dt.is_finite() && config.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("oracle dt must be positive, got {}", config.dt)));
    }
    let steps = (t / config.dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let f = |y: (f64, f64)| linear_rhs(kind, r, y.0, y.1);
    let mut out = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut y = if col == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f((y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
            let k3 = f((y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
            let k4 = f((y.0 + h * k3.0, y.1 + h * k3.1));
            y.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            y.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        out[0][col] = y.0;
        out[1][col] = y.1;
    }
    Ok(out)
}

/// Finite-difference stencil used by [`fd_check_rhs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(x+h) − f(x−h)) / 2h`
    Centered,
    /// One Richardson extrapolation of the centered quotient, fourth order.
    Extrapolated,
}

fn shift(grid: &GridSpec, idx: usize, axis: usize, by: isize) -> usize {
    let n = grid.n as isize;
    let mut a = grid.axis_indices(idx);
    a[axis] = (a[axis] as isize + by).rem_euclid(n) as usize;
    match grid.dim {
        1 => a[0],
        _ => (a[0] * grid.n + a[1]) * grid.n + a[2],
    }
}

fn fd_derivative(f: &PhysicalField, axis: usize, stencil: Stencil) -> Vec<f64> {
    let grid = *f.grid();
    let h = grid.spacing();
    let v = f.values();
    (0..grid.len())
        .map(|i| {
            let d1 = (v[shift(&grid, i, axis, 1)] - v[shift(&grid, i, axis, -1)]) / (2.0 * h);
            match stencil {
                Stencil::Centered => d1,
                Stencil::Extrapolated => {
                    let d2 = (v[shift(&grid, i, axis, 2)] - v[shift(&grid, i, axis, -2)]) / (4.0 * h);
                    (4.0 * d1 - d2) / 3.0
                }
            }
        })
        .collect()
}

/// Nonlinear sources `(f1, f2, f3, f4)` from grid samples, packed into the
/// `(n1, w1, n2, w2)` slots.
///
/// Uses the expanded continuity sources
/// `f1 = −½[w1·∇n1 + w2·∇n2 + n1 div w1 + n2 div w2]` and
/// `f3 = −½[w2·∇n1 + w1·∇n2 + n1 div w2 + n2 div w1]`; only the sampled
/// unknowns are differentiated, all products are pointwise.
pub fn fd_check_rhs(state: &SumDiffState, law: &PressureLaw, stencil: Stencil) -> Result<SumDiffState> {
    let grid = *state.grid();
    let dim = grid.dim;
    let len = grid.len();
    let grad = |f: &PhysicalField| -> Vec<Vec<f64>> {
        (0..dim).map(|a| fd_derivative(f, a, stencil)).collect()
    };
    let gn1 = grad(&state.n1);
    let gn2 = grad(&state.n2);
    let gw1: Vec<_> = state.w1.iter().map(grad).collect();
    let gw2: Vec<_> = state.w2.iter().map(grad).collect();

    let mut f1 = vec![0.0; len];
    let mut f3 = vec![0.0; len];
    let mut f2 = vec![vec![0.0; len]; dim];
    let mut f4 = vec![vec![0.0; len]; dim];
    for p in 0..len {
        let n1 = state.n1.values()[p];
        let n2 = state.n2.values()[p];
        let w1: Vec<f64> = state.w1.iter().map(|c| c.values()[p]).collect();
        let w2: Vec<f64> = state.w2.iter().map(|c| c.values()[p]).collect();
        let rho1 = 1.0 + 0.5 * (n1 + n2);
        let rho2 = 1.0 + 0.5 * (n1 - n2);
        if !(rho1 > 0.0 && rho2 > 0.0) {
            return Err(Error::NonPositiveDensity { value: rho1.min(rho2) });
        }
        let (h1, h2) = (law.h(rho1), law.h(rho2));
        let div1: f64 = (0..dim).map(|a| gw1[a][a][p]).sum();
        let div2: f64 = (0..dim).map(|a| gw2[a][a][p]).sum();
        let dot = |w: &[f64], g: &Vec<Vec<f64>>| -> f64 { (0..dim).map(|a| w[a] * g[a][p]).sum() };
        f1[p] = -0.5 * (dot(&w1, &gn1) + dot(&w2, &gn2) + n1 * div1 + n2 * div2);
        f3[p] = -0.5 * (dot(&w2, &gn1) + dot(&w1, &gn2) + n1 * div2 + n2 * div1);
        for i in 0..dim {
            let adv = |w: &[f64], g: &Vec<Vec<Vec<f64>>>| -> f64 {
                (0..dim).map(|j| w[j] * g[i][j][p]).sum()
            };
            f2[i][p] = -0.5
                * (adv(&w1, &gw1) + adv(&w2, &gw2) + (h1 + h2) * gn1[i][p] + (h1 - h2) * gn2[i][p]);
            f4[i][p] = -0.5
                * (adv(&w1, &gw2) + adv(&w2, &gw1) + (h1 - h2) * gn1[i][p] + (h1 + h2) * gn2[i][p]);
        }
    }
    let field = |v: Vec<f64>| PhysicalField::new(grid, v);
    SumDiffState::new(
        field(f1)?,
        f2.into_iter().map(field).collect::<Result<_>>()?,
        field(f3)?,
        f4.into_iter().map(field).collect::<Result<_>>()?,
    )
}

/// Work limit for [`reference_simulate`], in grid points times steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBudget {
    pub max_point_steps: f64,
}

impl Default for ReferenceBudget {
    fn default() -> Self {
        Self {
            max_point_steps: 5e8,
        }
    }
}

/// The configuration [`reference_simulate`] runs: doubled grid, `dt/10`.
pub fn reference_config(config: &SimConfig) -> Result<SimConfig> {
    let mut fine = config.clone();
    fine.grid = GridSpec::new(config.grid.n * 2, config.grid.length, config.grid.dim)?;
    fine.dt = config.dt / 10.0;
    Ok(fine)
}

/// Reference trajectory on the refined discretization.
pub fn reference_simulate(config: &SimConfig, budget: &ReferenceBudget) -> Result<Trajectory> {
    config.validate()?;
    let fine = reference_config(config)?;
    let work = fine.grid.len() as f64 * (fine.t_end / fine.dt).ceil();
    if work > budget.max_point_steps {
        return Err(Error::ResourceGuard(format!(
            "reference run needs {work:.3e} point-steps, budget is {:.3e}",
            budget.max_point_steps
        )));
    }
    simulate(&fine)
}

/// Options of [`verify_symbols`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Number of log-spaced frequencies in `[r_min, r_max]`.
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub times: Vec<f64>,
    pub oracle: OdeOracleConfig,
    /// Test hook: evaluate the closed forms with the Euler–Poisson coupling
    /// entry `r − 2/r` instead of `r + 2/r`.
    pub flip_poisson_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            r_min: 1e-3,
            r_max: 1e2,
            times: vec![0.1, 1.0, 10.0],
            oracle: OdeOracleConfig::default(),
            flip_poisson_sign: false,
        }
    }
}

/// Outcome of one family of checks for one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: SymbolKind,
    pub comparisons: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolReport {
    pub samples: usize,
    pub times: Vec<f64>,
    pub flip_poisson_sign: bool,
    pub checks: Vec<CheckResult>,
}

impl SymbolReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str, kind: SymbolKind) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name && c.kind == kind)
    }
}

/// Largest entry of `a − b` relative to the largest entry of `b`.
pub fn matrix_relative_error(a: &Mat2, b: &Mat2) -> f64 {
    let mut diff = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            diff[i][j] = a[i][j] - b[i][j];
        }
    }
    max_abs(&diff) / max_abs(b)
}

/// Checks the closed-form eigenvalues and Green matrices against their
/// algebraic identities and against [`ode_propagator`].
///
/// Per block it runs `eigen-sum`, `eigen-product`, `oracle` (exactly
/// `samples × times.len()` comparisons), `determinant` and `semigroup`.
pub fn verify_symbols(options: &VerifyOptions) -> Result<SymbolReport> {
    if options.samples < 2 || !(options.r_min > 0.0 && options.r_max > options.r_min) {
        return Err(Error::InvalidArgument(
            "need at least two frequencies in a positive range".into(),
        ));
    }
    if options.times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidArgument("check times must be positive".into()));
    }
    let radii: Vec<f64> = (0..options.samples)
        .map(|i| {
            let s = i as f64 / (options.samples - 1) as f64;
            options.r_min * (options.r_max / options.r_min).powf(s)
        })
        .collect();
    let mut checks = Vec::new();
    for kind in SymbolKind::ALL {
        let symbol = |r: f64| -> Result<Symbol> {
            let mut s = Symbol::new(kind, r)?;
            if options.flip_poisson_sign && kind == SymbolKind::EulerPoissonDamped {
                s.a10 = r - 2.0 / r;
            }
            Ok(s)
        };
        let mut record = |name: &str, errors: Vec<f64>, tolerance: f64| {
            let max_error = errors.iter().copied().fold(0.0, f64::max);
            checks.push(CheckResult {
                name: name.into(),
                kind,
                comparisons: errors.len(),
                max_error,
                tolerance,
                pass: errors.iter().all(|e| *e <= tolerance),
            });
        };
        let mut sum = Vec::new();
        let mut product = Vec::new();
        for &r in &radii {
            let eig = symbol(r)?.eigenvalues();
            sum.push((eig.sum() + 1.0).norm());
            let expected = kind.determinant(r);
            product.push((eig.product() - expected).norm() / expected);
        }
        record("eigen-sum", sum, 1e-14);
        record("eigen-product", product, 1e-14);

        let mut oracle = Vec::new();
        let mut determinant = Vec::new();
        let mut semigroup = Vec::new();
        for &r in &radii {
            let s = symbol(r)?;
            for &t in &options.times {
                let g = s.exp(t);
                oracle.push(matrix_relative_error(&g, &ode_propagator(kind, r, t, &options.oracle)?));
                determinant.push((det(&g) - (-t).exp()).abs() / (-t).exp());
                let whole = s.exp(1.5 * t);
                let split = mat_mul(&g, &s.exp(0.5 * t));
                semigroup.push(matrix_relative_error(&split, &whole));
            }
        }
        record("oracle", oracle, 1e-6);
        record("determinant", determinant, 1e-10);
        record("semigroup", semigroup, 1e-10);
    }
    Ok(SymbolReport {
        samples: options.samples,
        times: options.times.clone(),
        flip_poisson_sign: options.flip_poisson_sign,
        checks,
    })
}
