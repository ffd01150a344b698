//! Pseudospectral Strang-split integrator for the nonlinear two-species
//! system on a periodic box.
//!
//! One step of length `Δt` is
//!
//! 1. exact linear propagation over `Δt/2`,
//! 2. explicit midpoint on the nonlinear sources over `Δt`,
//! 3. exact linear propagation over `Δt/2`.
//!
//! In sum/difference form the linear stage is the pair of closed-form Green
//! matrices (the field coupling lives inside the Euler–Poisson block). In
//! primitive form both species get the damped-Euler block and the `±∇φ`
//! coupling is integrated with the nonlinear sources. The two forms are
//! different discretizations of the same equations and agree to `O(Δt²)`.

mod energy;
mod rhs;

pub use energy::{energy_m, nirenberg_ratio, EnergyFunctional, EnergyPoint, ENERGY_TERMS};
pub use rhs::{nonlinear_rhs, primitive_rhs, RhsEval};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::{check_difference_mean, LinearPropagator, SymbolKind};
use crate::spectral::{random_band_limited, resample, FourierBox, GridSpec, SpectralField};
use crate::state::{PressureLaw, SpectralState};

/// Which set of unknowns the integrator advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    #[default]
    Sumdiff,
    Primitive,
}

/// Target unknown of an explicit Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    N1,
    W1,
    N2,
    W2,
}

/// `amplitude·(cos·cos(k·x) + sin·sin(k·x))` added to one unknown, `k = 2πm/L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub field: Slot,
    #[serde(default)]
    pub component: usize,
    pub mode: [i64; 3],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Initial perturbation recipe; the result is multiplied by `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Independent random fields with modes `1 ≤ max|mᵢ| ≤ max_mode`, each
    /// scaled so that its absolute Fourier sum (an `L∞` bound) equals one.
    BandLimited {
        seed: u64,
        #[serde(default = "default_max_mode")]
        max_mode: i64,
    },
    Modes { modes: Vec<ModeSpec> },
}

fn default_max_mode() -> i64 {
    2
}

fn default_stride() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub law: PressureLaw,
    pub epsilon: f64,
    pub initial: InitialData,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub snapshot_every: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub form: Form,
    /// With `false` the nonlinear sources are dropped (the field coupling of
    /// the primitive form is kept).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

impl SimConfig {
    /// Small random-data run on the `2π` box.
    pub fn band_limited(grid: GridSpec, epsilon: f64, seed: u64, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            law: PressureLaw::default(),
            epsilon,
            initial: InitialData::BandLimited {
                seed,
                max_mode: default_max_mode(),
            },
            dt,
            t_end,
            snapshot_every: default_stride(),
            dealias: true,
            form: Form::Sumdiff,
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        PressureLaw::new(self.law.gamma)?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("snapshot_every", self.snapshot_every)?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if let InitialData::BandLimited { max_mode, .. } = self.initial {
            if max_mode < 0 || max_mode >= self.grid.n as i64 / 2 {
                return Err(Error::InvalidArgument(format!(
                    "max_mode {max_mode} is not resolved by n = {}",
                    self.grid.n
                )));
            }
        }
        Ok(())
    }
}

/// Builds the initial sum/difference state of a configuration.
pub fn initial_state(config: &SimConfig) -> Result<SpectralState> {
    config.validate()?;
    let grid = config.grid;
    let eps = config.epsilon;
    let mut state = SpectralState::zeros(grid);
    match &config.initial {
        InitialData::BandLimited { seed, max_mode } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut draw = || {
                let f = random_band_limited(grid, *max_mode, &mut rng);
                let total: f64 = f.coeffs().iter().map(|c| c.norm()).sum();
                if total > 0.0 {
                    f.scaled(eps / total)
                } else {
                    f
                }
            };
            state.n1 = draw();
            for c in state.w1.comps_mut() {
                *c = draw();
            }
            state.n2 = draw();
            for c in state.w2.comps_mut() {
                *c = draw();
            }
        }
        InitialData::Modes { modes } => {
            for spec in modes {
                let target = match spec.field {
                    Slot::N1 | Slot::N2 if spec.component != 0 => None,
                    Slot::N1 => Some(&mut state.n1),
                    Slot::N2 => Some(&mut state.n2),
                    Slot::W1 => state.w1.comps_mut().get_mut(spec.component),
                    Slot::W2 => state.w2.comps_mut().get_mut(spec.component),
                }
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("component {} out of range", spec.component))
                })?;
                add_mode(target, spec, eps)?;
            }
        }
    }
    check_difference_mean(&state.n2)?;
    Ok(state)
}

fn add_mode(field: &mut SpectralField, spec: &ModeSpec, eps: f64) -> Result<()> {
    let grid = *field.grid();
    let half = grid.n as i64 / 2;
    let mut m = spec.mode;
    for (a, v) in m.iter_mut().enumerate() {
        if a >= grid.dim {
            if *v != 0 {
                return Err(Error::InvalidArgument(format!(
                    "mode {:?} has components beyond dimension {}",
                    spec.mode, grid.dim
                )));
            }
        } else if v.abs() >= half {
            return Err(Error::InvalidArgument(format!(
                "mode {:?} is not resolved by n = {}",
                spec.mode, grid.n
            )));
        }
    }
    let coeffs = field.coeffs_mut();
    if m.iter().all(|v| *v == 0) {
        coeffs[0] += Complex64::new(eps * spec.cos, 0.0);
        return Ok(());
    }
    let c = Complex64::new(spec.cos, -spec.sin) * (0.5 * eps);
    coeffs[grid.index_of_mode(m)] += c;
    coeffs[grid.index_of_mode([-m[0], -m[1], -m[2]])] += c.conj();
    Ok(())
}

/// Change of slots between `(n1, w1, n2, w2)` and `(ρ1 − 1, u1, ρ2 − 1, u2)`;
/// the map is its own inverse up to a factor two.
fn swap_slots(s: &SpectralState, scale: f64) -> Result<SpectralState> {
    Ok(SpectralState {
        n1: s.n1.add_scaled(&s.n2, 1.0)?.scaled(scale),
        w1: s.w1.add_scaled(&s.w2, 1.0)?.scaled(scale),
        n2: s.n1.add_scaled(&s.n2, -1.0)?.scaled(scale),
        w2: s.w1.add_scaled(&s.w2, -1.0)?.scaled(scale),
    })
}

pub fn primitive_to_sumdiff(slots: &SpectralState) -> Result<SpectralState> {
    swap_slots(slots, 1.0)
}

pub fn sumdiff_to_primitive(state: &SpectralState) -> Result<SpectralState> {
    swap_slots(state, 0.5)
}

/// One fixed-size Strang step, with precomputed half-step propagators.
pub struct Stepper {
    fourier: FourierBox,
    law: PressureLaw,
    dt: f64,
    dealias: bool,
    nonlinear: bool,
    form: Form,
    half: LinearPropagator,
}

impl Stepper {
    pub fn new(
        grid: GridSpec,
        law: PressureLaw,
        dt: f64,
        dealias: bool,
        nonlinear: bool,
        form: Form,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let fourier = FourierBox::new(grid)?;
        let half = LinearPropagator::new(&fourier, 0.5 * dt)?;
        Ok(Self {
            fourier,
            law,
            dt,
            dealias,
            nonlinear,
            form,
            half,
        })
    }

    pub fn from_config(config: &SimConfig, dt: f64) -> Result<Self> {
        Self::new(
            config.grid,
            config.law,
            dt,
            config.dealias,
            config.nonlinear,
            config.form,
        )
    }

    pub fn fourier(&self) -> &FourierBox {
        &self.fourier
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn form(&self) -> Form {
        self.form
    }

    /// Advances a sum/difference state by one step.
    pub fn step(&self, state: &SpectralState) -> Result<SpectralState> {
        match self.form {
            Form::Sumdiff => self.step_slots(state),
            Form::Primitive => {
                primitive_to_sumdiff(&self.step_slots(&sumdiff_to_primitive(state)?)?)
            }
        }
    }

    fn linear_half(&self, slots: &SpectralState) -> Result<SpectralState> {
        match self.form {
            Form::Sumdiff => self.half.apply(&self.fourier, slots),
            Form::Primitive => {
                let mut out = slots.clone();
                for (a, u) in [(&mut out.n1, &mut out.w1), (&mut out.n2, &mut out.w2)] {
                    self.half.apply_pair(&self.fourier, SymbolKind::EulerDamped, a, u);
                }
                Ok(out)
            }
        }
    }

    fn sources(&self, slots: &SpectralState) -> Result<SpectralState> {
        let eval = match self.form {
            Form::Sumdiff => nonlinear_rhs(&self.fourier, &self.law, slots, self.dealias)?,
            Form::Primitive => {
                primitive_rhs(&self.fourier, &self.law, slots, self.dealias, self.nonlinear)?
            }
        };
        if self.nonlinear {
            let limit = 0.5 * self.fourier.grid().spacing() / (1.0 + eval.max_speed);
            if self.dt > limit {
                return Err(Error::Cfl { dt: self.dt, limit });
            }
        }
        Ok(eval.terms)
    }

    /// Step in the native slots of the configured form.
    fn step_slots(&self, slots: &SpectralState) -> Result<SpectralState> {
        let mut s = self.linear_half(slots)?;
        if self.nonlinear || self.form == Form::Primitive {
            let k1 = self.sources(&s)?;
            let mid = s.add_scaled(&k1, 0.5 * self.dt)?;
            let k2 = self.sources(&mid)?;
            s = s.add_scaled(&k2, self.dt)?;
        }
        self.linear_half(&s)
    }
}

/// `L²` norms of `Λᵏ` applied to the unknowns, as used by `M(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormTable {
    pub values: [f64; 14],
}

impl NormTable {
    pub const COLUMNS: [&'static str; 14] = [
        "n1", "Dn1", "w1", "Dw1", "n2w2", "Dn2w2", "D2n1", "D2w1", "D2n2", "D2w2", "D3n1",
        "D3w1", "D3n2", "D3w2",
    ];

    pub fn of(fourier: &FourierBox, s: &SpectralState) -> Self {
        let n = |f: &SpectralField, k| fourier.lambda_norm(f, k);
        let w = |f, k| fourier.lambda_norm_vector(f, k);
        let pair = |k| n(&s.n2, k).hypot(w(&s.w2, k));
        Self {
            values: [
                n(&s.n1, 0),
                n(&s.n1, 1),
                w(&s.w1, 0),
                w(&s.w1, 1),
                pair(0),
                pair(1),
                n(&s.n1, 2),
                w(&s.w1, 2),
                n(&s.n2, 2),
                w(&s.w2, 2),
                n(&s.n1, 3),
                w(&s.w1, 3),
                n(&s.n2, 3),
                w(&s.w2, 3),
            ],
        }
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        Self::COLUMNS
            .iter()
            .position(|c| *c == column)
            .map(|i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: SpectralState,
    pub norms: NormTable,
}

/// Per-step bookkeeping of the conserved means.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepDiagnostics {
    pub steps: usize,
    pub dt: f64,
    /// Largest `|mean n2|` after any step.
    pub max_difference_mean: f64,
    /// Largest change of the means of `ρ1`, `ρ2` from their initial values.
    pub max_mean_drift: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: SimConfig,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: StepDiagnostics,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories hold the initial snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

fn species_means(s: &SpectralState) -> [f64; 2] {
    let n1 = s.n1.mean().re;
    let n2 = s.n2.mean().re;
    [1.0 + 0.5 * (n1 + n2), 1.0 + 0.5 * (n1 - n2)]
}

/// Runs a configuration from `t = 0` to `t_end`.
///
/// The step is `t_end / ⌈t_end/dt⌉` (never larger than `dt`); snapshots are
/// kept at `t = 0`, every `snapshot_every` and at `t_end`.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    let initial = initial_state(config)?;
    let steps = (config.t_end / config.dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { config.dt } else { config.t_end / steps as f64 };
    let stepper = Stepper::from_config(config, dt)?;
    let fourier = stepper.fourier();
    let stride = ((config.snapshot_every / dt).round() as usize).max(1);

    let native = |s: &SpectralState| match config.form {
        Form::Sumdiff => Ok(s.clone()),
        Form::Primitive => sumdiff_to_primitive(s),
    };
    let public = |s: &SpectralState| match config.form {
        Form::Sumdiff => Ok(s.clone()),
        Form::Primitive => primitive_to_sumdiff(s),
    };
    let snapshot = |t: f64, state: SpectralState| Snapshot {
        t,
        norms: NormTable::of(fourier, &state),
        state,
    };

    let means0 = species_means(&initial);
    let mut diagnostics = StepDiagnostics {
        steps,
        dt,
        ..Default::default()
    };
    let mut snapshots = vec![snapshot(0.0, initial.clone())];
    let mut slots = native(&initial)?;
    for k in 1..=steps {
        let t = k as f64 * dt;
        slots = stepper
            .step_slots(&slots)
            .and_then(|s| {
                if s.is_finite() {
                    Ok(s)
                } else {
                    Err(Error::Degenerate("non-finite state".into()))
                }
            })
            .map_err(|e| Error::Step {
                t,
                source: Box::new(e),
            })?;
        let current = public(&slots)?;
        diagnostics.max_difference_mean = diagnostics.max_difference_mean.max(current.n2.mean().norm());
        let means = species_means(&current);
        for i in 0..2 {
            diagnostics.max_mean_drift[i] =
                diagnostics.max_mean_drift[i].max((means[i] - means0[i]).abs());
        }
        if k % stride == 0 || k == steps {
            snapshots.push(snapshot(t, current));
        }
    }
    Ok(Trajectory {
        config: config.clone(),
        snapshots,
        diagnostics,
    })
}

/// Largest relative `L²` difference between snapshots taken at common times.
///
/// `other` may live on a finer grid; it is truncated to the grid of `base`.
pub fn trajectory_deviation(base: &Trajectory, other: &Trajectory) -> Result<TrajectoryDeviation> {
    let grid = base.config.grid;
    let mut out = TrajectoryDeviation::default();
    for snap in &base.snapshots {
        let Some(peer) = other
            .snapshots
            .iter()
            .find(|o| (o.t - snap.t).abs() <= 1e-9 * (1.0 + snap.t))
        else {
            continue;
        };
        let r = |f: &SpectralField| resample(f, grid);
        let rv = |v: &crate::spectral::SpectralVector| -> Result<crate::spectral::SpectralVector> {
            crate::spectral::SpectralVector::new(v.comps().iter().map(r).collect::<Result<_>>()?)
        };
        let peer_state = SpectralState {
            n1: r(&peer.state.n1)?,
            w1: rv(&peer.state.w1)?,
            n2: r(&peer.state.n2)?,
            w2: rv(&peer.state.w2)?,
        };
        let diff = snap.state.add_scaled(&peer_state, -1.0)?.l2_norm();
        let scale = snap.state.l2_norm();
        out.compared += 1;
        out.max_absolute = out.max_absolute.max(diff);
        out.max_relative = out.max_relative.max(if scale > 0.0 { diff / scale } else { diff });
    }
    if out.compared == 0 {
        return Err(Error::InvalidArgument("trajectories share no snapshot times".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TrajectoryDeviation {
    pub compared: usize,
    pub max_absolute: f64,
    pub max_relative: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::apply_linear_semigroup;
    use std::f64::consts::PI;

    fn config(dim: usize, n: usize, eps: f64) -> SimConfig {
        SimConfig::band_limited(GridSpec::new(n, 2.0 * PI, dim).unwrap(), eps, 7, 0.05, 0.5)
    }

    #[test]
    fn initial_data_is_band_limited_and_scaled() {
        let c = config(3, 16, 1e-3);
        let s = initial_state(&c).unwrap();
        let fb = FourierBox::new(c.grid).unwrap();
        let phys = s.to_physical(&fb).unwrap();
        assert!(phys.n1.max_abs() <= 1e-3 + 1e-15);
        assert!(phys.n1.max_abs() > 1e-5);
        assert!(s.n1.mean().norm() == 0.0 && s.n2.mean().norm() == 0.0);
        assert!(s.n1.hermitian_defect() < 1e-18);
    }

    #[test]
    fn initial_data_does_not_depend_on_resolution() {
        let coarse = initial_state(&config(3, 8, 1.0)).unwrap();
        let fine = initial_state(&config(3, 16, 1.0)).unwrap();
        let back = resample(&fine.w2.comps()[1], *coarse.grid()).unwrap();
        assert_eq!(back, coarse.w2.comps()[1]);
    }

    #[test]
    fn explicit_modes() {
        let g = GridSpec::new(8, 2.0 * PI, 1).unwrap();
        let mut c = SimConfig::band_limited(g, 0.5, 0, 0.1, 0.1);
        c.initial = InitialData::Modes {
            modes: vec![ModeSpec {
                field: Slot::W1,
                component: 0,
                mode: [2, 0, 0],
                cos: 0.0,
                sin: 1.0,
            }],
        };
        let s = initial_state(&c).unwrap();
        let fb = FourierBox::new(g).unwrap();
        let w = fb.inverse(&s.w1.comps()[0]).unwrap();
        for (i, v) in w.values().iter().enumerate() {
            let x = g.point(i)[0];
            assert!((v - 0.5 * (2.0 * x).sin()).abs() < 1e-15);
        }
        c.initial = InitialData::Modes {
            modes: vec![ModeSpec {
                field: Slot::N2,
                component: 0,
                mode: [0, 0, 0],
                cos: 1.0,
                sin: 0.0,
            }],
        };
        assert!(matches!(initial_state(&c), Err(Error::NonZeroMean { .. })));
    }

    #[test]
    fn zero_state_stays_zero() {
        let c = config(3, 8, 0.0);
        let traj = simulate(&c).unwrap();
        assert!(traj.snapshots.iter().all(|s| s.norms.values.iter().all(|v| *v == 0.0)));
        assert_eq!(traj.last().t, 0.5);
        assert_eq!(traj.snapshots.len(), 6);
    }

    #[test]
    fn linear_only_step_is_the_semigroup() {
        let c = config(3, 8, 1e-2);
        let s = initial_state(&c).unwrap();
        let stepper = Stepper::new(c.grid, c.law, 0.3, true, false, Form::Sumdiff).unwrap();
        let a = stepper.step(&s).unwrap();
        let b = apply_linear_semigroup(stepper.fourier(), &s, 0.3).unwrap();
        assert!(a.add_scaled(&b, -1.0).unwrap().l2_norm() < 1e-15 * s.l2_norm());
    }

    #[test]
    fn slot_maps_are_inverse() {
        let s = initial_state(&config(1, 16, 1.0)).unwrap();
        let back = primitive_to_sumdiff(&sumdiff_to_primitive(&s).unwrap()).unwrap();
        assert!(back.add_scaled(&s, -1.0).unwrap().l2_norm() < 1e-15 * s.l2_norm());
    }

    #[test]
    fn cfl_guard_fires() {
        let mut c = config(1, 64, 1e-2);
        c.dt = 0.2;
        c.t_end = 0.2;
        match simulate(&c) {
            Err(Error::Step { source, .. }) => assert!(matches!(*source, Error::Cfl { .. })),
            other => panic!("expected CFL failure, got {other:?}"),
        }
    }

    #[test]
    fn inadmissible_data_is_reported_with_time() {
        let mut c = config(1, 16, 1.5);
        c.initial = InitialData::Modes {
            modes: vec![ModeSpec {
                field: Slot::N1,
                component: 0,
                mode: [1, 0, 0],
                cos: 1.0,
                sin: 0.0,
            }],
        };
        c.dt = 0.01;
        c.t_end = 0.01;
        match simulate(&c) {
            Err(Error::Step { t, source }) => {
                assert_eq!(t, 0.01);
                assert!(matches!(*source, Error::Inadmissible { .. }));
            }
            other => panic!("expected inadmissible state, got {other:?}"),
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{"grid":{"n":8,"length":6.28},"epsilon":0.001,
            "initial":{"kind":"band_limited","seed":1},"dt":0.01,"t_end":0.1,"colour":1}"#;
        assert!(serde_json::from_str::<SimConfig>(text).is_err());
        let ok = text.replace(",\"colour\":1", "");
        let c: SimConfig = serde_json::from_str(&ok).unwrap();
        assert_eq!(c.grid.dim, 3);
        assert!(c.dealias && c.nonlinear);
        let bad_initial = ok.replace("\"seed\":1", "\"seed\":1,\"extra\":2");
        assert!(serde_json::from_str::<SimConfig>(&bad_initial).is_err());
    }
}
