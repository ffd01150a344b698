use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use bipolar_ep::decay::{
    rate_report_with, Component, RadialProfile, ReportWindow,
};
use bipolar_ep::oracle::{verify_symbols, OdeOracleConfig, VerifyOptions};
use bipolar_ep::propagators::SymbolKind;
use bipolar_ep::solver::{
    energy_m, simulate, Form, InitialData, NormTable, SimConfig, Trajectory,
};
use bipolar_ep::spectral::GridSpec;
use bipolar_ep::state::PressureLaw;
use bipolar_ep::Error;

use crate::manifest::{io_failure, num, Failure, RunManifest};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest accepted relative deviation between the two forms.
pub const FORM_TOLERANCE: f64 = 1e-6;

fn numerical(e: Error) -> Failure {
    Failure::Numerical(e.to_string())
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

pub struct VerifyArgs {
    pub samples: usize,
    pub times: Vec<f64>,
    pub oracle_dt: f64,
    pub flip_sign: bool,
}

pub fn verify_symbols_cmd(args: &VerifyArgs, manifest: &mut RunManifest) -> Result<bool, Failure> {
    manifest.config = json!({
        "samples": args.samples,
        "times": args.times,
        "oracle_dt": args.oracle_dt,
        "inject_sign_flip": args.flip_sign,
    });
    manifest.prepare()?;
    let options = VerifyOptions {
        samples: args.samples,
        times: args.times.clone(),
        oracle: OdeOracleConfig { dt: args.oracle_dt },
        flip_poisson_sign: args.flip_sign,
        ..Default::default()
    };
    if !(args.oracle_dt > 0.0) {
        return Err(Failure::Usage(format!("oracle dt must be positive, got {}", args.oracle_dt)));
    }
    let report = verify_symbols(&options).map_err(usage)?;
    for c in &report.checks {
        println!(
            "{:<5} {:<14} {:<13} n={:<5} max={:.3e} tol={:.0e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.kind.label(),
            c.name,
            c.comparisons,
            c.max_error,
            c.tolerance
        );
    }
    let pass = report.pass();
    manifest.write_json("symbols.json", &json!({ "pass": pass, "report": report }))?;
    Ok(pass)
}

pub struct DecayArgs {
    pub kind: SymbolKind,
    pub k: u32,
    pub amplitude: f64,
    pub sigma: f64,
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub samples: Option<usize>,
}

pub fn linear_decay_cmd(args: &DecayArgs, manifest: &mut RunManifest) -> Result<bool, Failure> {
    let defaults = ReportWindow::default_for(args.kind);
    let window = ReportWindow {
        t_lo: args.t_lo.unwrap_or(defaults.t_lo),
        t_hi: args.t_hi.unwrap_or(defaults.t_hi),
        samples: args.samples.unwrap_or(defaults.samples),
    };
    manifest.config = json!({
        "kind": args.kind.label(),
        "k": args.k,
        "amplitude": args.amplitude,
        "sigma": args.sigma,
        "t_lo": window.t_lo,
        "t_hi": window.t_hi,
        "samples": window.samples,
    });
    manifest.prepare()?;
    if args.k > 1 {
        return Err(Failure::Usage(format!("--k must be 0 or 1, got {}", args.k)));
    }
    if window.samples < 5 {
        return Err(Failure::Usage("a fit needs at least 5 samples".into()));
    }
    let profile = RadialProfile::gaussian(args.amplitude, args.sigma).map_err(usage)?;
    let report = rate_report_with(args.kind, args.k, profile, window).map_err(|e| match e {
        Error::InvalidArgument(_) => usage(e),
        other => numerical(other),
    })?;
    for c in [Component::N, Component::W] {
        let mut csv = String::from("t,norm,component,k\n");
        for row in report.samples.iter().filter(|r| r.component == c.label()) {
            csv.push_str(&format!("{},{},{},{}\n", num(row.t), num(row.norm), row.component, row.k));
        }
        manifest.write(&format!("decay_{}.csv", c.label()), &csv)?;
    }
    for row in &report.rows {
        println!(
            "{:<5} {:<14} k={} {:<5} predicted={:+.4} fitted={:+.4} tol={}",
            if row.pass { "PASS" } else { "FAIL" },
            args.kind.label(),
            args.k,
            row.component,
            row.predicted,
            row.fit.slope,
            row.tolerance
        );
    }
    let pass = report.pass();
    manifest.write_json("fits.json", &json!({ "pass": pass, "report": report }))?;
    Ok(pass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormChoice {
    #[default]
    Sumdiff,
    Primitive,
    Both,
}

fn default_stride() -> f64 {
    0.1
}

fn yes() -> bool {
    true
}

/// On-disk simulation configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub grid: GridSpec,
    #[serde(default)]
    pub law: PressureLaw,
    pub epsilon: f64,
    pub initial: InitialData,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub snapshot_every: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default)]
    pub form: FormChoice,
}

impl RunConfig {
    fn sim(&self, form: Form) -> SimConfig {
        SimConfig {
            grid: self.grid,
            law: self.law,
            epsilon: self.epsilon,
            initial: self.initial.clone(),
            dt: self.dt,
            t_end: self.t_end,
            snapshot_every: self.snapshot_every,
            dealias: self.dealias,
            form,
            nonlinear: self.nonlinear,
        }
    }
}

pub fn load_config(path: &Path, manifest: &mut RunManifest) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    manifest.config = serde_json::from_str::<Value>(&text).unwrap_or(Value::String(text.clone()));
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(Failure::Usage(format!(
            "unsupported schema_version {}, expected {SCHEMA_VERSION}",
            config.schema_version
        )));
    }
    if let InitialData::BandLimited { seed, .. } = config.initial {
        manifest.seed = Some(seed);
    }
    config.sim(Form::Sumdiff).validate().map_err(usage)?;
    Ok(config)
}

fn snapshot_deviation(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>, Failure> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Failure::Numerical("forms recorded different snapshot times".into()));
    }
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            let diff = x.state.add_scaled(&y.state, -1.0).map_err(numerical)?.l2_norm();
            let scale = x.state.l2_norm();
            Ok(if scale > 0.0 { diff / scale } else { diff })
        })
        .collect()
}

fn trajectory_csv(traj: &Trajectory, deviation: Option<&[f64]>) -> Result<String, Failure> {
    let energy = energy_m(traj).map_err(numerical)?;
    let mut csv = String::from("t");
    for c in NormTable::COLUMNS {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push_str(",M");
    if deviation.is_some() {
        csv.push_str(",form_deviation");
    }
    csv.push('\n');
    for (i, (snap, e)) in traj.snapshots.iter().zip(&energy.history).enumerate() {
        csv.push_str(&num(snap.t));
        for v in snap.norms.values {
            csv.push(',');
            csv.push_str(&num(v));
        }
        csv.push(',');
        csv.push_str(&num(e.m));
        if let Some(d) = deviation {
            csv.push(',');
            csv.push_str(&num(d[i]));
        }
        csv.push('\n');
    }
    Ok(csv)
}

fn summary(traj: &Trajectory) -> Result<Value, Failure> {
    let energy = energy_m(traj).map_err(numerical)?;
    let first = energy.history.first().map(|p| p.m).unwrap_or(0.0);
    let last = energy.history.last().map(|p| p.m).unwrap_or(0.0);
    Ok(json!({
        "form": traj.config.form,
        "snapshots": traj.snapshots.len(),
        "diagnostics": traj.diagnostics,
        "m_initial": first,
        "m_final": last,
    }))
}

pub fn simulate_cmd(
    config_path: &Path,
    form_override: Option<FormChoice>,
    manifest: &mut RunManifest,
) -> Result<bool, Failure> {
    manifest.prepare()?;
    let config = load_config(config_path, manifest)?;
    let choice = form_override.unwrap_or(config.form);
    let run = |form| simulate(&config.sim(form)).map_err(numerical);
    match choice {
        FormChoice::Sumdiff | FormChoice::Primitive => {
            let form = if choice == FormChoice::Sumdiff { Form::Sumdiff } else { Form::Primitive };
            let traj = run(form)?;
            manifest.write("trajectory.csv", &trajectory_csv(&traj, None)?)?;
            manifest.write_json("summary.json", &json!({ "runs": [summary(&traj)?] }))?;
            Ok(true)
        }
        FormChoice::Both => {
            let a = run(Form::Sumdiff)?;
            let b = run(Form::Primitive)?;
            let deviation = snapshot_deviation(&a, &b)?;
            let max = deviation.iter().copied().fold(0.0, f64::max);
            let pass = max <= FORM_TOLERANCE;
            println!(
                "{:<5} form equivalence: max relative deviation {max:.3e} (tolerance {FORM_TOLERANCE:.0e})",
                if pass { "PASS" } else { "FAIL" }
            );
            manifest.write("trajectory.csv", &trajectory_csv(&a, Some(&deviation))?)?;
            manifest.write("trajectory_primitive.csv", &trajectory_csv(&b, None)?)?;
            manifest.write_json(
                "summary.json",
                &json!({
                    "runs": [summary(&a)?, summary(&b)?],
                    "form_deviation_max": max,
                    "form_tolerance": FORM_TOLERANCE,
                    "pass": pass,
                }),
            )?;
            Ok(pass)
        }
    }
}
