//! Weighted running-maximum energy `M(t)` and the Nirenberg ratio.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{FourierBox, SpectralField};

use super::{NormTable, Trajectory};

/// Labels of the weighted terms, in the order stored in [`EnergyPoint::terms`].
pub const ENERGY_TERMS: [&str; 8] = [
    "n1", "Dn1", "w1", "Dw1", "n2w2", "Dn2w2", "D2all", "D3all",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyPoint {
    pub t: f64,
    /// Weighted terms at this sample.
    pub terms: [f64; 8],
    /// Their sum at this sample.
    pub value: f64,
    /// Running maximum of `value` up to this sample.
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyFunctional {
    pub history: Vec<EnergyPoint>,
}

impl EnergyFunctional {
    pub fn at_time(&self, t: f64) -> Option<&EnergyPoint> {
        self.history
            .iter()
            .find(|p| (p.t - t).abs() <= 1e-9 * (1.0 + t))
    }
}

fn weighted_terms(s: f64, norms: &NormTable) -> [f64; 8] {
    let v = &norms.values;
    let w = |p: f64| (1.0 + s).powf(p);
    let d2 = (v[6] * v[6] + v[7] * v[7] + v[8] * v[8] + v[9] * v[9]).sqrt();
    let d3 = (v[10] * v[10] + v[11] * v[11] + v[12] * v[12] + v[13] * v[13]).sqrt();
    [
        w(0.75) * v[0],
        w(1.25) * v[1],
        w(1.25) * v[2],
        w(1.75) * v[3],
        w(2.0) * v[4],
        w(1.875) * v[5],
        w(1.25) * d2,
        d3,
    ]
}

/// Evaluates `M(t)` on the recorded snapshots.
pub fn energy_m(trajectory: &Trajectory) -> Result<EnergyFunctional> {
    let mut m = 0.0_f64;
    let mut history = Vec::with_capacity(trajectory.snapshots.len());
    for snap in &trajectory.snapshots {
        if !snap.norms.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "norm table at t = {} has non-finite entries",
                snap.t
            )));
        }
        let terms = weighted_terms(snap.t, &snap.norms);
        let value: f64 = terms.iter().sum();
        m = m.max(value);
        history.push(EnergyPoint {
            t: snap.t,
            terms,
            value,
            m,
        });
    }
    Ok(EnergyFunctional { history })
}

/// `‖u‖∞ / (‖Λu‖^{1/2} ‖Λ²u‖^{1/2})` on the grid.
pub fn nirenberg_ratio(fourier: &FourierBox, field: &SpectralField) -> Result<f64> {
    let d1 = fourier.lambda_norm(field, 1);
    let d2 = fourier.lambda_norm(field, 2);
    let scale = fourier.lambda_norm(field, 0);
    if !(d1 > 1e-14 * scale && d1 > 0.0 && d2 > 0.0) {
        return Err(Error::Degenerate(
            "field has no nonconstant part".into(),
        ));
    }
    let sup = fourier.inverse(field)?.max_abs();
    Ok(sup / (d1.sqrt() * d2.sqrt()))
}
