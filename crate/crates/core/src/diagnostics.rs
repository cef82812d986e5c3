//! Conservation diagnostics: per-step series of the quantities the
//! integrators are judged on, plus drift summaries.
//!
//! Diagnostics are pure observers; computing them never alters a
//! trajectory.

use nalgebra::{Matrix3, Vector3};

use crate::baseline::RawState;
use crate::integrator::Trajectory;
use crate::rigid_body::kinetic_energy;
use crate::so3::validate_rotation;

/// Per-step diagnostic series. All arrays share one length equal to the
/// number of retained trajectory samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSeries {
    /// Time (s).
    pub time: Vec<f64>,
    /// Rotational kinetic energy (J).
    pub kinetic_energy: Vec<f64>,
    /// `|Pi|`, conserved exactly by the variational update under zero
    /// torque.
    pub body_momentum_norm: Vec<f64>,
    /// Spatial angular momentum `R * Pi`.
    pub spatial_momentum: Vec<Vector3<f64>>,
    /// `||R^T R - I||_F`.
    pub ortho_defect: Vec<f64>,
    /// `|det R - 1|`.
    pub det_defect: Vec<f64>,
    /// Newton iteration counts; present only for variational runs.
    pub newton_iterations: Option<Vec<u32>>,
}

fn series_from_states<'a>(
    states: impl Iterator<Item = (f64, &'a Matrix3<f64>, Vector3<f64>)>,
    j: &Matrix3<f64>,
) -> DiagnosticsSeries {
    let lu = j.lu();
    let mut out = DiagnosticsSeries {
        time: Vec::new(),
        kinetic_energy: Vec::new(),
        body_momentum_norm: Vec::new(),
        spatial_momentum: Vec::new(),
        ortho_defect: Vec::new(),
        det_defect: Vec::new(),
        newton_iterations: None,
    };
    for (t, r, pi) in states {
        let omega = lu.solve(&pi).expect("inertia tensor must be invertible");
        let check = validate_rotation(r, 1.0);
        out.time.push(t);
        out.kinetic_energy.push(kinetic_energy(j, omega));
        out.body_momentum_norm.push(pi.norm());
        out.spatial_momentum.push(r * pi);
        out.ortho_defect.push(check.ortho_defect);
        out.det_defect.push((check.det - 1.0).abs());
    }
    out
}

/// Diagnostics for a variational trajectory (includes Newton statistics).
pub fn compute_diagnostics(trajectory: &Trajectory, j: &Matrix3<f64>) -> DiagnosticsSeries {
    let mut series = series_from_states(
        trajectory
            .records
            .iter()
            .map(|rec| (rec.state.t, rec.state.r.matrix(), rec.state.pi)),
        j,
    );
    series.newton_iterations = Some(
        trajectory
            .records
            .iter()
            .map(|rec| rec.newton_iterations)
            .collect(),
    );
    series
}

/// Diagnostics for a reference-integrator run.
pub fn compute_diagnostics_raw(states: &[RawState], j: &Matrix3<f64>) -> DiagnosticsSeries {
    series_from_states(states.iter().map(|s| (s.t, &s.r, s.pi)), j)
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn max_ortho_defect(&self) -> f64 {
        self.ortho_defect.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_det_defect(&self) -> f64 {
        self.det_defect.iter().copied().fold(0.0, f64::max)
    }

    /// `max_k |E_k - E_0| / |E_0|`, or the absolute drift when `E_0 = 0`
    /// (a body at rest).
    pub fn max_energy_drift_rel(&self) -> f64 {
        let e0 = self.kinetic_energy[0];
        let worst = self
            .kinetic_energy
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max);
        if e0 != 0.0 {
            worst / e0.abs()
        } else {
            worst
        }
    }

    /// `max_k | |Pi_k| - |Pi_0| | / |Pi_0|`, absolute when starting at rest.
    pub fn max_body_momentum_drift_rel(&self) -> f64 {
        let p0 = self.body_momentum_norm[0];
        let worst = self
            .body_momentum_norm
            .iter()
            .map(|p| (p - p0).abs())
            .fold(0.0, f64::max);
        if p0 != 0.0 {
            worst / p0
        } else {
            worst
        }
    }

    /// `max_k ||R_k Pi_k - R_0 Pi_0|| / |Pi_0|`, absolute when starting at
    /// rest.
    pub fn max_spatial_momentum_drift_rel(&self) -> f64 {
        let s0 = self.spatial_momentum[0];
        let p0 = self.body_momentum_norm[0];
        let worst = self
            .spatial_momentum
            .iter()
            .map(|s| (s - s0).norm())
            .fold(0.0, f64::max);
        if p0 != 0.0 {
            worst / p0
        } else {
            worst
        }
    }

    /// Least-squares slope of `E_k` against time (J/s).
    pub fn energy_trend_slope(&self) -> f64 {
        let n = self.len() as f64;
        let t_mean = self.time.iter().sum::<f64>() / n;
        let e_mean = self.kinetic_energy.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (t, e) in self.time.iter().zip(&self.kinetic_energy) {
            num += (t - t_mean) * (e - e_mean);
            den += (t - t_mean) * (t - t_mean);
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Peak-to-peak spread of the energy series (J).
    pub fn energy_range(&self) -> f64 {
        let max = self.kinetic_energy.iter().copied().fold(f64::MIN, f64::max);
        let min = self.kinetic_energy.iter().copied().fold(f64::MAX, f64::min);
        max - min
    }

    pub fn max_newton_iterations(&self) -> Option<u32> {
        self.newton_iterations
            .as_ref()
            .map(|v| v.iter().copied().max().unwrap_or(0))
    }
}
