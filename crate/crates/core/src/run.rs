//! Batch runs behind the CLI: simulate, compare, and one-shot solve, plus
//! the CSV and summary serialization they share.
//!
//! Floating-point values are written in Rust's shortest round-trip decimal
//! form, so parsing a CSV cell back with `str::parse::<f64>` recovers the
//! exact bits that were computed; two runs of the same configuration
//! produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::baseline::{rk4_propagate, RawState};
use crate::config::{ConfigError, ResolvedConfig};
use crate::diagnostics::{compute_diagnostics, compute_diagnostics_raw, DiagnosticsSeries};
use crate::integrator::{propagate_decimated, IntegratorError, Trajectory};
use crate::rigid_body::{AttitudeState, InertiaPair};
use crate::solver::{newton_solve, SolveResult, SolverError, SolverOptions};

/// Trajectory CSV header, fixed column order.
pub const TRAJECTORY_CSV_HEADER: &str = "step,t,r11,r12,r13,r21,r22,r23,r31,r32,r33,\
     pi_x,pi_y,pi_z,energy,ortho_defect,det_defect,spm_x,spm_y,spm_z,\
     newton_iters,newton_residual";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("solver: {message}")]
    Solver { message: String },
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    /// Process exit code for this failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver { .. } => 3,
            RunError::Io(_) => 4,
        }
    }

    /// Single-line machine-parseable category tag.
    pub fn category(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Solver { .. } => "solver",
            RunError::Io(_) => "io",
        }
    }
}

impl From<IntegratorError> for RunError {
    fn from(e: IntegratorError) -> Self {
        match e {
            IntegratorError::StepFailed { step, source } => RunError::Solver {
                message: format!("step {step}: {source}"),
            },
            other => RunError::Config(ConfigError::Invalid {
                message: other.to_string(),
            }),
        }
    }
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        RunError::Solver {
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FinalStateSummary {
    pub t: f64,
    pub r: [[f64; 3]; 3],
    pub pi: [f64; 3],
    pub kinetic_energy: f64,
}

#[derive(Debug, Serialize)]
pub struct ConservationSummary {
    pub max_ortho_defect: f64,
    pub max_det_defect: f64,
    pub max_energy_drift_rel: f64,
    pub max_body_momentum_drift_rel: f64,
    pub max_spatial_momentum_drift_rel: f64,
}

#[derive(Debug, Serialize)]
pub struct NewtonSummary {
    pub max_iterations: u32,
    pub total_iterations: u64,
    pub max_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub status: &'static str,
    pub steps: u64,
    pub h: f64,
    pub rows_written: usize,
    pub final_state: FinalStateSummary,
    pub conservation: ConservationSummary,
    pub newton: NewtonSummary,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub status: &'static str,
    pub steps: u64,
    pub h: f64,
    pub variational: ConservationSummary,
    pub rk4: ConservationSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk4_projected: Option<ConservationSummary>,
    /// Baseline-to-variational drift ratios; `None` where the variational
    /// drift is exactly zero.
    pub ratios: CompareRatios,
}

#[derive(Debug, Serialize)]
pub struct CompareRatios {
    pub ortho_defect: Option<f64>,
    pub spatial_momentum_drift: Option<f64>,
    pub energy_drift: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub status: &'static str,
    pub w: [f64; 3],
    pub f: [[f64; 3]; 3],
    pub iterations: u32,
    pub residual_norm: f64,
}

fn mat_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

fn conservation_summary(diag: &DiagnosticsSeries) -> ConservationSummary {
    ConservationSummary {
        max_ortho_defect: diag.max_ortho_defect(),
        max_det_defect: diag.max_det_defect(),
        max_energy_drift_rel: diag.max_energy_drift_rel(),
        max_body_momentum_drift_rel: diag.max_body_momentum_drift_rel(),
        max_spatial_momentum_drift_rel: diag.max_spatial_momentum_drift_rel(),
    }
}

fn ratio(baseline: f64, variational: f64) -> Option<f64> {
    if variational > 0.0 {
        Some(baseline / variational)
    } else {
        None
    }
}

/// Writes the trajectory CSV (one row per retained step).
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    traj: &Trajectory,
    diag: &DiagnosticsSeries,
) -> io::Result<usize> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for (i, rec) in traj.records.iter().enumerate() {
        let r = rec.state.r.matrix();
        write!(out, "{},{}", traj.step_index(i), rec.state.t)?;
        for row in 0..3 {
            for col in 0..3 {
                write!(out, ",{}", r[(row, col)])?;
            }
        }
        let pi = rec.state.pi;
        let spm = diag.spatial_momentum[i];
        writeln!(
            out,
            ",{},{},{},{},{},{},{},{},{},{},{}",
            pi.x,
            pi.y,
            pi.z,
            diag.kinetic_energy[i],
            diag.ortho_defect[i],
            diag.det_defect[i],
            spm.x,
            spm.y,
            spm.z,
            rec.newton_iterations,
            rec.newton_residual
        )?;
    }
    Ok(traj.records.len())
}

/// Runs the variational integrator per the configuration and writes the
/// trajectory CSV to `out_path`. Returns the run summary.
pub fn run_simulate(cfg: &ResolvedConfig, out_path: &Path) -> Result<SimulateSummary, RunError> {
    let initial = AttitudeState::new(cfg.r0, cfg.pi0, 0.0);
    let traj = propagate_decimated(
        &initial,
        &cfg.schedule,
        cfg.h,
        cfg.steps,
        &cfg.inertia,
        &cfg.solver,
        cfg.decimation,
    )?;
    let diag = compute_diagnostics(&traj, cfg.inertia.j());

    let file = File::create(out_path)?;
    let mut writer = BufWriter::new(file);
    let rows = write_trajectory_csv(&mut writer, &traj, &diag)?;
    writer.flush()?;

    let last = traj.final_state();
    let newton = NewtonSummary {
        max_iterations: traj
            .records
            .iter()
            .map(|r| r.newton_iterations)
            .max()
            .unwrap_or(0),
        total_iterations: traj
            .records
            .iter()
            .map(|r| u64::from(r.newton_iterations))
            .sum(),
        max_residual: traj
            .records
            .iter()
            .map(|r| r.newton_residual)
            .fold(0.0, f64::max),
    };
    Ok(SimulateSummary {
        status: "ok",
        steps: cfg.steps,
        h: cfg.h,
        rows_written: rows,
        final_state: FinalStateSummary {
            t: last.t,
            r: mat_rows(last.r.matrix()),
            pi: [last.pi.x, last.pi.y, last.pi.z],
            kinetic_energy: diag.kinetic_energy[diag.len() - 1],
        },
        conservation: conservation_summary(&diag),
        newton,
    })
}

fn write_compare_csv<W: Write>(
    mut out: W,
    traj: &Trajectory,
    var: &DiagnosticsSeries,
    rk4: &DiagnosticsSeries,
    projected: Option<&DiagnosticsSeries>,
) -> io::Result<()> {
    const GROUP: [&str; 7] = [
        "energy",
        "pi_norm",
        "spm_x",
        "spm_y",
        "spm_z",
        "ortho_defect",
        "det_defect",
    ];
    write!(out, "step,t")?;
    for col in GROUP {
        write!(out, ",var_{col}")?;
    }
    write!(out, ",var_newton_iters")?;
    for col in GROUP {
        write!(out, ",rk4_{col}")?;
    }
    if projected.is_some() {
        for col in GROUP {
            write!(out, ",proj_{col}")?;
        }
    }
    writeln!(out)?;

    let group_cells = |out: &mut W, d: &DiagnosticsSeries, i: usize| -> io::Result<()> {
        let spm = d.spatial_momentum[i];
        write!(
            out,
            ",{},{},{},{},{},{},{}",
            d.kinetic_energy[i],
            d.body_momentum_norm[i],
            spm.x,
            spm.y,
            spm.z,
            d.ortho_defect[i],
            d.det_defect[i]
        )
    };

    for i in 0..var.len() {
        write!(out, "{},{}", traj.step_index(i), var.time[i])?;
        group_cells(&mut out, var, i)?;
        write!(out, ",{}", traj.records[i].newton_iterations)?;
        group_cells(&mut out, rk4, i)?;
        if let Some(p) = projected {
            group_cells(&mut out, p, i)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Runs the variational integrator and the RK4 baseline from identical
/// initial conditions, writes a joined diagnostics CSV, and summarizes the
/// drift comparison. With `project` set, a third, polar-projected RK4
/// series is included.
pub fn run_compare(
    cfg: &ResolvedConfig,
    out_path: &Path,
    project: bool,
) -> Result<CompareSummary, RunError> {
    let initial = AttitudeState::new(cfg.r0, cfg.pi0, 0.0);
    let traj = propagate_decimated(
        &initial,
        &cfg.schedule,
        cfg.h,
        cfg.steps,
        &cfg.inertia,
        &cfg.solver,
        cfg.decimation,
    )?;
    let var_diag = compute_diagnostics(&traj, cfg.inertia.j());

    let rk4_states = rk4_propagate(
        cfg.r0.matrix(),
        cfg.pi0,
        &cfg.schedule,
        cfg.h,
        cfg.steps,
        cfg.inertia.j(),
        false,
    )?;
    let subsample = |states: &[RawState]| -> Vec<RawState> {
        (0..traj.len())
            .map(|i| states[traj.step_index(i) as usize])
            .collect()
    };
    let rk4_diag = compute_diagnostics_raw(&subsample(&rk4_states), cfg.inertia.j());

    let proj_diag = if project {
        let states = rk4_propagate(
            cfg.r0.matrix(),
            cfg.pi0,
            &cfg.schedule,
            cfg.h,
            cfg.steps,
            cfg.inertia.j(),
            true,
        )?;
        Some(compute_diagnostics_raw(&subsample(&states), cfg.inertia.j()))
    } else {
        None
    };

    let file = File::create(out_path)?;
    let mut writer = BufWriter::new(file);
    write_compare_csv(&mut writer, &traj, &var_diag, &rk4_diag, proj_diag.as_ref())?;
    writer.flush()?;

    let var = conservation_summary(&var_diag);
    let rk4 = conservation_summary(&rk4_diag);
    let ratios = CompareRatios {
        ortho_defect: ratio(rk4.max_ortho_defect, var.max_ortho_defect),
        spatial_momentum_drift: ratio(
            rk4.max_spatial_momentum_drift_rel,
            var.max_spatial_momentum_drift_rel,
        ),
        energy_drift: ratio(rk4.max_energy_drift_rel, var.max_energy_drift_rel),
    };
    Ok(CompareSummary {
        status: "ok",
        steps: cfg.steps,
        h: cfg.h,
        variational: var,
        rk4,
        rk4_projected: proj_diag.as_ref().map(conservation_summary),
        ratios,
    })
}

/// Solves a single implicit step equation and summarizes the result.
pub fn run_solve(
    inertia: &InertiaPair,
    h: f64,
    pi: Vector3<f64>,
    opts: &SolverOptions,
) -> Result<SolveSummary, RunError> {
    let SolveResult {
        w,
        rotation,
        iterations,
        residual_norm,
    } = newton_solve(inertia.jd(), h, pi, opts)?;
    Ok(SolveSummary {
        status: "ok",
        w: [w.x, w.y, w.z],
        f: mat_rows(rotation.matrix()),
        iterations,
        residual_norm,
    })
}
