use std::time::Instant;

use nalgebra::DVector;

use crate::array_model::ManifoldMatrix;
use crate::phase::{angle, PolarVector};
use crate::scene_sim::Measurements;
use crate::stage1_lift::{solve_stage1, LiftedSolution, Stage1Config};
use crate::{Error, Result, C64};

use super::{phase_update, stage2_project, stage3_cg, ApConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineConfig {
    pub stage1: Stage1Config,
    pub ap: ApConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub delta: f64,
    /// `P(w)` at the end of the Stage-3 run.
    pub power: f64,
    pub cg_iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct PhaseEstimate {
    /// `|b| ⊙ exp(−j∠w)`.
    pub b_final: PolarVector,
    pub delta_trace: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
    /// Absent for all-zero measurements.
    pub stage1: Option<LiftedSolution>,
    /// Last K̂-sparse projection.
    pub s_proj: DVector<C64>,
}

fn tagged(err: Error, iter: usize) -> Error {
    err.in_stage(&format!("outer iteration {iter}"))
}

/// Stage 1 on `manifold_s1`, then `n_ap` rounds of Stage 2 and Stage 3 on
/// `manifold_s2`.
pub fn run_pipeline(
    manifold_s1: &ManifoldMatrix,
    manifold_s2: &ManifoldMatrix,
    measurements: &Measurements,
    config: &PipelineConfig,
) -> Result<PhaseEstimate> {
    let ap = &config.ap;
    ap.validate()?;
    let n = measurements.len();
    if manifold_s1.elements() != n || manifold_s2.elements() != n {
        return Err(Error::dims(format!(
            "{n} measurements for manifolds with {} and {} elements",
            manifold_s1.elements(),
            manifold_s2.elements()
        )));
    }
    if measurements.magnitude.len() != n {
        return Err(Error::dims("intensity and magnitude lengths differ"));
    }
    let mags = &measurements.magnitude;
    let k2 = manifold_s2.directions();

    if measurements.intensity.iter().all(|&b2| b2 == 0.0) {
        return Ok(PhaseEstimate {
            b_final: PolarVector::new(mags.clone(), vec![0.0; n]),
            delta_trace: vec![0.0],
            records: vec![IterationRecord {
                iter: 0,
                delta: 0.0,
                power: 0.0,
                cg_iterations: 0,
                wall_time_s: 0.0,
            }],
            converged: true,
            iterations: 0,
            stage1: None,
            s_proj: DVector::zeros(k2),
        });
    }

    let stage1 = solve_stage1(manifold_s1, &measurements.intensity, mags, &config.stage1)?;
    let max_intensity = measurements.intensity.iter().cloned().fold(0.0, f64::max);
    let stop_tol = ap.stop_tol.unwrap_or(1e-8 * max_intensity);

    let mut b_est = stage1.b_est.clone();
    let mut b0 = stage1.b0_dagger.clone();
    let mut delta_trace = Vec::with_capacity(ap.n_ap);
    let mut records = Vec::with_capacity(ap.n_ap);
    let mut converged = false;
    let mut s_proj = DVector::zeros(k2);
    let mut w_phase = vec![0.0; n];

    for iter in 0..ap.n_ap {
        let start = Instant::now();
        let proj = stage2_project(manifold_s2, &b_est, ap.k_hat, ap.lp_tol, ap.lp_max_iter, ap.stage2_l1_weight)
            .map_err(|e| tagged(e, iter))?;
        let b1 = phase_update(&b0, manifold_s2, &proj.s_proj, ap.phase_update).map_err(|e| tagged(e, iter))?;
        let cg = stage3_cg(&b1, &proj.s_proj, manifold_s2, ap).map_err(|e| tagged(e, iter))?;

        w_phase = cg.w.iter().map(|z| angle(*z)).collect();
        b0 = PolarVector::new(mags.clone(), w_phase.iter().map(|p| -p).collect());
        b_est = b0.to_complex();
        s_proj = proj.s_proj;

        delta_trace.push(proj.delta);
        records.push(IterationRecord {
            iter,
            delta: proj.delta,
            power: *cg.power_trace.last().expect("power trace starts with P(w0)"),
            cg_iterations: cg.iterations,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        if iter > 0 && (delta_trace[iter] - delta_trace[iter - 1]).abs() < stop_tol {
            converged = true;
            break;
        }
    }

    let iterations = records.len();
    Ok(PhaseEstimate {
        b_final: PolarVector::new(mags.clone(), w_phase.iter().map(|p| -p).collect()),
        delta_trace,
        records,
        converged,
        iterations,
        stage1: Some(stage1),
        s_proj,
    })
}
