//! Stages 2 and 3: alternating projections between K̂-sparse source vectors
//! and aperture vectors with the measured magnitudes.

mod cg;
mod pipeline;
mod projection;

pub use cg::{line_search, output_power, power_gradient, rotate, stage3_cg, CgResult, LineSearchSpec};
pub use pipeline::{run_pipeline, IterationRecord, PhaseEstimate, PipelineConfig};
pub use projection::{phase_update, prune_top_k, real_embed_manifold, stage2_project, Stage2Result};

use crate::lp_solver;
use crate::{Error, Result};

/// How Stage 2 turns the sparse projection into a new aperture estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseUpdate {
    /// `b₁† = b₀† ⊙ exp(−j∠(A s_proj))`.
    #[default]
    Accumulate,
    /// `b₁† = |b| ⊙ exp(−j∠(A s_proj))`.
    Replace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApConfig {
    /// Assumed number of sources K̂.
    pub k_hat: usize,
    /// Diagonal loading ν; `None` uses `1e-6·‖b₁†‖²/N`.
    pub nu: Option<f64>,
    pub n_cg: usize,
    pub n_ap: usize,
    pub line_search: LineSearchSpec,
    /// Stop when successive δ differ by less than this; `None` uses
    /// `1e-8·max intensity`.
    pub stop_tol: Option<f64>,
    pub phase_update: PhaseUpdate,
    pub lp_tol: f64,
    pub lp_max_iter: usize,
    /// ℓ1 weight on the Stage-2 coefficients; zero gives the plain minimax fit.
    pub stage2_l1_weight: f64,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            k_hat: 1,
            nu: None,
            n_cg: 20,
            n_ap: 50,
            line_search: LineSearchSpec::default(),
            stop_tol: None,
            phase_update: PhaseUpdate::default(),
            lp_tol: lp_solver::DEFAULT_TOL,
            lp_max_iter: lp_solver::DEFAULT_MAX_ITER,
            stage2_l1_weight: 0.0,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_hat == 0 {
            return Err(Error::invalid("k_hat must be at least 1"));
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::invalid(format!("nu must be positive, got {nu}")));
            }
        }
        if self.n_cg == 0 || self.n_ap == 0 {
            return Err(Error::invalid("n_cg and n_ap must be at least 1"));
        }
        if let Some(t) = self.stop_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("stop_tol must be positive, got {t}")));
            }
        }
        if !(self.lp_tol > 0.0) || self.lp_max_iter == 0 {
            return Err(Error::invalid("lp_tol must be positive and lp_max_iter at least 1"));
        }
        if !(self.stage2_l1_weight >= 0.0 && self.stage2_l1_weight.is_finite()) {
            return Err(Error::invalid("stage2_l1_weight must be finite and non-negative"));
        }
        self.line_search.validate()
    }
}
