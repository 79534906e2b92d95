use nalgebra::{DMatrix, DVector};

use crate::array_model::ManifoldMatrix;
use crate::lp_solver::{self, l1_augment, LinearProgram, LpStatus};
use crate::phase::{angle, wrap, PolarVector};
use crate::{Error, Result, C64};

use super::PhaseUpdate;

/// `[[Re A, −Im A], [Im A, Re A]]`.
pub fn real_embed_manifold(a: &DMatrix<C64>) -> DMatrix<f64> {
    let (n, k) = a.shape();
    DMatrix::from_fn(2 * n, 2 * k, |r, c| {
        let z = a[(r % n, c % k)];
        match (r < n, c < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Zero all but the `k_hat` entries of largest modulus, in place. Equal
/// moduli keep the lower index.
pub fn prune_top_k(s: &mut DVector<C64>, k_hat: usize) {
    if k_hat >= s.len() {
        return;
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].norm().total_cmp(&s[i].norm()).then(i.cmp(&j)));
    for &i in &order[k_hat..] {
        s[i] = C64::new(0.0, 0.0);
    }
}

#[derive(Debug, Clone)]
pub struct Stage2Result {
    pub s_proj: DVector<C64>,
    /// Unpruned LP solution.
    pub s_full: DVector<C64>,
    /// Minimax residual bound, zero when below the solver's resolution.
    pub delta: f64,
    pub lp_iterations: usize,
}

/// `δ` values this small are indistinguishable from an exact fit.
pub(crate) fn snap_delta(delta: f64, lp_tol: f64, rhs_scale: f64) -> f64 {
    if delta <= lp_tol * (1.0 + rhs_scale) {
        0.0
    } else {
        delta
    }
}

/// Minimax fit of `b_est` over the manifold, then K̂-sparse pruning.
pub fn stage2_project(
    manifold: &ManifoldMatrix,
    b_est: &DVector<C64>,
    k_hat: usize,
    lp_tol: f64,
    lp_max_iter: usize,
    l1_weight: f64,
) -> Result<Stage2Result> {
    let n = manifold.elements();
    if b_est.len() != n {
        return Err(Error::dims(format!("b_est has length {}, aperture has {n} elements", b_est.len())));
    }
    if k_hat == 0 {
        return Err(Error::invalid("k_hat must be at least 1"));
    }
    let k = manifold.directions();
    let a_tilde = real_embed_manifold(manifold.matrix());
    let b_tilde = DVector::from_iterator(2 * n, b_est.iter().map(|z| z.re).chain(b_est.iter().map(|z| z.im)));
    let lp = LinearProgram::minimax_fit(&a_tilde, &b_tilde)?;
    let coeffs: Vec<usize> = (0..2 * k).collect();
    let program = l1_augment(&lp, l1_weight, &coeffs)?;
    let sol = lp_solver::solve_lp(&program.lp, lp_tol, lp_max_iter)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver {
            stage: "stage 2 projection".into(),
            status: sol.status,
        });
    }
    let x = program.recover(&sol.x);
    let s_full = DVector::from_fn(k, |i, _| C64::new(x[i], x[k + i]));
    let mut s_proj = s_full.clone();
    prune_top_k(&mut s_proj, k_hat);
    Ok(Stage2Result {
        s_proj,
        s_full,
        delta: snap_delta(x[2 * k], lp_tol, b_tilde.amax()),
        lp_iterations: sol.iterations,
    })
}

/// New aperture estimate from the sparse projection. The magnitudes are
/// carried over from `b_prev` untouched.
pub fn phase_update(
    b_prev: &PolarVector,
    manifold: &ManifoldMatrix,
    s_proj: &DVector<C64>,
    mode: PhaseUpdate,
) -> Result<PolarVector> {
    if b_prev.len() != manifold.elements() {
        return Err(Error::dims(format!(
            "estimate has length {}, aperture has {} elements",
            b_prev.len(),
            manifold.elements()
        )));
    }
    let y = manifold.apply(s_proj)?;
    let phase = match mode {
        PhaseUpdate::Replace => y.iter().map(|z| -angle(*z)).collect(),
        PhaseUpdate::Accumulate => b_prev
            .phase
            .iter()
            .zip(y.iter())
            .map(|(p, z)| {
                let a = angle(*z);
                if a == 0.0 {
                    *p
                } else {
                    wrap(p - a)
                }
            })
            .collect(),
    };
    Ok(PolarVector::new(b_prev.magnitude.clone(), phase))
}
