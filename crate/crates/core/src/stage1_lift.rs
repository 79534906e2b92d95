//! Stage 1: the lifted linear program and its rank-one initialization.
//!
//! Each intensity `b_k² = |[A s]_k|²` is linear in the lifted unknown
//! `S = s sᴴ`: with `r_k` the k-th row of `A` (as a column),
//! `|r_kᵀ s|² = vec(r_k r_kᴴ)ᵀ vec(S)`. Dropping the rank-one requirement on
//! `S` gives a linear program in `vec(S)`. All `vec` operations here are
//! column-major: entry `(i, j)` of a `K × K` matrix sits at `i + j·K`.

use nalgebra::{DMatrix, DVector};

use crate::array_model::ManifoldMatrix;
use crate::lp_solver::{self, l1_augment, L1Augmented, LinearProgram, LpStatus};
use crate::phase::PolarVector;
use crate::{Error, Result, C64};

/// Relative asymmetry above which a matrix is not treated as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Column-major `vec` of a square matrix.
pub fn vec_col_major(s: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(s.as_slice())
}

/// `Â`: row `k` is `vec(f_k f_kᴴ)ᵀ`, `f_k` being row `k` of the manifold.
pub fn lift_rows(manifold: &ManifoldMatrix) -> DMatrix<C64> {
    let a = manifold.matrix();
    let (n, k) = a.shape();
    DMatrix::from_fn(n, k * k, |row, col| {
        let (i, j) = (col % k, col / k);
        a[(row, i)] * a[(row, j)].conj()
    })
}

/// Complex lifted operator with its real embedding.
#[derive(Debug, Clone)]
pub struct LiftedOperator {
    /// `N × K²`.
    pub a_hat: DMatrix<C64>,
    /// `2N × 2K²`, `[[Re Â, −Im Â], [Im Â, Re Â]]`.
    pub a_bar: DMatrix<f64>,
    /// `[b²; 0]`.
    pub b_bar: DVector<f64>,
}

impl LiftedOperator {
    /// Grid size `K`.
    pub fn directions(&self) -> usize {
        (self.a_hat.ncols() as f64).sqrt().round() as usize
    }
}

pub fn real_embed(a_hat: &DMatrix<C64>, intensities: &[f64]) -> Result<LiftedOperator> {
    let (n, kk) = a_hat.shape();
    if intensities.len() != n {
        return Err(Error::dims(format!(
            "{} intensities for a lifted operator with {n} rows",
            intensities.len()
        )));
    }
    let k = (kk as f64).sqrt().round() as usize;
    if k * k != kk {
        return Err(Error::dims(format!("lifted operator has {kk} columns, not a square")));
    }
    let a_bar = DMatrix::from_fn(2 * n, 2 * kk, |r, c| {
        let z = a_hat[(r % n, c % kk)];
        match (r < n, c < kk) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut b_bar = DVector::zeros(2 * n);
    b_bar.rows_mut(0, n).copy_from_slice(intensities);
    Ok(LiftedOperator {
        a_hat: a_hat.clone(),
        a_bar,
        b_bar,
    })
}

/// The (optionally ℓ1-regularized) stage-1 program over `[s̄; δ]`.
#[derive(Debug, Clone)]
pub struct Stage1Program {
    pub augmented: L1Augmented,
    directions: usize,
}

impl Stage1Program {
    pub fn lp(&self) -> &LinearProgram {
        &self.augmented.lp
    }

    /// Split a solution of the augmented program into `(s̄, δ)`.
    pub fn unpack(&self, x_aug: &DVector<f64>) -> (DVector<f64>, f64) {
        let x = self.augmented.recover(x_aug);
        let n = 2 * self.directions * self.directions;
        (x.rows(0, n).into_owned(), x[n])
    }
}

/// Minimize `δ` (plus `l1_weight·‖[s̄; δ]‖₁`) subject to
/// `|Ā s̄ − b̄| ≤ δ` elementwise and `δ ≥ 0`.
pub fn assemble_stage1_lp(op: &LiftedOperator, l1_weight: f64) -> Result<Stage1Program> {
    let (rows, cols) = op.a_bar.shape();
    if op.b_bar.len() != rows {
        return Err(Error::dims(format!(
            "b̄ has length {}, Ā has {rows} rows",
            op.b_bar.len()
        )));
    }
    let directions = op.directions();
    if 2 * directions * directions != cols {
        return Err(Error::dims(format!("Ā has {cols} columns, expected 2K²")));
    }
    let lp = LinearProgram::minimax_fit(&op.a_bar, &op.b_bar)?;
    let all: Vec<usize> = (0..=cols).collect();
    Ok(Stage1Program {
        augmented: l1_augment(&lp, l1_weight, &all)?,
        directions,
    })
}

/// `S` from `s̄ = [Re vec(S); Im vec(S)]`, replaced by `(S + Sᴴ)/2`.
pub fn recover_s(s_bar: &[f64], k: usize) -> Result<DMatrix<C64>> {
    let kk = k * k;
    if s_bar.len() != 2 * kk {
        return Err(Error::dims(format!(
            "s̄ has length {}, expected 2K² = {}",
            s_bar.len(),
            2 * kk
        )));
    }
    let s = DMatrix::from_fn(k, k, |i, j| {
        let idx = i + j * k;
        C64::new(s_bar[idx], s_bar[kk + idx])
    });
    Ok((&s + s.adjoint()) * C64::new(0.5, 0.0))
}

/// Rank-one factor `s_opt = sqrt(max(λ_max, 0))·v` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub s_opt: DVector<C64>,
    pub lambda_max: f64,
    /// Unit dominant eigenvector, largest-modulus entry real and positive.
    pub eigenvector: DVector<C64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Fixed start vector: `e₀` plus a small deterministic perturbation so the
/// start is not orthogonal to the dominant eigenvector.
fn start_vector(k: usize) -> DVector<C64> {
    let golden = 0.618_033_988_749_895;
    let mut v = DVector::from_fn(k, |i, _| {
        let a = ((i as f64 + 1.0) * golden).fract() - 0.5;
        let b = ((i as f64 + 1.0) * golden * golden).fract() - 0.5;
        C64::new(1e-3 * a, 1e-3 * b)
    });
    v[0] += C64::new(1.0, 0.0);
    v.normalize()
}

/// Power iteration on `S − shift·I`; returns `(v, vᴴSv, iterations, converged)`.
fn power_iterate(
    s: &DMatrix<C64>,
    shift: f64,
    iters: usize,
    tol: f64,
    scale: f64,
) -> (DVector<C64>, f64, usize, bool) {
    let shifted = s - DMatrix::<C64>::identity(s.nrows(), s.ncols()) * C64::new(shift, 0.0);
    let mut v = start_vector(s.nrows());
    for it in 1..=iters {
        let w = &shifted * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return (v, shift, it, true);
        }
        v = w / C64::new(norm, 0.0);
        let sv = &shifted * &v;
        let rayleigh = v.dotc(&sv).re;
        let resid = (&sv - &v * C64::new(rayleigh, 0.0)).norm();
        if resid <= tol * scale {
            return (v, rayleigh + shift, it, true);
        }
    }
    let rayleigh = v.dotc(&(s * &v)).re;
    (v, rayleigh, iters, false)
}

/// Dominant (largest algebraic) eigenpair of a Hermitian `S` by power
/// iteration. When the largest-magnitude eigenvalue is negative a second
/// pass on the shifted matrix `S − λ₁I` recovers the largest algebraic one.
pub fn rank_one_extract(s: &DMatrix<C64>, iters: usize, tol: f64) -> Result<RankOne> {
    let k = s.nrows();
    if s.ncols() != k || k == 0 {
        return Err(Error::dims(format!("S must be square and nonempty, got {:?}", s.shape())));
    }
    if iters == 0 {
        return Err(Error::invalid("power iteration needs at least one iteration"));
    }
    let scale = s.norm();
    if scale == 0.0 {
        return Ok(RankOne {
            s_opt: DVector::zeros(k),
            lambda_max: 0.0,
            eigenvector: start_vector(k),
            iterations: 0,
            converged: true,
        });
    }
    let asym = (s - s.adjoint()).norm() / scale;
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian(asym));
    }

    let (mut v, mut lambda, mut used, mut converged) = power_iterate(s, 0.0, iters, tol, scale);
    if lambda < 0.0 {
        let (v2, l2, used2, conv2) = power_iterate(s, lambda, iters, tol, scale);
        v = v2;
        lambda = l2;
        used += used2;
        converged = conv2;
    }

    // phase convention: largest-modulus entry real and positive
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let pivot = v[imax];
    if pivot.norm() > 0.0 {
        v *= pivot.conj() / C64::new(pivot.norm(), 0.0);
    }
    let amp = lambda.max(0.0).sqrt();
    Ok(RankOne {
        s_opt: &v * C64::new(amp, 0.0),
        lambda_max: lambda,
        eigenvector: v,
        iterations: used,
        converged,
    })
}

/// `b_est = A·s_opt` and `b₀† = |b| ⊙ exp(−j∠b_est)` (with `∠0 = 0`).
pub fn stage1_initialize(
    manifold: &ManifoldMatrix,
    s_opt: &DVector<C64>,
    magnitudes: &[f64],
) -> Result<(DVector<C64>, PolarVector)> {
    if magnitudes.len() != manifold.elements() {
        return Err(Error::dims(format!(
            "{} magnitudes for {} elements",
            magnitudes.len(),
            manifold.elements()
        )));
    }
    let b_est = manifold.apply(s_opt)?;
    let b0 = PolarVector::pinned_conj_phase(magnitudes, &b_est);
    Ok((b_est, b0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage1Config {
    pub l1_weight: f64,
    pub lp_tol: f64,
    pub lp_max_iter: usize,
    pub power_iters: usize,
    pub power_tol: f64,
}

impl Default for Stage1Config {
    fn default() -> Self {
        Self {
            l1_weight: 1.0,
            lp_tol: lp_solver::DEFAULT_TOL,
            lp_max_iter: lp_solver::DEFAULT_MAX_ITER,
            power_iters: 10_000,
            power_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiftedSolution {
    /// Relaxed `S`, Hermitian-symmetrized.
    pub s_matrix: DMatrix<C64>,
    pub delta: f64,
    pub s_opt: DVector<C64>,
    pub lambda_max: f64,
    pub b_est: DVector<C64>,
    pub b0_dagger: PolarVector,
    pub lp_status: LpStatus,
    pub lp_iterations: usize,
    /// `max_k |[Â vec(S)]_k − b_k²|` for the symmetrized `S`.
    pub lifted_residual: f64,
    /// `max_k |Im [Â vec(S)]_k|` for the symmetrized `S`.
    pub max_imag: f64,
    pub power_converged: bool,
}

/// Largest deviation of `Â vec(S)` from the intensities, and largest
/// imaginary part.
pub fn lifted_residuals(a_hat: &DMatrix<C64>, s: &DMatrix<C64>, intensities: &[f64]) -> (f64, f64) {
    let y = a_hat * vec_col_major(s);
    y.iter().zip(intensities).fold((0.0f64, 0.0f64), |(r, im), (z, b2)| {
        (r.max((z - C64::new(*b2, 0.0)).norm()), im.max(z.im.abs()))
    })
}

/// Build and solve the stage-1 program, then extract the rank-one seed.
pub fn solve_stage1(
    manifold: &ManifoldMatrix,
    intensities: &[f64],
    magnitudes: &[f64],
    cfg: &Stage1Config,
) -> Result<LiftedSolution> {
    let a_hat = lift_rows(manifold);
    let op = real_embed(&a_hat, intensities)?;
    let program = assemble_stage1_lp(&op, cfg.l1_weight)?;
    let sol = lp_solver::solve_lp(program.lp(), cfg.lp_tol, cfg.lp_max_iter)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver {
            stage: "stage 1 lifted program".into(),
            status: sol.status,
        });
    }
    let (s_bar, delta) = program.unpack(&sol.x);
    let k = manifold.directions();
    let s_matrix = recover_s(s_bar.as_slice(), k)?;
    let (lifted_residual, max_imag) = lifted_residuals(&a_hat, &s_matrix, intensities);
    let r1 = rank_one_extract(&s_matrix, cfg.power_iters, cfg.power_tol)?;
    let (b_est, b0_dagger) = stage1_initialize(manifold, &r1.s_opt, magnitudes)?;
    Ok(LiftedSolution {
        s_matrix,
        delta: delta.max(0.0),
        s_opt: r1.s_opt,
        lambda_max: r1.lambda_max,
        b_est,
        b0_dagger,
        lp_status: sol.status,
        lp_iterations: sol.iterations,
        lifted_residual,
        max_imag,
        power_converged: r1.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{build_grid, build_manifold, ApertureGeometry, AngleGrid};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn small_manifold() -> ManifoldMatrix {
        let geom = ApertureGeometry::rectangular(2, 2, 0.0037, 40e9).unwrap();
        let grid = build_grid(3, 3, (-0.6, 0.6), (-0.6, 0.6)).unwrap();
        build_manifold(&geom, &grid).unwrap()
    }

    #[test]
    fn lift_single_direction() {
        let geom = ApertureGeometry::new(vec![[0.0, 0.0]], 40e9).unwrap();
        let grid = AngleGrid::from_points(vec![[0.0, 0.0]]).unwrap();
        let a_hat = lift_rows(&build_manifold(&geom, &grid).unwrap());
        assert_eq!(a_hat.shape(), (1, 1));
        assert_eq!(a_hat[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn lift_real_row() {
        // f = [1, −1]: f fᴴ = [[1, −1], [−1, 1]]
        let lambda = crate::SPEED_OF_LIGHT / 40e9;
        let geom = ApertureGeometry::new(vec![[0.0, 0.0], [lambda / 2.0, 0.0]], 40e9).unwrap();
        let grid = AngleGrid::from_points(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let a_hat = lift_rows(&build_manifold(&geom, &grid).unwrap());
        let expected = [1.0, -1.0, -1.0, 1.0];
        for (j, e) in expected.iter().enumerate() {
            assert!((a_hat[(1, j)] - c(*e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn lifted_product_is_intensity() {
        let m = small_manifold();
        let a_hat = lift_rows(&m);
        let k = m.directions();
        for seed in 0..5 {
            let s = DVector::from_fn(k, |i, _| {
                let t = (seed * 31 + i * 7) as f64;
                c(t.sin(), (1.3 * t).cos())
            });
            let ss = &s * s.adjoint();
            let lifted = &a_hat * vec_col_major(&ss);
            let direct = m.apply(&s).unwrap();
            for (l, d) in lifted.iter().zip(direct.iter()) {
                assert!((l - c(d.norm_sqr(), 0.0)).norm() < 1e-9 * d.norm_sqr().max(1.0));
            }
        }
    }

    #[test]
    fn embedding_trivial_cases() {
        let op = real_embed(&DMatrix::from_element(1, 1, c(0.0, 1.0)), &[2.0]).unwrap();
        assert_eq!(op.a_bar, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert_eq!(op.b_bar.as_slice(), &[2.0, 0.0]);
        let op = real_embed(&DMatrix::from_element(1, 1, c(1.0, 0.0)), &[2.0]).unwrap();
        assert_eq!(op.a_bar, DMatrix::identity(2, 2));
        assert!(real_embed(&DMatrix::from_element(1, 1, c(1.0, 0.0)), &[1.0, 2.0]).is_err());
        assert!(real_embed(&DMatrix::from_element(1, 3, c(1.0, 0.0)), &[1.0]).is_err());
    }

    #[test]
    fn embedding_stacks_real_and_imaginary_parts() {
        let a_hat = DMatrix::from_fn(3, 4, |i, j| c((i + 2 * j) as f64 * 0.3 - 1.0, (i * j) as f64 * 0.2 - 0.5));
        let s_hat = DVector::from_fn(4, |i, _| c(0.7 * i as f64 - 1.0, 0.4 - 0.3 * i as f64));
        let op = real_embed(&a_hat, &[1.0, 2.0, 3.0]).unwrap();
        let s_bar = DVector::from_iterator(8, s_hat.iter().map(|z| z.re).chain(s_hat.iter().map(|z| z.im)));
        let stacked = &op.a_bar * s_bar;
        let direct = &a_hat * &s_hat;
        for i in 0..3 {
            assert!((stacked[i] - direct[i].re).abs() < 1e-12);
            assert!((stacked[3 + i] - direct[i].im).abs() < 1e-12);
        }
    }

    #[test]
    fn recover_s_cases() {
        assert_eq!(recover_s(&[1.0, 0.0], 1).unwrap(), DMatrix::from_element(1, 1, c(1.0, 0.0)));
        assert!(recover_s(&[1.0, 0.0, 0.0], 1).is_err());

        // S = [[2, j], [−j, 1]] column-major: [2, −j, j, 1]
        let s_bar = [2.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0];
        let s = recover_s(&s_bar, 2).unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]));
    }

    #[test]
    fn recover_s_inverts_vec_for_hermitian() {
        let b = DMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.1, (j as f64 - i as f64) * 0.2));
        let s = &b + b.adjoint();
        let v = vec_col_major(&s);
        let s_bar: Vec<f64> = v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect();
        assert_eq!(recover_s(&s_bar, 4).unwrap(), s);
    }

    #[test]
    fn rank_one_diagonal() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let r = rank_one_extract(&s, 1000, 1e-14).unwrap();
        assert!((r.lambda_max - 2.0).abs() < 1e-10);
        assert!((r.s_opt[0] - c(2f64.sqrt(), 0.0)).norm() < 1e-6);
        assert!(r.s_opt[1].norm() < 1e-6);
    }

    #[test]
    fn rank_one_recovers_outer_product() {
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]) / C64::new(2f64.sqrt(), 0.0);
        let s = &v * v.adjoint();
        let r = rank_one_extract(&s, 1000, 1e-14).unwrap();
        assert!((r.lambda_max - 1.0).abs() < 1e-10);
        let overlap = r.s_opt.dotc(&v).norm();
        assert!((overlap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rank_one_zero_and_negative() {
        let r = rank_one_extract(&DMatrix::zeros(3, 3), 10, 1e-12).unwrap();
        assert_eq!(r.s_opt, DVector::zeros(3));
        // dominant-magnitude eigenvalue is −5; the largest algebraic one is 1
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![c(-5.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)]));
        let r = rank_one_extract(&s, 5000, 1e-13).unwrap();
        assert!((r.lambda_max - 1.0).abs() < 1e-8);
        assert!((r.s_opt[1].norm() - 1.0).abs() < 1e-6);
        // all eigenvalues negative: no rank-one content
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![c(-1.0, 0.0), c(-2.0, 0.0)]));
        let r = rank_one_extract(&s, 5000, 1e-13).unwrap();
        assert!(r.lambda_max < 0.0);
        assert_eq!(r.s_opt.norm(), 0.0);
    }

    #[test]
    fn rank_one_rejects_non_hermitian() {
        let s = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(rank_one_extract(&s, 10, 1e-12), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rank_one_phase_convention() {
        let v = DVector::from_vec(vec![c(0.1, 0.2), c(-0.6, 0.7), c(0.1, 0.0)]).normalize();
        let s = &v * v.adjoint() * c(3.0, 0.0);
        let r = rank_one_extract(&s, 1000, 1e-14).unwrap();
        assert!(r.eigenvector[1].im.abs() < 1e-12 && r.eigenvector[1].re > 0.0);
    }

    #[test]
    fn initialize_from_single_direction() {
        let m = small_manifold();
        let k = m.directions();
        let mut e0 = DVector::zeros(k);
        e0[0] = c(1.0, 0.0);
        let ones = vec![1.0; m.elements()];
        let (b_est, b0) = stage1_initialize(&m, &e0, &ones).unwrap();
        let a0 = m.matrix().column(0);
        for i in 0..m.elements() {
            assert!((b_est[i] - a0[i]).norm() < 1e-15);
        }
        let expected = a0.map(|z| z.conj());
        assert!((b0.to_complex() - expected).norm() < 1e-12);
        assert_eq!(b0.magnitude, ones);

        let mags = vec![0.5, 1.0, 2.0, 3.0];
        let (_, b0) = stage1_initialize(&m, &DVector::zeros(k), &mags).unwrap();
        assert_eq!(b0.magnitude, mags);
        assert!(b0.phase.iter().all(|&p| p == 0.0));
        assert!(stage1_initialize(&m, &DVector::zeros(k), &[1.0]).is_err());
    }

    #[test]
    fn single_element_program_is_exact() {
        let geom = ApertureGeometry::new(vec![[0.0, 0.0]], 40e9).unwrap();
        let grid = AngleGrid::from_points(vec![[0.0, 0.0]]).unwrap();
        let m = build_manifold(&geom, &grid).unwrap();
        for w in [0.0, 1.0] {
            let op = real_embed(&lift_rows(&m), &[4.0]).unwrap();
            let prog = assemble_stage1_lp(&op, w).unwrap();
            let sol = lp_solver::solve_lp(prog.lp(), 1e-9, 100).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            let (s_bar, delta) = prog.unpack(&sol.x);
            // with unit ℓ1 weight, δ costs 2 per unit while S costs 1:
            // the exact fit S = 4, δ = 0 is still optimal
            assert!(delta <= 1e-6, "weight {w}: δ = {delta}");
            assert!((s_bar[0] - 4.0).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_intensities_give_zero() {
        let m = small_manifold();
        let sol = solve_stage1(&m, &[0.0; 4], &[0.0; 4], &Stage1Config::default()).unwrap();
        assert!(sol.delta < 1e-7);
        assert!(sol.s_matrix.norm() < 1e-6);
        assert!(sol.b0_dagger.magnitude.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stage1_is_never_infeasible() {
        let m = small_manifold();
        for (w, b2) in [(0.0, [1.0, 7.0, 0.1, 3.0]), (1.0, [9.0, 0.0, 2.0, 2.0]), (0.3, [5.0, 5.0, 5.0, 5.0])] {
            let mags: Vec<f64> = b2.iter().map(|x: &f64| x.sqrt()).collect();
            let cfg = Stage1Config { l1_weight: w, ..Default::default() };
            let sol = solve_stage1(&m, &b2, &mags, &cfg).unwrap();
            assert_eq!(sol.lp_status, LpStatus::Optimal);
            assert!(sol.delta >= 0.0);
            // δ bounds the relaxed residual, real and imaginary
            assert!(sol.lifted_residual <= sol.delta * 2f64.sqrt() + 1e-6);
            assert_eq!(sol.b0_dagger.magnitude, mags);
            assert!(sol.max_imag <= sol.delta + 1e-6);
        }
    }
}
