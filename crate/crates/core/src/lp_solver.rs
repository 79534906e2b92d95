//! Dense primal-dual interior point solver for inequality-form linear
//! programs
//!
//! ```text
//! minimize    cᵀx
//! subject to  G x ≤ h
//!             x_i ≥ l_i   (l_i = -∞ marks a free variable)
//! ```
//!
//! The method is Mehrotra's predictor-corrector with an infeasible start.
//! Each Newton system is reduced to normal equations on the constraint
//! dimension `m`, `(G H⁻¹ Gᵀ + Z Λ⁻¹) Δλ = r`, which is what makes the short,
//! very wide lifted programs tractable: the per-iteration cost is
//! `O(m²n + m³)`.
//!
//! Free variables carry a small proximal term `ρ/2‖x_F − x_F^k‖²` centred on
//! the current iterate. It keeps `H` invertible without splitting the
//! variable, and on programs whose optimal face is unbounded it holds the
//! free part of the solution near its starting point.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Proximal weight on free variables, relative to the problem scale.
const FREE_PROXIMAL: f64 = 1e-8;
/// Fraction of the distance to the boundary taken by each step.
const STEP_DAMPING: f64 = 0.995;
/// Iterate growth, relative to the data scale, beyond which a divergence
/// certificate is examined.
const DIVERGENCE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: DVector<f64>,
    /// `m × n` constraint matrix.
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    /// Per-variable lower bound, `f64::NEG_INFINITY` for free variables.
    pub lower: Vec<f64>,
}

impl LinearProgram {
    pub fn new(c: DVector<f64>, g: DMatrix<f64>, h: DVector<f64>, lower: Vec<f64>) -> Result<Self> {
        let lp = Self { c, g, h, lower };
        lp.validate()?;
        Ok(lp)
    }

    /// All variables free.
    pub fn free(c: DVector<f64>, g: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        let n = c.len();
        Self::new(c, g, h, vec![f64::NEG_INFINITY; n])
    }

    /// Minimax fit over `[x; δ]`: minimize `δ` subject to
    /// `A x − δ ≤ b`, `−A x − δ ≤ −b`, `δ ≥ 0`, `x` free.
    pub fn minimax_fit(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        let (rows, cols) = a.shape();
        if b.len() != rows {
            return Err(Error::dims(format!("minimax fit: A is {rows}x{cols}, b has {}", b.len())));
        }
        let n = cols + 1;
        let mut g = DMatrix::zeros(2 * rows, n);
        g.view_mut((0, 0), (rows, cols)).copy_from(a);
        g.view_mut((rows, 0), (rows, cols)).copy_from(&(-a));
        g.column_mut(cols).fill(-1.0);
        let mut h = DVector::zeros(2 * rows);
        h.rows_mut(0, rows).copy_from(b);
        h.rows_mut(rows, rows).copy_from(&(-b));
        let mut c = DVector::zeros(n);
        c[cols] = 1.0;
        let mut lower = vec![f64::NEG_INFINITY; n];
        lower[cols] = 0.0;
        Self::new(c, g, h, lower)
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.g.shape();
        if self.c.len() != n || self.h.len() != m || self.lower.len() != n {
            return Err(Error::dims(format!(
                "LP with G {m}x{n}, c {}, h {}, bounds {}",
                self.c.len(),
                self.h.len(),
                self.lower.len()
            )));
        }
        let finite = self.c.iter().chain(self.g.iter()).chain(self.h.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("LP data must be finite"));
        }
        if self.lower.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::invalid("lower bounds must be finite or -inf"));
        }
        Ok(())
    }

    /// Largest violation of `G x ≤ h` and of the bounds.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let gx = &self.g * x;
        let rows = gx
            .iter()
            .zip(self.h.iter())
            .map(|(a, b)| a - b)
            .fold(0.0f64, f64::max);
        let bounds = x
            .iter()
            .zip(&self.lower)
            .map(|(xi, li)| li - xi)
            .fold(0.0f64, f64::max);
        rows.max(bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

/// Relative residuals at the returned point. `primal` is the violation of
/// `Gx ≤ h` and of the bounds by `x` itself, independent of the slacks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// One row of the per-iteration diagnostics table.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
    /// Pivots of the normal matrix dropped as numerically dependent.
    pub dropped_pivots: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Multipliers of `G x ≤ h`.
    pub duals: DVector<f64>,
    pub status: LpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    pub log: Vec<IterationLog>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Residual table as CSV text.
    pub fn log_csv(&self) -> String {
        let mut out = String::from(
            "iteration,primal_objective,dual_objective,primal_residual,dual_residual,mu,step_primal,step_dual,dropped_pivots\n",
        );
        for r in &self.log {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{},{},{}\n",
                r.iteration,
                r.primal_objective,
                r.dual_objective,
                r.primal_residual,
                r.dual_residual,
                r.mu,
                r.step_primal,
                r.step_dual,
                r.dropped_pivots
            ));
        }
        out
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Longest step `α ≤ 1` keeping `v + α·dv ≥ 0`.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter().zip(dv.iter()).fold(1.0f64, |alpha, (&vi, &di)| {
        if di < 0.0 {
            alpha.min(-vi / di)
        } else {
            alpha
        }
    })
}

struct Direction {
    dx: DVector<f64>,
    dz: DVector<f64>,
    dlam: DVector<f64>,
    dt: DVector<f64>,
    dsig: DVector<f64>,
}

struct Solver<'a> {
    lp: &'a LinearProgram,
    gt: DMatrix<f64>,
    bounded: Vec<usize>,
    lb: DVector<f64>,
    rho: f64,
}

struct Iterate {
    x: DVector<f64>,
    z: DVector<f64>,
    lam: DVector<f64>,
    t: DVector<f64>,
    sig: DVector<f64>,
}

/// Pivots below this fraction of the largest diagonal entry are dropped.
const PIVOT_DROP: f64 = 1e-14;
const REFINEMENT_STEPS: usize = 3;

/// Cholesky factor of a positive semidefinite matrix in which numerically
/// dependent rows are dropped: their solution components are zero.
struct ModifiedCholesky {
    l: DMatrix<f64>,
    dropped: Vec<bool>,
}

impl ModifiedCholesky {
    fn new(a: &DMatrix<f64>) -> Option<Self> {
        let m = a.nrows();
        let mut l = a.lower_triangle();
        let mut dropped = vec![false; m];
        for j in 0..m {
            let mut d = l[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !d.is_finite() {
                return None;
            }
            // dependence is judged against the row's own scale, since the
            // diagonal spans many decades near the end of a solve
            if d <= PIVOT_DROP * a[(j, j)].max(f64::MIN_POSITIVE) {
                dropped[j] = true;
                for i in j..m {
                    l[(i, j)] = 0.0;
                }
                continue;
            }
            let pivot = d.sqrt();
            l[(j, j)] = pivot;
            for i in (j + 1)..m {
                let mut v = l[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / pivot;
            }
        }
        Some(Self { l, dropped })
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let m = b.len();
        let mut y = b.clone();
        for i in 0..m {
            if self.dropped[i] {
                y[i] = 0.0;
                continue;
            }
            let mut v = y[i];
            for k in 0..i {
                v -= self.l[(i, k)] * y[k];
            }
            y[i] = v / self.l[(i, i)];
        }
        for i in (0..m).rev() {
            if self.dropped[i] {
                y[i] = 0.0;
                continue;
            }
            let mut v = y[i];
            for k in (i + 1)..m {
                v -= self.l[(k, i)] * y[k];
            }
            y[i] = v / self.l[(i, i)];
        }
        y
    }

    fn num_dropped(&self) -> usize {
        self.dropped.iter().filter(|d| **d).count()
    }
}

struct Factor {
    chol: ModifiedCholesky,
    hinv: DVector<f64>,
}


impl Solver<'_> {
    fn bounded_part(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.bounded.len(), self.bounded.iter().map(|&i| x[i]))
    }

    /// Largest violation of `Gx ≤ h` or `x_B ≥ l_B`.
    fn infeasibility(&self, x: &DVector<f64>) -> f64 {
        let gx = &self.lp.g * x;
        let rows = gx.iter().zip(self.lp.h.iter()).map(|(a, b)| a - b);
        let bounds = self.bounded.iter().zip(self.lb.iter()).map(|(&i, l)| l - x[i]);
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// `c + Gᵀλ − E_B σ`.
    fn dual_residual(&self, it: &Iterate) -> DVector<f64> {
        let mut rd = &self.gt * &it.lam + &self.lp.c;
        for (k, &i) in self.bounded.iter().enumerate() {
            rd[i] -= it.sig[k];
        }
        rd
    }

    fn factor(&self, it: &Iterate) -> Result<Factor> {
        let (m, n) = self.lp.g.shape();
        let mut hinv = DVector::from_element(n, 1.0 / self.rho);
        for (k, &i) in self.bounded.iter().enumerate() {
            hinv[i] = it.t[k] / it.sig[k];
        }
        let mut scaled = self.lp.g.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= hinv[j];
        }
        let mut normal = &scaled * &self.gt;
        for i in 0..m {
            normal[(i, i)] += it.z[i] / it.lam[i];
        }
        // symmetrize away round-off from the product
        let normal = (&normal + normal.transpose()) * 0.5;
        let chol = ModifiedCholesky::new(&normal)
            .ok_or_else(|| Error::invalid("normal equations could not be factored"))?;
        Ok(Factor { chol, hinv })
    }

    /// Solve the reduced Newton system for complementarity targets
    /// `r_zl` (for `z∘λ`) and `r_ts` (for `t∘σ`).
    fn direction(
        &self,
        it: &Iterate,
        f: &Factor,
        rp: &DVector<f64>,
        rd: &DVector<f64>,
        r_zl: &DVector<f64>,
        r_ts: &DVector<f64>,
    ) -> Direction {
        let mut q = -rd;
        for (k, &i) in self.bounded.iter().enumerate() {
            q[i] += r_ts[k] / it.t[k];
        }
        let hq = q.component_mul(&f.hinv);
        let rhs = &self.lp.g * &hq + r_zl.component_div(&it.lam) - rp;
        let mut dlam = f.chol.solve(&rhs);
        let step = |dlam: &DVector<f64>| {
            let dx = (&q - &self.gt * dlam).component_mul(&f.hinv);
            let dz = (r_zl - it.z.component_mul(dlam)).component_div(&it.lam);
            (dx, dz)
        };
        let (mut dx, mut dz) = step(&dlam);
        // refine against the primal equation G dx + dz = r_p, evaluated in
        // the original space rather than through the formed normal matrix
        let mut defect = rp - &self.lp.g * &dx - &dz;
        for _ in 0..REFINEMENT_STEPS {
            let before = inf_norm(&defect);
            if before <= f64::EPSILON * (1.0 + inf_norm(rp)) {
                break;
            }
            let trial = &dlam - f.chol.solve(&defect);
            let (tx, tz) = step(&trial);
            let after = rp - &self.lp.g * &tx - &tz;
            if !(inf_norm(&after) < before) {
                break;
            }
            dlam = trial;
            dx = tx;
            dz = tz;
            defect = after;
        }
        let dt = self.bounded_part(&dx);
        let dsig = (r_ts - it.sig.component_mul(&dt)).component_div(&it.t);
        Direction {
            dx,
            dz,
            dlam,
            dt,
            dsig,
        }
    }

    fn step_lengths(it: &Iterate, d: &Direction) -> (f64, f64) {
        let ap = max_step(&it.z, &d.dz).min(max_step(&it.t, &d.dt));
        let ad = max_step(&it.lam, &d.dlam).min(max_step(&it.sig, &d.dsig));
        (ap, ad)
    }

    /// Farkas certificate for `{Gx ≤ h, x_B ≥ l_B}` being empty: a dual ray
    /// with `Gᵀλ = E_B σ`, `hᵀλ − l_Bᵀσ < 0`.
    fn infeasibility_certificate(&self, it: &Iterate) -> bool {
        let scale = it.lam.iter().chain(it.sig.iter()).fold(0.0f64, |a, b| a.max(*b));
        if scale < DIVERGENCE * (1.0 + inf_norm(&self.lp.c)) {
            return false;
        }
        let lam = &it.lam / scale;
        let sig = &it.sig / scale;
        let mut ray = &self.gt * &lam;
        for (k, &i) in self.bounded.iter().enumerate() {
            ray[i] -= sig[k];
        }
        let gscale = self.lp.g.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let value = self.lp.h.dot(&lam) - self.lb.dot(&sig);
        inf_norm(&ray) <= 1e-6 * gscale && value < -1e-6 * (1.0 + inf_norm(&self.lp.h))
    }

    /// A primal ray `d` with `G d ≤ 0`, `d_B ≥ 0`, `cᵀd < 0`.
    fn unboundedness_certificate(&self, it: &Iterate) -> bool {
        let scale = inf_norm(&it.x);
        if scale < DIVERGENCE * (1.0 + inf_norm(&self.lp.h)) {
            return false;
        }
        let d = &it.x / scale;
        let gscale = self.lp.g.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let gd = &self.lp.g * &d;
        let rows_ok = gd.iter().all(|&v| v <= 1e-6 * gscale);
        let bounds_ok = self.bounded.iter().all(|&i| d[i] >= -1e-6);
        rows_ok && bounds_ok && self.lp.c.dot(&d) < -1e-6 * (1.0 + inf_norm(&self.lp.c))
    }
}

/// Solve `lp` to relative tolerance `tol`.
///
/// Convergence requires the relative primal residual
/// `‖h − Gx − z‖∞/(1+‖h‖∞)`, the relative dual residual
/// `‖c + Gᵀλ − σ‖∞/(1+‖c‖∞)` and the relative duality gap
/// `|cᵀx − d(λ,σ)|/(1+|cᵀx|)` all to fall below `tol`. Failure to converge is
/// reported through [`LpStatus`], never as an `Err`; `Err` is reserved for
/// malformed input.
pub fn solve_lp(lp: &LinearProgram, tol: f64, max_iter: usize) -> Result<LpSolution> {
    lp.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (m, n) = lp.g.shape();
    let bounded: Vec<usize> = (0..n).filter(|&i| lp.lower[i].is_finite()).collect();
    let nb = bounded.len();
    let lb = DVector::from_iterator(nb, bounded.iter().map(|&i| lp.lower[i]));
    let h_norm = inf_norm(&lp.h);
    let c_norm = inf_norm(&lp.c);
    let g_norm = lp.g.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let solver = Solver {
        lp,
        gt: lp.g.transpose(),
        bounded,
        lb,
        rho: FREE_PROXIMAL * (1.0 + c_norm).max(g_norm * g_norm),
    };

    if m == 0 {
        return Ok(solve_unconstrained(lp));
    }

    // infeasible start: bounded variables one unit inside their bound,
    // free variables at zero, slacks positive
    let mut x = DVector::zeros(n);
    for &i in &solver.bounded {
        x[i] = lp.lower[i] + 1.0;
    }
    let gx = &lp.g * &x;
    let z = DVector::from_iterator(m, (0..m).map(|i| (lp.h[i] - gx[i]).max(1.0)));
    let mut it = Iterate {
        x,
        z,
        lam: DVector::from_element(m, 1.0),
        t: DVector::from_element(nb, 1.0),
        sig: DVector::from_element(nb, 1.0),
    };

    let mut log = Vec::new();
    let mut stalled = 0usize;
    let pairs = (m + nb) as f64;

    for iteration in 0..=max_iter {
        let rp = &lp.h - &lp.g * &it.x - &it.z;
        let rd = solver.dual_residual(&it);
        let pobj = lp.c.dot(&it.x);
        let dobj = -lp.h.dot(&it.lam) + solver.lb.dot(&it.sig);
        let mu = (it.z.dot(&it.lam) + it.t.dot(&it.sig)) / pairs;
        let res = Residuals {
            primal: solver.infeasibility(&it.x) / (1.0 + h_norm),
            dual: inf_norm(&rd) / (1.0 + c_norm),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        };

        let finish = |status: LpStatus, it: &Iterate, log: Vec<IterationLog>| LpSolution {
            x: it.x.clone(),
            objective: pobj,
            dual_objective: dobj,
            duals: it.lam.clone(),
            status,
            iterations: iteration,
            residuals: res,
            log,
        };

        if res.primal <= tol && res.dual <= tol && res.gap <= tol {
            return Ok(finish(LpStatus::Optimal, &it, log));
        }
        if solver.infeasibility_certificate(&it) {
            return Ok(finish(LpStatus::Infeasible, &it, log));
        }
        if solver.unboundedness_certificate(&it) {
            return Ok(finish(LpStatus::Unbounded, &it, log));
        }
        if iteration == max_iter || stalled >= 5 {
            return Ok(finish(LpStatus::MaxIterations, &it, log));
        }

        let f = solver.factor(&it)?;

        // predictor
        let r_zl = -it.z.component_mul(&it.lam);
        let r_ts = -it.t.component_mul(&it.sig);
        let aff = solver.direction(&it, &f, &rp, &rd, &r_zl, &r_ts);
        let (ap, ad) = Solver::step_lengths(&it, &aff);
        let mu_aff = ((&it.z + &aff.dz * ap).dot(&(&it.lam + &aff.dlam * ad))
            + (&it.t + &aff.dt * ap).dot(&(&it.sig + &aff.dsig * ad)))
            / pairs;
        let centering = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let target = centering * mu;
        let r_zl = DVector::from_iterator(
            m,
            (0..m).map(|i| target - it.z[i] * it.lam[i] - aff.dz[i] * aff.dlam[i]),
        );
        let r_ts = DVector::from_iterator(
            nb,
            (0..nb).map(|k| target - it.t[k] * it.sig[k] - aff.dt[k] * aff.dsig[k]),
        );
        let dir = solver.direction(&it, &f, &rp, &rd, &r_zl, &r_ts);
        let (ap, ad) = Solver::step_lengths(&it, &dir);
        let ap = (STEP_DAMPING * ap).min(1.0);
        let ad = (STEP_DAMPING * ad).min(1.0);

        it.x += &dir.dx * ap;
        it.z += &dir.dz * ap;
        it.t += &dir.dt * ap;
        it.lam += &dir.dlam * ad;
        it.sig += &dir.dsig * ad;
        // keep strictly interior against round-off
        for v in it.z.iter_mut().chain(it.t.iter_mut()).chain(it.lam.iter_mut()).chain(it.sig.iter_mut()) {
            *v = v.max(f64::MIN_POSITIVE);
        }

        stalled = if ap < 1e-10 && ad < 1e-10 { stalled + 1 } else { 0 };

        log.push(IterationLog {
            iteration,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual: res.primal,
            dual_residual: res.dual,
            mu,
            step_primal: ap,
            step_dual: ad,
            dropped_pivots: f.chol.num_dropped(),
        });
    }
    unreachable!("loop returns on its last iteration")
}

/// `m = 0`: each variable sits at its bound or the program is unbounded.
fn solve_unconstrained(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();
    let mut x = DVector::zeros(n);
    let mut status = LpStatus::Optimal;
    for i in 0..n {
        let c = lp.c[i];
        if c == 0.0 {
            x[i] = if lp.lower[i].is_finite() { lp.lower[i].max(0.0) } else { 0.0 };
        } else if c > 0.0 && lp.lower[i].is_finite() {
            x[i] = lp.lower[i];
        } else {
            status = LpStatus::Unbounded;
        }
    }
    let objective = lp.c.dot(&x);
    LpSolution {
        x,
        objective,
        dual_objective: objective,
        duals: DVector::zeros(0),
        status,
        iterations: 0,
        residuals: Residuals::default(),
        log: Vec::new(),
    }
}

/// How an augmented variable maps back to the original program.
#[derive(Debug, Clone, Copy, PartialEq)]
enum VarMap {
    Same(usize),
    Split { pos: usize, neg: usize },
}

/// A program with `weight·|x_i|` added to the cost for selected variables,
/// together with the map back to the original variables.
#[derive(Debug, Clone)]
pub struct L1Augmented {
    pub lp: LinearProgram,
    map: Vec<VarMap>,
}

impl L1Augmented {
    /// Original variables from a solution of the augmented program.
    pub fn recover(&self, x_aug: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.map.len(),
            self.map.iter().map(|m| match *m {
                VarMap::Same(j) => x_aug[j],
                VarMap::Split { pos, neg } => x_aug[pos] - x_aug[neg],
            }),
        )
    }

    /// `p_i + q_i` for split variables (equals `|x_i|` at an optimum with
    /// positive weight), `|x_i|` otherwise.
    pub fn recover_abs(&self, x_aug: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.map.len(),
            self.map.iter().map(|m| match *m {
                VarMap::Same(j) => x_aug[j].abs(),
                VarMap::Split { pos, neg } => x_aug[pos] + x_aug[neg],
            }),
        )
    }

    pub fn num_original_vars(&self) -> usize {
        self.map.len()
    }
}

/// Add `weight·Σ_{i∈indices} |x_i|` to the objective.
///
/// Variables already bounded below by a non-negative value just get `weight`
/// added to their cost. Other selected variables are split as
/// `x_i = p_i − q_i` with `p_i, q_i ≥ 0`; the `q_i` columns are appended after
/// the original columns. A finite negative bound on a split variable becomes
/// an explicit row `q_i − p_i ≤ −l_i`. With `weight = 0` the program is
/// returned unchanged.
pub fn l1_augment(lp: &LinearProgram, weight: f64, indices: &[usize]) -> Result<L1Augmented> {
    lp.validate()?;
    if !(weight.is_finite() && weight >= 0.0) {
        return Err(Error::invalid(format!("l1 weight must be >= 0, got {weight}")));
    }
    let n = lp.num_vars();
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    if weight == 0.0 {
        return Ok(L1Augmented {
            lp: lp.clone(),
            map: (0..n).map(VarMap::Same).collect(),
        });
    }
    let mut selected = vec![false; n];
    for &i in indices {
        selected[i] = true;
    }
    let mut c = lp.c.as_slice().to_vec();
    let mut lower = lp.lower.clone();
    let mut map: Vec<VarMap> = (0..n).map(VarMap::Same).collect();
    let mut neg_cols = Vec::new();
    let mut extra_rows = Vec::new();
    for i in 0..n {
        if !selected[i] {
            continue;
        }
        if lp.lower[i] >= 0.0 {
            c[i] += weight;
            continue;
        }
        let neg = n + neg_cols.len();
        neg_cols.push(i);
        map[i] = VarMap::Split { pos: i, neg };
        if lp.lower[i].is_finite() {
            extra_rows.push((i, neg, -lp.lower[i]));
        }
        let ci = c[i];
        c[i] = ci + weight;
        c.push(-ci + weight);
        lower[i] = 0.0;
        lower.push(0.0);
    }
    let (m, _) = lp.g.shape();
    let n_aug = n + neg_cols.len();
    let m_aug = m + extra_rows.len();
    let mut g = DMatrix::zeros(m_aug, n_aug);
    g.view_mut((0, 0), (m, n)).copy_from(&lp.g);
    for (k, &i) in neg_cols.iter().enumerate() {
        let col = -lp.g.column(i);
        g.view_mut((0, n + k), (m, 1)).copy_from(&col);
    }
    let mut h = lp.h.as_slice().to_vec();
    for (r, &(pos, neg, rhs)) in extra_rows.iter().enumerate() {
        g[(m + r, pos)] = -1.0;
        g[(m + r, neg)] = 1.0;
        h.push(rhs);
    }
    Ok(L1Augmented {
        lp: LinearProgram::new(DVector::from_vec(c), g, DVector::from_vec(h), lower)?,
        map,
    })
}
