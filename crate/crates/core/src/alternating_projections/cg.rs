use nalgebra::{DMatrix, DVector};

use crate::array_model::ManifoldMatrix;
use crate::phase::{angle, PolarVector};
use crate::{Error, Result, C64};

use super::ApConfig;

const HERMITIAN_TOL: f64 = 1e-9;

/// `P(w) = wᴴ R w`, taking the real part of the Hermitian form.
pub fn output_power(w: &DVector<C64>, r: &DMatrix<C64>) -> f64 {
    w.dotc(&(r * w)).re.max(0.0)
}

/// Gradient of `P` in the phase coordinates `w_n = exp(jφ_n)`, scaled by
/// `1/(wᴴw)`: the imaginary part of the diagonal of
/// `[R − P_s I, w wᴴ]`, which reduces to `2 Im(conj(w_n)(Rw)_n)`.
pub fn power_gradient(w: &DVector<C64>, r: &DMatrix<C64>) -> Result<DVector<f64>> {
    let n = w.len();
    if r.shape() != (n, n) {
        return Err(Error::dims(format!("R is {:?} for a weight vector of length {n}", r.shape())));
    }
    let scale = r.norm();
    if scale > 0.0 {
        let asym = (r - r.adjoint()).norm() / scale;
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
    }
    let ww = w.norm_squared();
    if ww == 0.0 {
        return Err(Error::invalid("weight vector is zero"));
    }
    let rw = r * w;
    Ok(DVector::from_fn(n, |i, _| 2.0 * (w[i].conj() * rw[i]).im / ww))
}

/// `exp(−j·t·Diag[h])·w`, rebuilt from phases so every entry has unit modulus.
pub fn rotate(phases: &[f64], h: &DVector<f64>, t: f64) -> DVector<C64> {
    DVector::from_fn(phases.len(), |i, _| C64::from_polar(1.0, phases[i] - t * h[i]))
}

fn unit(phases: &[f64]) -> DVector<C64> {
    DVector::from_fn(phases.len(), |i, _| C64::from_polar(1.0, phases[i]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchSpec {
    /// Largest single-element rotation, in radians, of the first trial step.
    pub initial_rotation: f64,
    /// Bracket growth factor.
    pub growth: f64,
    /// Golden-section stops when the bracket is shorter than `tol·(1 + t)`.
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for LineSearchSpec {
    fn default() -> Self {
        Self {
            initial_rotation: 0.1,
            growth: 2.0,
            tol: 1e-10,
            max_evals: 200,
        }
    }
}

impl LineSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_rotation > 0.0 && self.growth > 1.0 && self.tol > 0.0 && self.max_evals >= 3) {
            return Err(Error::invalid(format!("invalid line search settings {self:?}")));
        }
        Ok(())
    }
}

/// Step `t ≥ 0` approximately maximizing `P(exp(−j·t·Diag[h])·w)`.
/// Returns 0 when no trial step improves on `t = 0`.
pub fn line_search(w: &DVector<C64>, h: &DVector<f64>, r: &DMatrix<C64>, spec: &LineSearchSpec) -> f64 {
    let hmax = h.amax();
    if hmax == 0.0 || !hmax.is_finite() {
        return 0.0;
    }
    let phases: Vec<f64> = w.iter().map(|z| angle(*z)).collect();
    let phi = |t: f64| output_power(&rotate(&phases, h, t), r);
    let p0 = phi(0.0);
    // gains below this are rounding noise
    let margin = 1e-13 * p0.abs();

    // shrink until the first trial improves
    let mut t = spec.initial_rotation / hmax;
    let mut pt = phi(t);
    let mut shrinks = 0;
    while pt <= p0 + margin {
        shrinks += 1;
        if shrinks > 40 {
            return 0.0;
        }
        t *= 0.5;
        pt = phi(t);
    }

    // grow until the value drops
    let (mut lo, mut mid, mut p_mid) = (0.0, t, pt);
    let mut hi = mid * spec.growth;
    let mut p_hi = phi(hi);
    let mut budget = spec.max_evals.saturating_sub(shrinks + 3);
    while p_hi > p_mid && budget > 0 {
        lo = mid;
        mid = hi;
        p_mid = p_hi;
        hi = mid * spec.growth;
        p_hi = phi(hi);
        budget -= 1;
    }
    if p_hi > p_mid {
        return hi;
    }

    // golden section on [lo, hi], which contains mid with the best value
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut best = (mid, p_mid);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = phi(x1);
    let mut f2 = phi(x2);
    let mut golden_budget = spec.max_evals;
    while b - a > spec.tol * (1.0 + best.0) && golden_budget > 0 {
        golden_budget -= 1;
        if f1 > best.1 {
            best = (x1, f1);
        }
        if f2 > best.1 {
            best = (x2, f2);
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi(x2);
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f > best.1 {
            best = (x, f);
        }
    }
    best.0
}

#[derive(Debug, Clone)]
pub struct CgResult {
    pub w: DVector<C64>,
    /// `P(w_k)` for `k = 0..=iterations`.
    pub power_trace: Vec<f64>,
    pub iterations: usize,
    /// A zero gradient ended the run early.
    pub stationary: bool,
    pub nu: f64,
}

/// Polak–Ribière conjugate gradient on the phases of `w`, maximizing
/// `wᴴ(b₁†b₁†ᴴ + νI)w` from `w₀ = exp(−j∠(A s_proj))`.
///
/// The update is `w ← exp(−j·t·Diag[h])·w` with `t ≥ 0`, so the search
/// directions are built from the negated gradient.
pub fn stage3_cg(b1: &PolarVector, s_proj: &DVector<C64>, manifold: &ManifoldMatrix, cfg: &ApConfig) -> Result<CgResult> {
    cfg.validate()?;
    let n = manifold.elements();
    if b1.len() != n {
        return Err(Error::dims(format!("b₁† has length {}, aperture has {n} elements", b1.len())));
    }
    let b = b1.to_complex();
    let energy = b.norm_squared();
    let nu = cfg.nu.unwrap_or(1e-6 * energy / n as f64);
    let mut r = &b * b.adjoint();
    for i in 0..n {
        r[(i, i)] += C64::new(nu, 0.0);
    }

    let mut phases: Vec<f64> = manifold.apply(s_proj)?.iter().map(|z| -angle(*z)).collect();
    let mut w = unit(&phases);
    let mut power_trace = vec![output_power(&w, &r)];
    let tiny = 1e-14 * (energy + nu * n as f64).max(f64::MIN_POSITIVE);

    let mut g = -power_gradient(&w, &r)?;
    let mut h = g.clone();
    let mut stationary = false;
    let mut iterations = 0;
    for _ in 0..cfg.n_cg {
        if g.norm() <= tiny {
            stationary = true;
            break;
        }
        let t = line_search(&w, &h, &r, &cfg.line_search);
        iterations += 1;
        if t > 0.0 {
            for (p, hi) in phases.iter_mut().zip(h.iter()) {
                *p -= t * hi;
            }
            w = unit(&phases);
        }
        power_trace.push(output_power(&w, &r));
        let g_next = -power_gradient(&w, &r)?;
        let gamma = (&g_next - &g).dot(&g_next) / g.norm_squared();
        h = &g_next + &h * gamma;
        if h.dot(&g_next) <= 0.0 || t == 0.0 {
            h = g_next.clone();
        }
        g = g_next;
    }
    Ok(CgResult {
        w,
        power_trace,
        iterations,
        stationary,
        nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{build_manifold, ApertureGeometry, AngleGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
        let b = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &b * b.adjoint()
    }

    fn fd_gradient(phases: &[f64], r: &DMatrix<C64>) -> DVector<f64> {
        let step = 1e-6;
        DVector::from_fn(phases.len(), |i, _| {
            let mut plus = phases.to_vec();
            let mut minus = phases.to_vec();
            plus[i] += step;
            minus[i] -= step;
            (output_power(&unit(&plus), r) - output_power(&unit(&minus), r)) / (2.0 * step)
        })
    }

    fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(b) / (a.norm() * b.norm())
    }

    #[test]
    fn power_examples() {
        let w = DVector::from_fn(5, |i, _| C64::from_polar(1.0, i as f64));
        assert!((output_power(&w, &DMatrix::identity(5, 5)) - 5.0).abs() < 1e-12);
        assert_eq!(output_power(&w, &DMatrix::zeros(5, 5)), 0.0);
        let b1 = DVector::from_element(4, c(1.0, 0.0));
        let r = &b1 * b1.adjoint();
        let w = b1.map(|z| z / z.norm());
        assert!((output_power(&w, &r) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_for_scaled_identity_and_single_element() {
        let w = DVector::from_fn(4, |i, _| C64::from_polar(1.0, 0.7 * i as f64));
        let r = DMatrix::<C64>::identity(4, 4) * c(3.5, 0.0);
        assert!(power_gradient(&w, &r).unwrap().norm() < 1e-14);
        let w1 = DVector::from_element(1, C64::from_polar(1.0, 0.4));
        let r1 = DMatrix::from_element(1, 1, c(2.0, 0.0));
        assert!(power_gradient(&w1, &r1).unwrap().norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences_two_elements() {
        let b = DVector::from_vec(vec![c(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]);
        let r = &b * b.adjoint();
        let phases = [0.0, 0.0];
        let g = power_gradient(&unit(&phases), &r).unwrap();
        assert!(cosine(&g, &fd_gradient(&phases, &r)) >= 0.999);
    }

    #[test]
    fn gradient_matches_finite_differences_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let n = 2 + trial % 7;
            let r = random_hermitian_psd(&mut rng, n);
            let phases: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = power_gradient(&unit(&phases), &r).unwrap();
            let fd = fd_gradient(&phases, &r);
            // exact scale: 1/(wᴴw) = 1/N
            assert!((&g * n as f64 - &fd).norm() < 1e-5 * (1.0 + fd.norm()));
            assert!(cosine(&g, &fd) >= 0.999);
        }
    }

    #[test]
    fn gradient_rejects_non_hermitian() {
        let r = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let w = DVector::from_element(2, c(1.0, 0.0));
        assert!(matches!(power_gradient(&w, &r), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn line_search_trivial_cases() {
        let w = DVector::from_fn(3, |i, _| C64::from_polar(1.0, i as f64));
        let spec = LineSearchSpec::default();
        let r = DMatrix::<C64>::identity(3, 3);
        assert_eq!(line_search(&w, &DVector::zeros(3), &r, &spec), 0.0);
        assert_eq!(line_search(&w, &DVector::from_vec(vec![1.0, -0.5, 0.2]), &r, &spec), 0.0);
    }

    #[test]
    fn line_search_matches_grid_scan() {
        let b = DVector::from_vec(vec![c(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]);
        let r = &b * b.adjoint();
        let w = DVector::from_element(2, c(1.0, 0.0));
        let h = -power_gradient(&w, &r).unwrap();
        let spec = LineSearchSpec::default();
        let t_star = line_search(&w, &h, &r, &spec);
        // P depends on t through the phase difference, period 2π/|h₁ − h₀|
        let period = 2.0 * std::f64::consts::PI / (h[1] - h[0]).abs();
        let phases = [0.0, 0.0];
        let scan = 200_000;
        let (mut t_best, mut p_best) = (0.0, f64::MIN);
        for i in 0..=scan {
            let t = period * 0.5 * i as f64 / scan as f64;
            let p = output_power(&rotate(&phases, &h, t), &r);
            if p > p_best {
                t_best = t;
                p_best = p;
            }
        }
        let grid_step = period * 0.5 / scan as f64;
        assert!((t_star - t_best).abs() <= grid_step + 1e-6 * (1.0 + t_best), "{t_star} vs {t_best}");
        assert!(output_power(&rotate(&phases, &h, t_star), &r) >= p_best - 1e-9);
    }

    fn small_manifold() -> ManifoldMatrix {
        let geom = ApertureGeometry::rectangular(3, 3, 0.0037474, 40e9).unwrap();
        build_manifold(&geom, &AngleGrid::from_points(vec![[0.0, 0.0], [0.3, -0.2], [-0.4, 0.5]]).unwrap()).unwrap()
    }

    #[test]
    fn consistent_start_is_stationary() {
        let m = small_manifold();
        let s = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.3), c(0.5, -0.2)]);
        let y = m.apply(&s).unwrap();
        let b1 = PolarVector::new(vec![1.0; 9], y.iter().map(|z| -angle(*z)).collect());
        let cfg = ApConfig::default();
        let out = stage3_cg(&b1, &s, &m, &cfg).unwrap();
        let n = 9.0;
        assert!((out.power_trace[0] - (n * n + out.nu * n)).abs() < 1e-9);
        let w0 = y.map(|z| C64::from_polar(1.0, -angle(z)));
        assert!((&out.w - w0).norm() < 1e-9);
    }

    #[test]
    fn loading_only_is_constant() {
        let m = small_manifold();
        let s = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.3), c(0.0, 0.0)]);
        let b1 = PolarVector::new(vec![0.0; 9], vec![0.0; 9]);
        let cfg = ApConfig { nu: Some(0.5), ..Default::default() };
        let out = stage3_cg(&b1, &s, &m, &cfg).unwrap();
        assert!(out.stationary);
        let w0 = m.apply(&s).unwrap().map(|z| C64::from_polar(1.0, -angle(z)));
        assert_eq!(out.w, w0);
    }

    #[test]
    fn cg_reaches_phase_conjugate_optimum() {
        let m = small_manifold();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b1 = PolarVector::new(
            (0..9).map(|_| rng.random_range(0.5..2.0)).collect(),
            (0..9).map(|_| rng.random_range(-3.0..3.0)).collect(),
        );
        let s = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let cfg = ApConfig { n_cg: 200, ..Default::default() };
        let out = stage3_cg(&b1, &s, &m, &cfg).unwrap();
        let best: f64 = b1.magnitude.iter().sum::<f64>().powi(2) + out.nu * 9.0;
        assert!((out.power_trace.last().unwrap() - best).abs() < 1e-6 * best);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn cg_ascends_and_keeps_unit_modulus(
            mags in prop::collection::vec(0.0f64..3.0, 9),
            phases in prop::collection::vec(-3.1f64..3.1, 9),
            s in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
        ) {
            let m = small_manifold();
            let b1 = PolarVector::new(mags, phases);
            let s = DVector::from_iterator(3, s.into_iter().map(|(a, b)| c(a, b)));
            let out = stage3_cg(&b1, &s, &m, &ApConfig::default()).unwrap();
            for pair in out.power_trace.windows(2) {
                prop_assert!(pair[1] >= pair[0] - 1e-9);
            }
            for z in out.w.iter() {
                prop_assert!((z.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
