//! Conventional beamformed images, peak picking, beamwidths and phase-error
//! reports for recovered aperture fields.

use nalgebra::DVector;

use crate::array_model::{AngleGrid, ApertureGeometry, ManifoldMatrix};
use crate::phase::{angle, unwrap, wrap};
use crate::{Error, Result, C64};

pub const DB_FLOOR: f64 = -80.0;

#[derive(Debug, Clone)]
pub struct BeamImage {
    pub grid: AngleGrid,
    /// `|a(u,v)ᴴ b|²`.
    pub linear: Vec<f64>,
    /// Relative to the peak, floored at [`DB_FLOOR`].
    pub db: Vec<f64>,
}

impl BeamImage {
    pub fn peak_index(&self) -> usize {
        self.linear
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0
    }
}

pub fn beamform_image(manifold: &ManifoldMatrix, b: &DVector<C64>) -> Result<BeamImage> {
    if b.len() != manifold.elements() {
        return Err(Error::dims(format!(
            "field has length {}, aperture has {} elements",
            b.len(),
            manifold.elements()
        )));
    }
    if b.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::invalid("cannot beamform an all-zero field"));
    }
    let a = manifold.matrix();
    let linear: Vec<f64> = (0..a.ncols()).map(|j| a.column(j).dotc(b).norm_sqr()).collect();
    let peak = linear.iter().cloned().fold(0.0, f64::max);
    let db = linear
        .iter()
        .map(|&v| if v > 0.0 { (10.0 * (v / peak).log10()).max(DB_FLOOR) } else { DB_FLOOR })
        .collect();
    Ok(BeamImage {
        grid: manifold.grid().clone(),
        linear,
        db,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub u: f64,
    pub v: f64,
    pub level_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    /// Fewer local maxima exist than were requested.
    pub insufficient: bool,
}

/// The `count` strongest local maxima over the 8-neighborhood. Plateaus
/// count once, at their lowest grid index; a point whose neighbors all share
/// its value is not a maximum.
pub fn find_peaks(image: &BeamImage, count: usize) -> Result<PeakSet> {
    if count == 0 {
        return Err(Error::invalid("peak count must be at least 1"));
    }
    let vals = &image.linear;
    let mut found: Vec<usize> = (0..vals.len())
        .filter(|&i| {
            let nb = image.grid.neighbors(i);
            let dominates = nb.iter().all(|&j| vals[i] > vals[j] || (vals[i] == vals[j] && i < j));
            let flat = nb.iter().all(|&j| vals[j] == vals[i]);
            dominates && !flat
        })
        .collect();
    found.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let insufficient = found.len() < count;
    found.truncate(count);
    let angles = image.grid.angles();
    Ok(PeakSet {
        peaks: found
            .into_iter()
            .map(|i| Peak {
                index: i,
                u: angles[i][0],
                v: angles[i][1],
                level_db: image.db[i],
            })
            .collect(),
        insufficient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMatch {
    pub reference: Peak,
    pub estimate: Peak,
    /// Euclidean distance in `(u, v)`.
    pub distance: f64,
}

const MAX_MATCHED: usize = 8;

/// Pair peaks one-to-one, minimizing the largest sine-space distance and
/// then the total. Pairs `min(reference.len(), estimate.len())` peaks, in
/// reference order.
pub fn match_peaks(reference: &[Peak], estimate: &[Peak]) -> Result<Vec<PeakMatch>> {
    let n = reference.len().min(estimate.len());
    if reference.len().max(estimate.len()) > MAX_MATCHED {
        return Err(Error::invalid(format!("peak matching supports at most {MAX_MATCHED} peaks")));
    }
    let dist = |a: &Peak, b: &Peak| (a.u - b.u).hypot(a.v - b.v);
    let (short, long, flipped) = if reference.len() <= estimate.len() {
        (reference, estimate, false)
    } else {
        (estimate, reference, true)
    };

    fn search(
        i: usize,
        short: &[Peak],
        long: &[Peak],
        used: &mut Vec<bool>,
        pick: &mut Vec<usize>,
        best: &mut Option<(f64, f64, Vec<usize>)>,
        dist: &dyn Fn(&Peak, &Peak) -> f64,
    ) {
        if i == short.len() {
            let ds: Vec<f64> = pick.iter().enumerate().map(|(k, &j)| dist(&short[k], &long[j])).collect();
            let worst = ds.iter().cloned().fold(0.0, f64::max);
            let total: f64 = ds.iter().sum();
            let better = match best {
                None => true,
                Some((w, t, _)) => worst < *w || (worst == *w && total < *t),
            };
            if better {
                *best = Some((worst, total, pick.clone()));
            }
            return;
        }
        for j in 0..long.len() {
            if !used[j] {
                used[j] = true;
                pick.push(j);
                search(i + 1, short, long, used, pick, best, dist);
                pick.pop();
                used[j] = false;
            }
        }
    }

    let mut best = None;
    search(0, short, long, &mut vec![false; long.len()], &mut Vec::new(), &mut best, &dist);
    let Some((_, _, pick)) = best else {
        return Ok(Vec::new());
    };
    let mut out: Vec<PeakMatch> = pick
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let (r, e) = if flipped { (long[j], short[k]) } else { (short[k], long[j]) };
            PeakMatch {
                reference: r,
                estimate: e,
                distance: dist(&r, &e),
            }
        })
        .collect();
    if flipped {
        out.sort_by_key(|m| reference.iter().position(|p| *p == m.reference));
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

/// Main-lobe widths in sine space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beamwidth {
    /// `2λ/(N_x d)`.
    pub null_to_null_u: f64,
    pub null_to_null_v: f64,
    /// Half the null-to-null width.
    pub first_null_u: f64,
    pub first_null_v: f64,
}

pub fn beamwidth(geom: &ApertureGeometry) -> Result<Beamwidth> {
    let layout = geom
        .layout()
        .ok_or_else(|| Error::UnsupportedGeometry("beamwidth needs a rectangular aperture".into()))?;
    let lambda = geom.wavelength();
    let du = 2.0 * lambda / (layout.nx as f64 * layout.spacing);
    let dv = 2.0 * lambda / (layout.ny as f64 * layout.spacing);
    Ok(Beamwidth {
        null_to_null_u: du,
        null_to_null_v: dv,
        first_null_u: du / 2.0,
        first_null_v: dv / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub phi_star: f64,
    /// Aligned estimate phase minus true phase, wrapped to (−π, π].
    pub errors: Vec<f64>,
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// RMS of `b_est·e^{−jφ*} − b_true`.
    pub residual_rms: f64,
    /// The conjugated estimate aligned better.
    pub conjugate: bool,
    pub direct_rms_error: f64,
    pub conjugate_rms_error: f64,
    pub true_unwrapped: Vec<f64>,
    pub est_unwrapped: Vec<f64>,
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|e| e * e).sum::<f64>() / x.len() as f64).sqrt()
}

struct Branch {
    phi: f64,
    aligned: DVector<C64>,
    errors: Vec<f64>,
}

fn align_branch(est: &DVector<C64>, truth: &DVector<C64>) -> Branch {
    let phi = angle(truth.dotc(est));
    let rot = C64::from_polar(1.0, -phi);
    let aligned = est.map(|z| z * rot);
    let errors = aligned
        .iter()
        .zip(truth.iter())
        .map(|(a, t)| wrap(angle(*a) - angle(*t)))
        .collect();
    Branch { phi, aligned, errors }
}

/// Least-squares global phase `φ* = ∠(b_trueᴴ b_est)` and per-element
/// errors, trying the conjugated estimate as well.
pub fn align_global_phase(b_est: &DVector<C64>, b_true: &DVector<C64>) -> Result<PhaseReport> {
    if b_est.len() != b_true.len() || b_est.is_empty() {
        return Err(Error::dims(format!("estimate {} vs truth {}", b_est.len(), b_true.len())));
    }
    if b_true.norm() == 0.0 || b_est.norm() == 0.0 {
        return Err(Error::invalid("phase alignment needs nonzero vectors"));
    }
    let direct = align_branch(b_est, b_true);
    let flipped = align_branch(&b_est.map(|z| z.conj()), b_true);
    let (direct_rms, conj_rms) = (rms(&direct.errors), rms(&flipped.errors));
    let conjugate = conj_rms < direct_rms;
    let chosen = if conjugate { flipped } else { direct };
    let residual_rms = (&chosen.aligned - b_true).norm() / (b_true.len() as f64).sqrt();
    let max_abs_error = chosen.errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let true_phase: Vec<f64> = b_true.iter().map(|z| angle(*z)).collect();
    let est_phase: Vec<f64> = chosen.aligned.iter().map(|z| angle(*z)).collect();
    Ok(PhaseReport {
        phi_star: chosen.phi,
        rms_error: rms(&chosen.errors),
        errors: chosen.errors,
        max_abs_error,
        residual_rms,
        conjugate,
        direct_rms_error: direct_rms,
        conjugate_rms_error: conj_rms,
        true_unwrapped: unwrap(&true_phase),
        est_unwrapped: unwrap(&est_phase),
    })
}
