//! Experiment orchestration: simulate, retrieve, score, and render every
//! artifact in memory so nothing touches disk until all of it exists.

use std::time::Instant;

use nalgebra::DVector;
use serde_json::{json, Value};
use synthphase::alternating_projections::{run_pipeline, PhaseEstimate};
use synthphase::array_model::{build_grid, build_manifold, ApertureGeometry, ManifoldMatrix};
use synthphase::beamformer_eval::{
    align_global_phase, beamform_image, beamwidth, find_peaks, match_peaks, BeamImage, Peak, PeakSet, PhaseReport,
};
use synthphase::phase::{angle, wrap};
use synthphase::scene_sim::{simulate_received, Measurements, NoiseSpec, Scenario, Source};
use synthphase::C64;

use crate::config::{GridConfig, RunConfig};
use crate::plot;

/// Files to write, by name, plus the textual summary.
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

pub fn scenario(cfg: &RunConfig) -> synthphase::Result<Scenario> {
    let s = &cfg.scenario;
    let geom = ApertureGeometry::rectangular(s.cols, s.rows, cfg.spacing_m(), s.frequency_hz)?;
    let sources = s.sources.iter().map(|src| Source::new(src.position_mm, src.power_db)).collect();
    let mut sc = Scenario::new(sources, geom);
    if s.noise.sigma > 0.0 {
        sc.noise = NoiseSpec::Gaussian {
            sigma: s.noise.sigma,
            seed: s.noise.seed,
        };
    }
    Ok(sc)
}

fn manifold(geom: &ApertureGeometry, g: &GridConfig) -> synthphase::Result<ManifoldMatrix> {
    let e = (g.extent[0], g.extent[1]);
    build_manifold(geom, &build_grid(g.rows, g.cols, e, e)?)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn intensity_csv(geom: &ApertureGeometry, m: &Measurements) -> Vec<u8> {
    csv_bytes(
        &["element", "x_m", "y_m", "intensity", "magnitude"],
        geom.positions().iter().enumerate().map(|(i, p)| {
            vec![i.to_string(), num(p[0]), num(p[1]), num(m.intensity[i]), num(m.magnitude[i])]
        }),
    )
}

fn phase_true_csv(geom: &ApertureGeometry, b: &DVector<C64>, report: &PhaseReport) -> Vec<u8> {
    csv_bytes(
        &["element", "x_m", "y_m", "phase_rad", "phase_unwrapped_rad"],
        geom.positions().iter().enumerate().map(|(i, p)| {
            vec![
                i.to_string(),
                num(p[0]),
                num(p[1]),
                num(angle(b[i])),
                num(report.true_unwrapped[i]),
            ]
        }),
    )
}

fn phase_est_csv(geom: &ApertureGeometry, b_true: &DVector<C64>, b_est: &DVector<C64>, report: &PhaseReport) -> Vec<u8> {
    csv_bytes(
        &["element", "x_m", "y_m", "phase_rad", "aligned_phase_rad", "error_rad"],
        geom.positions().iter().enumerate().map(|(i, p)| {
            vec![
                i.to_string(),
                num(p[0]),
                num(p[1]),
                num(angle(b_est[i])),
                num(wrap(angle(b_true[i]) + report.errors[i])),
                num(report.errors[i]),
            ]
        }),
    )
}

fn beam_csv(image: &BeamImage) -> Vec<u8> {
    let angles = image.grid.angles();
    csv_bytes(
        &["index", "row", "col", "u", "v", "power", "power_db"],
        (0..angles.len()).map(|i| {
            let (r, c) = image.grid.cell(i);
            vec![
                i.to_string(),
                r.to_string(),
                c.to_string(),
                num(angles[i][0]),
                num(angles[i][1]),
                num(image.linear[i]),
                num(image.db[i]),
            ]
        }),
    )
}

fn delta_csv(est: &PhaseEstimate) -> Vec<u8> {
    csv_bytes(
        &["iter", "delta", "power"],
        est.records.iter().map(|r| vec![r.iter.to_string(), num(r.delta), num(r.power)]),
    )
}

struct PeakRow {
    rank: usize,
    est: Option<Peak>,
    truth: Option<Peak>,
    distance: Option<f64>,
}

fn peak_rows(truth: &PeakSet, est: &PeakSet) -> synthphase::Result<Vec<PeakRow>> {
    let matches = match_peaks(&est.peaks, &truth.peaks)?;
    Ok(est
        .peaks
        .iter()
        .enumerate()
        .map(|(rank, p)| {
            let m = matches.iter().find(|m| m.reference == *p);
            PeakRow {
                rank,
                est: Some(*p),
                truth: m.map(|m| m.estimate),
                distance: m.map(|m| m.distance),
            }
        })
        .collect())
}

fn peaks_csv(rows: &[PeakRow]) -> Vec<u8> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    csv_bytes(
        &["rank", "u_est", "v_est", "level_db_est", "u_true", "v_true", "level_db_true", "distance"],
        rows.iter().map(|r| {
            vec![
                r.rank.to_string(),
                opt(r.est.map(|p| p.u)),
                opt(r.est.map(|p| p.v)),
                opt(r.est.map(|p| p.level_db)),
                opt(r.truth.map(|p| p.u)),
                opt(r.truth.map(|p| p.v)),
                opt(r.truth.map(|p| p.level_db)),
                opt(r.distance),
            ]
        }),
    )
}

fn peak_json(p: &Peak) -> Value {
    json!({ "index": p.index, "u": p.u, "v": p.v, "level_db": p.level_db })
}

/// Measurements only.
pub fn simulate(cfg: &RunConfig) -> synthphase::Result<Artifacts> {
    let sc = scenario(cfg)?;
    let meas = simulate_received(&sc)?;
    Ok(Artifacts {
        files: vec![("intensity.csv".into(), intensity_csv(&sc.geometry, &meas))],
        summary: format!("{} intensities", meas.len()),
    })
}

pub fn run(cfg: &RunConfig, config_path: &str) -> synthphase::Result<Artifacts> {
    let t_total = Instant::now();
    let sc = scenario(cfg)?;
    let geom = &sc.geometry;

    let t = Instant::now();
    let meas = simulate_received(&sc)?;
    let t_sim = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let m1 = manifold(geom, &cfg.stage1.grid)?;
    let m2 = manifold(geom, &cfg.stage2.grid)?;
    let t_manifold = t.elapsed().as_secs_f64();

    let max_intensity = meas.intensity.iter().cloned().fold(0.0, f64::max);
    let stop_tol = cfg.stage2.stop_tol.unwrap_or(1e-8 * max_intensity);
    let pipeline_cfg = cfg.pipeline(stop_tol);

    let t = Instant::now();
    let est = run_pipeline(&m1, &m2, &meas, &pipeline_cfg)?;
    let t_pipeline = t.elapsed().as_secs_f64();
    let t_outer: f64 = est.records.iter().map(|r| r.wall_time_s).sum();

    let t = Instant::now();
    let b_est = est.b_final.to_complex();
    let img_true = beamform_image(&m2, &meas.b_true)?;
    let img_est = beamform_image(&m2, &b_est)?;
    let k_hat = cfg.stage2.k_hat;
    let peaks_true = find_peaks(&img_true, k_hat)?;
    let peaks_est = find_peaks(&img_est, k_hat)?;
    let rows = peak_rows(&peaks_true, &peaks_est)?;
    let bw = beamwidth(geom)?;
    let radius = bw.null_to_null_u.max(bw.null_to_null_v);
    let all_within = rows.len() == k_hat && rows.iter().all(|r| r.distance.is_some_and(|d| d <= radius));
    let phase = align_global_phase(&b_est, &meas.b_true).ok();
    let t_eval = t.elapsed().as_secs_f64();

    let mut files = vec![
        ("intensity.csv".to_string(), intensity_csv(geom, &meas)),
        ("beam_true.csv".into(), beam_csv(&img_true)),
        ("beam_est.csv".into(), beam_csv(&img_est)),
        ("peaks.csv".into(), peaks_csv(&rows)),
        ("delta_trace.csv".into(), delta_csv(&est)),
    ];
    // an all-zero field has no phase to compare
    if let Some(report) = &phase {
        files.push(("phase_true.csv".into(), phase_true_csv(geom, &meas.b_true, report)));
        files.push(("phase_est.csv".into(), phase_est_csv(geom, &meas.b_true, &b_est, report)));
    }
    if cfg.output.emit_svg {
        files.push(("beam_true.svg".into(), plot::beam_svg(&img_true, "Beam image, true phase", &peaks_true.peaks)));
        files.push(("beam_est.svg".into(), plot::beam_svg(&img_est, "Beam image, estimated phase", &peaks_est.peaks)));
        files.push(("delta_trace.svg".into(), plot::delta_svg(&est.delta_trace)));
    }

    let s1 = est.stage1.as_ref();
    let report = json!({
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config_path": config_path,
        "effective_config": cfg,
        "resolved": {
            "stage2_stop_tol": stop_tol,
            "stage2_nu": match cfg.stage2.nu {
                Some(nu) => json!(nu),
                None => json!("auto: 1e-6 * |b|^2 / N per outer iteration"),
            },
            "wavelength_m": cfg.wavelength(),
            "spacing_m": cfg.spacing_m(),
            "elements": geom.len(),
            "stage1_directions": m1.directions(),
            "stage2_directions": m2.directions(),
        },
        "sources": sc.sources.iter().zip(sc.source_directions()).map(|(s, (u, v))| json!({
            "position_mm": s.position_mm,
            "power_db": s.power_db,
            "u": u,
            "v": v,
        })).collect::<Vec<_>>(),
        "stage1": s1.map(|s| json!({
            "delta": s.delta,
            "lambda_max": s.lambda_max,
            "lp_status": format!("{:?}", s.lp_status),
            "lp_iterations": s.lp_iterations,
            "lifted_residual": s.lifted_residual,
            "max_imag": s.max_imag,
            "power_converged": s.power_converged,
        })),
        "alternating_projections": {
            "iterations": est.iterations,
            "converged": est.converged,
            "delta_trace": est.delta_trace,
            "records": est.records.iter().map(|r| json!({
                "iter": r.iter,
                "delta": r.delta,
                "power": r.power,
                "cg_iterations": r.cg_iterations,
                "wall_time_s": r.wall_time_s,
            })).collect::<Vec<_>>(),
        },
        "phase_report": phase.as_ref().map(|p| json!({
            "phi_star": p.phi_star,
            "conjugate": p.conjugate,
            "max_abs_error_rad": p.max_abs_error,
            "rms_error_rad": p.rms_error,
            "direct_rms_error_rad": p.direct_rms_error,
            "conjugate_rms_error_rad": p.conjugate_rms_error,
            "residual_rms": p.residual_rms,
        })),
        "beamwidth": {
            "null_to_null_u": bw.null_to_null_u,
            "null_to_null_v": bw.null_to_null_v,
            "first_null_u": bw.first_null_u,
            "first_null_v": bw.first_null_v,
        },
        "peaks": {
            "true": peaks_true.peaks.iter().map(peak_json).collect::<Vec<_>>(),
            "estimated": peaks_est.peaks.iter().map(peak_json).collect::<Vec<_>>(),
            "true_insufficient": peaks_true.insufficient,
            "estimated_insufficient": peaks_est.insufficient,
            "distances": rows.iter().map(|r| r.distance).collect::<Vec<_>>(),
            "match_radius": radius,
            "all_within_beamwidth": all_within,
        },
        "timings_s": {
            "simulate": t_sim,
            "manifolds": t_manifold,
            "pipeline": t_pipeline,
            "stage1": t_pipeline - t_outer,
            "outer_iterations": t_outer,
            "evaluate": t_eval,
            "total": t_total.elapsed().as_secs_f64(),
        },
    });
    files.push((
        "run_report.json".into(),
        serde_json::to_vec_pretty(&report).expect("report serializes"),
    ));

    let summary = format!(
        "{} outer iterations (converged: {}), final delta {:e}, max phase error {}, peaks within beamwidth: {}",
        est.iterations,
        est.converged,
        est.delta_trace.last().copied().unwrap_or(0.0),
        phase.as_ref().map(|p| format!("{:.4} rad", p.max_abs_error)).unwrap_or_else(|| "n/a".into()),
        all_within,
    );
    Ok(Artifacts { files, summary })
}
