//! Static SVG figures.

use plotters::prelude::*;
use synthphase::beamformer_eval::{BeamImage, Peak};

const SIZE: (u32, u32) = (640, 560);
/// Dynamic range shown in the heatmaps.
const COLOR_FLOOR_DB: f64 = -40.0;

fn lattice_step(extent: (f64, f64), n: usize) -> f64 {
    if n > 1 {
        (extent.1 - extent.0) / (n - 1) as f64
    } else {
        0.1
    }
}

pub fn beam_svg(image: &BeamImage, title: &str, peaks: &[Peak]) -> Vec<u8> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        draw_beam(&root, image, title, peaks).expect("drawing into a string cannot fail");
        root.present().expect("drawing into a string cannot fail");
    }
    svg.into_bytes()
}

fn draw_beam<DB: DrawingBackend>(
    root: &DrawingArea<DB, plotters::coord::Shift>,
    image: &BeamImage,
    title: &str,
    peaks: &[Peak],
) -> Result<(), DrawingAreaErrorKind<DB::ErrorType>> {
    root.fill(&WHITE)?;
    let grid = &image.grid;
    let (ue, ve) = (grid.u_extent(), grid.v_extent());
    let du = lattice_step(ue, grid.cols());
    let dv = lattice_step(ve, grid.rows());
    let mut chart = ChartBuilder::on(root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(48)
        .build_cartesian_2d(
            (ue.0 - du / 2.0)..(ue.1 + du / 2.0),
            (ve.0 - dv / 2.0)..(ve.1 + dv / 2.0),
        )?;
    chart.configure_mesh().disable_mesh().x_desc("u").y_desc("v").draw()?;
    chart.draw_series(grid.angles().iter().zip(&image.db).map(|(&[u, v], &db)| {
        let color = ViridisRGB.get_color_normalized(db.max(COLOR_FLOOR_DB) as f32, COLOR_FLOOR_DB as f32, 0.0);
        Rectangle::new(
            [(u - du / 2.0, v - dv / 2.0), (u + du / 2.0, v + dv / 2.0)],
            color.filled(),
        )
    }))?;
    chart.draw_series(
        peaks
            .iter()
            .map(|p| Circle::new((p.u, p.v), 6, ShapeStyle::from(&RED).stroke_width(2))),
    )?;
    Ok(())
}

pub fn delta_svg(trace: &[f64]) -> Vec<u8> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        draw_delta(&root, trace).expect("drawing into a string cannot fail");
        root.present().expect("drawing into a string cannot fail");
    }
    svg.into_bytes()
}

fn draw_delta<DB: DrawingBackend>(
    root: &DrawingArea<DB, plotters::coord::Shift>,
    trace: &[f64],
) -> Result<(), DrawingAreaErrorKind<DB::ErrorType>> {
    root.fill(&WHITE)?;
    let top = trace.iter().cloned().fold(0.0, f64::max);
    let top = if top > 0.0 { top * 1.1 } else { 1.0 };
    let last = trace.len().saturating_sub(1).max(1) as f64;
    let mut chart = ChartBuilder::on(root)
        .caption("Minimax residual bound per outer iteration", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(72)
        .build_cartesian_2d(0.0..last, 0.0..top)?;
    chart.configure_mesh().x_desc("outer iteration").y_desc("delta").draw()?;
    let points: Vec<(f64, f64)> = trace.iter().enumerate().map(|(i, &d)| (i as f64, d)).collect();
    chart.draw_series(LineSeries::new(points.iter().copied(), &BLUE))?;
    chart.draw_series(points.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))?;
    Ok(())
}
