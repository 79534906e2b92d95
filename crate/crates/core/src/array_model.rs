//! Sine-space angle grids, steering vectors and the array manifold `A`.
//!
//! Element `n` of the steering vector for direction `(u, v)` is
//! `exp(j·k·(x_n·u + y_n·v))`. The manifold stacks steering vectors as
//! columns, so row `i` of `A` is the electrical-angle vector `f_i` of
//! element `i` over every grid direction.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64, SPEED_OF_LIGHT};

/// Slack allowed on `u² + v² ≤ 1` for points that sit on the unit circle.
pub const VISIBLE_TOL: f64 = 1e-12;

/// Row/column layout of a rectangular aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectLayout {
    /// Elements along x.
    pub nx: usize,
    /// Elements along y.
    pub ny: usize,
    /// Element pitch in meters.
    pub spacing: f64,
}

/// Element positions (meters) in the aperture plane plus the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureGeometry {
    positions: Vec<[f64; 2]>,
    wavenumber: f64,
    wavelength: f64,
    frequency: f64,
    layout: Option<RectLayout>,
}

impl ApertureGeometry {
    pub fn new(positions: Vec<[f64; 2]>, frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {frequency_hz}"
            )));
        }
        Self::build(positions, SPEED_OF_LIGHT / frequency_hz, frequency_hz, None)
    }

    pub fn with_wavelength(positions: Vec<[f64; 2]>, wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::invalid(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Self::build(positions, wavelength, SPEED_OF_LIGHT / wavelength, None)
    }

    /// `nx × ny` grid centered on the origin with pitch `spacing` (meters).
    /// Element `row * nx + col` sits at
    /// `((col - (nx-1)/2)·d, (row - (ny-1)/2)·d)`.
    pub fn rectangular(nx: usize, ny: usize, spacing: f64, frequency_hz: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("rectangular aperture needs nx, ny >= 1"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        let cx = (nx as f64 - 1.0) / 2.0;
        let cy = (ny as f64 - 1.0) / 2.0;
        let mut positions = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            for col in 0..nx {
                positions.push([(col as f64 - cx) * spacing, (row as f64 - cy) * spacing]);
            }
        }
        let mut geom = Self::new(positions, frequency_hz)?;
        geom.layout = Some(RectLayout { nx, ny, spacing });
        Ok(geom)
    }

    fn build(
        positions: Vec<[f64; 2]>,
        wavelength: f64,
        frequency: f64,
        layout: Option<RectLayout>,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("aperture needs at least one element"));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("element positions must be finite"));
        }
        Ok(Self {
            positions,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
            wavelength,
            frequency,
            layout,
        })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn layout(&self) -> Option<RectLayout> {
        self.layout
    }

    /// Index pairs of elements that share a position. Allowed, but usually a
    /// configuration mistake.
    pub fn duplicate_positions(&self) -> Vec<(usize, usize)> {
        let mut dups = Vec::new();
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                if self.positions[i] == self.positions[j] {
                    dups.push((i, j));
                }
            }
        }
        dups
    }
}

/// Uniform sine-space grid restricted to the visible region.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    angles: Vec<[f64; 2]>,
    rows: usize,
    cols: usize,
    u_extent: (f64, f64),
    v_extent: (f64, f64),
    /// Lattice cell `(row * cols + col)` → grid index, `None` when filtered.
    lattice: Vec<Option<usize>>,
    /// Grid index → lattice `(row, col)`.
    cells: Vec<(usize, usize)>,
}

fn sample(extent: (f64, f64), count: usize, i: usize) -> f64 {
    if count == 1 {
        0.5 * (extent.0 + extent.1)
    } else {
        extent.0 + (extent.1 - extent.0) * i as f64 / (count - 1) as f64
    }
}

/// Uniform `rows × cols` lattice over `u_extent × v_extent`, row-major with
/// `v` varying along rows and `u` along columns. Points outside
/// `u² + v² ≤ 1` are dropped.
pub fn build_grid(
    rows: usize,
    cols: usize,
    u_extent: (f64, f64),
    v_extent: (f64, f64),
) -> Result<AngleGrid> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid needs rows, cols >= 1"));
    }
    for (name, (lo, hi)) in [("u", u_extent), ("v", v_extent)] {
        let ok = lo.is_finite() && hi.is_finite() && lo <= hi && lo >= -1.0 && hi <= 1.0;
        if !ok {
            return Err(Error::invalid(format!(
                "{name} extent [{lo}, {hi}] must be an interval within [-1, 1]"
            )));
        }
    }
    let mut angles = Vec::new();
    let mut lattice = vec![None; rows * cols];
    let mut cells = Vec::new();
    for r in 0..rows {
        let v = sample(v_extent, rows, r);
        for c in 0..cols {
            let u = sample(u_extent, cols, c);
            if u * u + v * v <= 1.0 + VISIBLE_TOL {
                lattice[r * cols + c] = Some(angles.len());
                cells.push((r, c));
                angles.push([u, v]);
            }
        }
    }
    if angles.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(AngleGrid {
        angles,
        rows,
        cols,
        u_extent,
        v_extent,
        lattice,
        cells,
    })
}

impl AngleGrid {
    /// Grid over explicit directions, with no lattice structure (every point
    /// is its own 1×1 cell row). Mostly useful for tests.
    pub fn from_points(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        for &[u, v] in &points {
            check_visible(u, v)?;
        }
        let n = points.len();
        Ok(Self {
            rows: 1,
            cols: n,
            u_extent: (f64::NAN, f64::NAN),
            v_extent: (f64::NAN, f64::NAN),
            lattice: (0..n).map(Some).collect(),
            cells: (0..n).map(|i| (0, i)).collect(),
            angles: points,
        })
    }

    pub fn angles(&self) -> &[[f64; 2]] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn u_extent(&self) -> (f64, f64) {
        self.u_extent
    }

    pub fn v_extent(&self) -> (f64, f64) {
        self.v_extent
    }

    /// Lattice position of grid point `index`.
    pub fn cell(&self, index: usize) -> (usize, usize) {
        self.cells[index]
    }

    /// Grid indices of the (up to eight) lattice neighbours of `index` that
    /// survived visible-region filtering.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let (r, c) = self.cells[index];
        let mut out = Vec::with_capacity(8);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                if rr < 0 || cc < 0 || rr >= self.rows as i64 || cc >= self.cols as i64 {
                    continue;
                }
                if let Some(j) = self.lattice[rr as usize * self.cols + cc as usize] {
                    out.push(j);
                }
            }
        }
        out
    }

    /// Index of the grid point nearest to `(u, v)`.
    pub fn nearest(&self, u: f64, v: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &[gu, gv]) in self.angles.iter().enumerate() {
            let d = (gu - u).powi(2) + (gv - v).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

fn check_visible(u: f64, v: f64) -> Result<()> {
    if !(u.is_finite() && v.is_finite()) || u * u + v * v > 1.0 + VISIBLE_TOL {
        return Err(Error::OutsideVisibleRegion { u, v });
    }
    Ok(())
}

/// `a(u, v)`: entry `n` is `exp(j·k·(x_n·u + y_n·v))`.
pub fn steering_vector(geom: &ApertureGeometry, u: f64, v: f64) -> Result<DVector<C64>> {
    check_visible(u, v)?;
    let k = geom.wavenumber();
    Ok(DVector::from_iterator(
        geom.len(),
        geom.positions()
            .iter()
            .map(|&[x, y]| C64::from_polar(1.0, k * (x * u + y * v))),
    ))
}

/// `N × K` matrix of steering vectors over a grid.
#[derive(Debug, Clone)]
pub struct ManifoldMatrix {
    matrix: DMatrix<C64>,
    geometry: ApertureGeometry,
    grid: AngleGrid,
}

pub fn build_manifold(geom: &ApertureGeometry, grid: &AngleGrid) -> Result<ManifoldMatrix> {
    let mut matrix = DMatrix::zeros(geom.len(), grid.len());
    for (j, &[u, v]) in grid.angles().iter().enumerate() {
        matrix.set_column(j, &steering_vector(geom, u, v)?);
    }
    Ok(ManifoldMatrix {
        matrix,
        geometry: geom.clone(),
        grid: grid.clone(),
    })
}

impl ManifoldMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn geometry(&self) -> &ApertureGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    /// Element count `N`.
    pub fn elements(&self) -> usize {
        self.matrix.nrows()
    }

    /// Grid size `K`.
    pub fn directions(&self) -> usize {
        self.matrix.ncols()
    }

    /// `A · s`.
    pub fn apply(&self, s: &DVector<C64>) -> Result<DVector<C64>> {
        if s.len() != self.directions() {
            return Err(Error::dims(format!(
                "source vector has length {}, manifold has {} directions",
                s.len(),
                self.directions()
            )));
        }
        Ok(&self.matrix * s)
    }
}

/// `f_i`: row `i` of the manifold as a column vector.
pub fn element_row(manifold: &ManifoldMatrix, i: usize) -> Result<DVector<C64>> {
    if i >= manifold.elements() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: manifold.elements(),
        });
    }
    Ok(manifold.matrix.row(i).transpose())
}
