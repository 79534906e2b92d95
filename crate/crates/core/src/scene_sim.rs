//! Point-source scenes with spherical wavefronts, and the intensity-only
//! measurements a field-strength probe would record over the aperture.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::array_model::ApertureGeometry;
use crate::{Error, Result, C64};

/// A narrowband point emitter.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    /// Scene-frame position in millimeters.
    pub position_mm: [f64; 3],
    /// Power in dB; linear power is `10^(dB/10)`.
    pub power_db: f64,
}

impl Source {
    pub fn new(position_mm: [f64; 3], power_db: f64) -> Self {
        Self {
            position_mm,
            power_db,
        }
    }

    pub fn linear_power(&self) -> f64 {
        10f64.powf(self.power_db / 10.0)
    }

    pub fn position_m(&self) -> [f64; 3] {
        self.position_mm.map(|c| c * 1e-3)
    }
}

/// Orientation of the aperture plane in the scene frame.
///
/// Aperture coordinate `(x, y)` maps to scene point `x·x_axis + y·y_axis`.
/// The sine-space direction of a scene point `p` is
/// `(p̂·x_axis, p̂·y_axis)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneEmbedding {
    pub x_axis: [f64; 3],
    pub y_axis: [f64; 3],
    pub boresight: [f64; 3],
}

impl Default for PlaneEmbedding {
    /// Aperture in the X–Z plane looking along +Y.
    fn default() -> Self {
        Self {
            x_axis: [1.0, 0.0, 0.0],
            y_axis: [0.0, 0.0, 1.0],
            boresight: [0.0, 1.0, 0.0],
        }
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl PlaneEmbedding {
    pub fn validate(&self) -> Result<()> {
        let axes = [self.x_axis, self.y_axis, self.boresight];
        for (i, a) in axes.iter().enumerate() {
            if (norm(*a) - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("embedding axis {i} is not unit length")));
            }
            for b in &axes[i + 1..] {
                if dot(*a, *b).abs() > 1e-9 {
                    return Err(Error::invalid("embedding axes are not orthogonal"));
                }
            }
        }
        Ok(())
    }

    /// Scene-frame position (meters) of an aperture point.
    pub fn embed(&self, [x, y]: [f64; 2]) -> [f64; 3] {
        std::array::from_fn(|i| x * self.x_axis[i] + y * self.y_axis[i])
    }

    /// Sine-space coordinates of the direction towards `p`.
    pub fn sine_coords(&self, p: [f64; 3]) -> (f64, f64) {
        let r = norm(p);
        (dot(p, self.x_axis) / r, dot(p, self.y_axis) / r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseSpec {
    #[default]
    None,
    /// Additive zero-mean Gaussian noise on intensity, clamped at zero.
    Gaussian { sigma: f64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub sources: Vec<Source>,
    pub geometry: ApertureGeometry,
    pub embedding: PlaneEmbedding,
    pub noise: NoiseSpec,
}

impl Scenario {
    pub fn new(sources: Vec<Source>, geometry: ApertureGeometry) -> Self {
        Self {
            sources,
            geometry,
            embedding: PlaneEmbedding::default(),
            noise: NoiseSpec::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::invalid("scenario needs at least one source"));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if s.position_mm.iter().any(|c| !c.is_finite()) || !s.power_db.is_finite() {
                return Err(Error::invalid(format!("source {i} has non-finite fields")));
            }
        }
        self.embedding.validate()?;
        if let NoiseSpec::Gaussian { sigma, .. } = self.noise {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
            }
        }
        Ok(())
    }

    /// Sine-space direction of each source as seen from the aperture origin.
    pub fn source_directions(&self) -> Vec<(f64, f64)> {
        self.sources
            .iter()
            .map(|s| self.embedding.sine_coords(s.position_m()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    /// Noiseless complex field; kept for evaluation only.
    pub b_true: DVector<C64>,
    /// Recorded `|b|²` (noisy when noise is enabled).
    pub intensity: Vec<f64>,
    /// `sqrt(intensity)`.
    pub magnitude: Vec<f64>,
}

impl Measurements {
    /// Measurements of a known field without noise.
    pub fn from_field(b: DVector<C64>) -> Self {
        let intensity = intensity_from_field(&b);
        let magnitude = intensity.iter().map(|p| p.sqrt()).collect();
        Self {
            b_true: b,
            intensity,
            magnitude,
        }
    }

    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }
}

/// Field at every element from every source:
/// `y_m = Σ_k sqrt(P_k)·exp(-j·(2π/λ)·d_km)`, with no range decay.
///
/// The `exp(-j·k·d)` sign makes a distant source at direction `(u, v)`
/// produce the wavefront that `a(u, v)` matches; intensities do not depend
/// on the sign.
pub fn simulate_received(scenario: &Scenario) -> Result<Measurements> {
    scenario.validate()?;
    let geom = &scenario.geometry;
    let k = geom.wavenumber();
    let elements: Vec<[f64; 3]> = geom
        .positions()
        .iter()
        .map(|&p| scenario.embedding.embed(p))
        .collect();
    let mut field = DVector::from_element(geom.len(), C64::new(0.0, 0.0));
    for (ks, src) in scenario.sources.iter().enumerate() {
        let p = src.position_m();
        let amp = src.linear_power().sqrt();
        for (m, e) in elements.iter().enumerate() {
            let d = norm([p[0] - e[0], p[1] - e[1], p[2] - e[2]]);
            if d == 0.0 {
                return Err(Error::CoincidentSource {
                    source_index: ks,
                    element: m,
                });
            }
            field[m] += C64::from_polar(amp, -k * d);
        }
    }
    let mut intensity = intensity_from_field(&field);
    if let NoiseSpec::Gaussian { sigma, seed } = scenario.noise {
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
            for p in intensity.iter_mut() {
                *p = (*p + normal.sample(&mut rng)).max(0.0);
            }
        }
    }
    let magnitude = intensity.iter().map(|p| p.sqrt()).collect();
    Ok(Measurements {
        b_true: field,
        intensity,
        magnitude,
    })
}

/// `|E| = Δf / (℘/h)`.
pub fn at_splitting_to_field(delta_f: f64, dipole_over_h: f64) -> Result<f64> {
    if !(dipole_over_h.is_finite() && dipole_over_h > 0.0) {
        return Err(Error::invalid(format!(
            "dipole moment over Planck constant must be positive, got {dipole_over_h}"
        )));
    }
    if !(delta_f.is_finite() && delta_f >= 0.0) {
        return Err(Error::invalid(format!("splitting must be >= 0, got {delta_f}")));
    }
    Ok(delta_f / dipole_over_h)
}

/// `Δf = (℘/h)·|E|`.
pub fn field_to_splitting(field: f64, dipole_over_h: f64) -> Result<f64> {
    if !(dipole_over_h.is_finite() && dipole_over_h > 0.0) {
        return Err(Error::invalid(format!(
            "dipole moment over Planck constant must be positive, got {dipole_over_h}"
        )));
    }
    if !(field.is_finite() && field >= 0.0) {
        return Err(Error::invalid(format!("field magnitude must be >= 0, got {field}")));
    }
    Ok(field * dipole_over_h)
}

pub fn intensity_from_field(b: &DVector<C64>) -> Vec<f64> {
    b.iter().map(|z| z.norm_sqr()).collect()
}
