//! Small helpers for phase bookkeeping shared by the stages.

use nalgebra::DVector;

use crate::C64;

/// Argument of `z`, with the convention `∠0 = 0`.
#[inline]
pub fn angle(z: C64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        z.im.atan2(z.re)
    }
}

/// Elementwise `∠z` with `∠0 = 0`.
pub fn angles(z: &DVector<C64>) -> Vec<f64> {
    z.iter().map(|&c| angle(c)).collect()
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// 1-D phase unwrapping along the given ordering.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let prev_raw = phases[i - 1];
            offset += wrap(p - prev_raw) - (p - prev_raw);
        }
        out.push(p + offset);
    }
    out
}

/// A complex vector held in polar form so that its modulus can be pinned
/// exactly to measured magnitudes while the phase evolves.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarVector {
    pub magnitude: Vec<f64>,
    pub phase: Vec<f64>,
}

impl PolarVector {
    pub fn new(magnitude: Vec<f64>, phase: Vec<f64>) -> Self {
        assert_eq!(magnitude.len(), phase.len());
        Self { magnitude, phase }
    }

    /// `|b| ⊙ exp(-j∠z)`.
    pub fn pinned_conj_phase(magnitude: &[f64], z: &DVector<C64>) -> Self {
        assert_eq!(magnitude.len(), z.len());
        Self {
            magnitude: magnitude.to_vec(),
            phase: z.iter().map(|&c| -angle(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.is_empty()
    }

    pub fn to_complex(&self) -> DVector<C64> {
        DVector::from_iterator(
            self.len(),
            self.magnitude
                .iter()
                .zip(&self.phase)
                .map(|(&m, &p)| C64::from_polar(m, p)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_has_zero_phase() {
        assert_eq!(angle(C64::new(0.0, 0.0)), 0.0);
        assert_eq!(angle(C64::new(-0.0, 0.0)), 0.0);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap(PI), PI);
        assert!((wrap(-PI) - PI).abs() < 1e-15);
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let ramp: Vec<f64> = (0..20).map(|i| 0.9 * i as f64).collect();
        let wrapped: Vec<f64> = ramp.iter().map(|&p| wrap(p)).collect();
        let un = unwrap(&wrapped);
        for (a, b) in un.iter().zip(&ramp) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_modulus_is_stored_verbatim() {
        let z = DVector::from_vec(vec![C64::new(3.0, 4.0), C64::new(0.0, 0.0)]);
        let p = PolarVector::pinned_conj_phase(&[2.0, 1.5], &z);
        assert_eq!(p.magnitude, vec![2.0, 1.5]);
        assert!((p.phase[0] + (4.0f64).atan2(3.0)).abs() < 1e-15);
        assert_eq!(p.phase[1], 0.0);
    }
}
