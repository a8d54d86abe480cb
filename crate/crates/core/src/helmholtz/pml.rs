//! Complex coordinate stretching for the absorbing collar.
//!
//! Inside the collar `s = 1 + i sigma(d)/omega` with
//! `sigma(d) = sigma0 (d/delta)^p`, where `d` is the distance past the physical
//! footprint along that axis. Outside the collar `s = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::grid::Footprint;

/// Default `sigma0 / omega`.
pub const DEFAULT_PML_AMPLITUDE: f64 = 1.79;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlConfig {
    pub thickness: f64,
    pub exponent: i32,
    pub strength: f64,
    pub omega: f64,
}

impl PmlConfig {
    pub fn new(thickness: f64, exponent: i32, strength: f64, omega: f64) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(FwiError::validation(format!("PML thickness must be positive, got {thickness}")));
        }
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(FwiError::validation(format!("PML strength must be positive, got {strength}")));
        }
        if exponent < 1 {
            return Err(FwiError::validation(format!("PML exponent must be at least 1, got {exponent}")));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(FwiError::validation(format!("angular frequency must be non-negative, got {omega}")));
        }
        Ok(Self {
            thickness,
            exponent,
            strength,
            omega,
        })
    }

    /// Quadratic profile with `sigma0 = amplitude * omega`.
    pub fn with_amplitude(thickness: f64, omega: f64, amplitude: f64) -> Result<Self> {
        Self::new(thickness, 2, (amplitude * omega).max(f64::MIN_POSITIVE), omega)
    }

    /// Quadratic profile, `sigma0 = 2 pi f * 1.79`.
    pub fn standard(thickness: f64, omega: f64) -> Result<Self> {
        Self::with_amplitude(thickness, omega, DEFAULT_PML_AMPLITUDE)
    }

    fn axis(&self, distance: f64) -> Complex64 {
        if distance <= 0.0 || self.omega == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let ratio = (distance / self.thickness).min(1.0);
        Complex64::new(1.0, self.strength * ratio.powi(self.exponent) / self.omega)
    }
}

/// Stretch factors `(s_x, s_z)` at `position`.
pub fn pml_stretch(position: (f64, f64), footprint: &Footprint, cfg: &PmlConfig) -> (Complex64, Complex64) {
    let (x, z) = position;
    let (x0, z0) = footprint.origin;
    let dx = (x0 - x).max(x - (x0 + footprint.width)).max(0.0);
    let dz = (z0 - z).max(z - (z0 + footprint.depth)).max(0.0);
    (cfg.axis(dx), cfg.axis(dz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn footprint() -> Footprint {
        Footprint {
            origin: (0.0, 0.0),
            width: 1000.0,
            depth: 500.0,
        }
    }

    #[test]
    fn no_stretch_inside() {
        let cfg = PmlConfig::standard(200.0, 10.0).unwrap();
        for p in [(0.0, 0.0), (500.0, 250.0), (1000.0, 500.0)] {
            let (sx, sz) = pml_stretch(p, &footprint(), &cfg);
            assert_eq!(sx, Complex64::new(1.0, 0.0));
            assert_eq!(sz, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn outer_edge_of_left_collar() {
        let omega = 7.0;
        let cfg = PmlConfig::new(200.0, 2, omega, omega).unwrap();
        let (sx, sz) = pml_stretch((-200.0, 250.0), &footprint(), &cfg);
        assert!((sx - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert_eq!(sz, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn midway_into_bottom_collar() {
        let (omega, sigma0) = (5.0, 3.0);
        let cfg = PmlConfig::new(200.0, 2, sigma0, omega).unwrap();
        let (sx, sz) = pml_stretch((500.0, 600.0), &footprint(), &cfg);
        assert_eq!(sx, Complex64::new(1.0, 0.0));
        assert!((sz.im - sigma0 / (4.0 * omega)).abs() < 1e-15);
        assert_eq!(sz.re, 1.0);
    }

    #[test]
    fn damping_grows_monotonically() {
        let cfg = PmlConfig::standard(200.0, 3.0).unwrap();
        let mut last = 0.0;
        for k in 0..=40 {
            let d = k as f64 * 5.0;
            let (sx, _) = pml_stretch((1000.0 + d, 100.0), &footprint(), &cfg);
            assert!(sx.im >= last);
            last = sx.im;
        }
        assert!((last - DEFAULT_PML_AMPLITUDE).abs() < 1e-12);
    }

    #[test]
    fn validates_inputs() {
        assert!(PmlConfig::new(0.0, 2, 1.0, 1.0).is_err());
        assert!(PmlConfig::new(1.0, 2, -1.0, 1.0).is_err());
        assert!(PmlConfig::new(1.0, 0, 1.0, 1.0).is_err());
    }
}
