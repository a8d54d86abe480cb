//! Barzilai-Borwein step lengths.

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BbVariant {
    /// `s.s / s.y`
    #[default]
    Bb1,
    /// `s.y / y.y`
    Bb2,
}

/// Step length from the last iterate difference `s` and gradient difference `y`.
///
/// Returns `fallback` when the curvature `s.y` is not positive or the ratio is
/// not finite; the result is clamped to `[range.0, range.1]`.
pub fn bb_step(s: &[f64], y: &[f64], variant: BbVariant, fallback: f64, range: (f64, f64)) -> Result<f64> {
    if s.len() != y.len() {
        return Err(FwiError::ShapeMismatch(format!("s has {} entries, y has {}", s.len(), y.len())));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let sy = dot(s, y);
    let alpha = if sy > 0.0 {
        match variant {
            BbVariant::Bb1 => dot(s, s) / sy,
            BbVariant::Bb2 => sy / dot(y, y),
        }
    } else {
        fallback
    };
    let alpha = if alpha.is_finite() && alpha > 0.0 { alpha } else { fallback };
    Ok(alpha.clamp(range.0, range.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WIDE: (f64, f64) = (1e-300, 1e300);

    #[test]
    fn diagonal_quadratic() {
        // A = diag(1, 2), s = (1, 1), y = A s = (1, 2)
        let (s, y) = ([1.0, 1.0], [1.0, 2.0]);
        let bb1 = bb_step(&s, &y, BbVariant::Bb1, 0.1, WIDE).unwrap();
        let bb2 = bb_step(&s, &y, BbVariant::Bb2, 0.1, WIDE).unwrap();
        assert!((bb1 - 2.0 / 3.0).abs() <= 1e-14);
        assert!((bb2 - 3.0 / 5.0).abs() <= 1e-14);
    }

    #[test]
    fn identity_curvature_gives_unit_step() {
        let s = [0.3, -1.2, 4.0];
        assert_eq!(bb_step(&s, &s, BbVariant::Bb1, 0.1, WIDE).unwrap(), 1.0);
        assert_eq!(bb_step(&s, &s, BbVariant::Bb2, 0.1, WIDE).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_pairs_use_fallback() {
        assert_eq!(bb_step(&[1.0, 1.0], &[0.0, 0.0], BbVariant::Bb1, 0.25, WIDE).unwrap(), 0.25);
        assert_eq!(bb_step(&[1.0, 1.0], &[0.0, 0.0], BbVariant::Bb2, 0.25, WIDE).unwrap(), 0.25);
        assert_eq!(bb_step(&[1.0, 0.0], &[-1.0, 0.0], BbVariant::Bb1, 0.5, WIDE).unwrap(), 0.5);
    }

    #[test]
    fn clamps_to_range() {
        let alpha = bb_step(&[1.0], &[1e-9], BbVariant::Bb1, 1.0, (1e-3, 10.0)).unwrap();
        assert_eq!(alpha, 10.0);
    }

    #[test]
    fn shape_mismatch() {
        assert!(bb_step(&[1.0], &[1.0, 2.0], BbVariant::Bb1, 1.0, WIDE).is_err());
    }
}
