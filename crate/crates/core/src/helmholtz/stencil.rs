//! Gaussian RBF-FD weights for the Laplacian on the regular 7-point hexagon.
//!
//! The local system is the interpolation problem on the centre node and its
//! six neighbours with kernel `exp(-eps^2 r^2)`, augmented by a constant so
//! that constants are annihilated. Symmetry collapses it to two unknowns:
//! a centre weight and one weight shared by the neighbours. With
//! `t = (eps h)^2`, `q = exp(-t)` and `a = 1 - q` the neighbour weight is
//!
//! ```text
//! w = 4 t (t q + a) / (h^2 a^2 (12 - 6a + a^2))
//! ```
//!
//! which is free of cancellation for small `t` and tends to `2/(3h^2)` as
//! `eps -> 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{FwiError, Result};

/// Largest accepted `eps*h`. Past this the Gaussian is too narrow for the
/// 7-node stencil and the weights drift away from a Laplacian.
pub const MAX_SHAPE_PRODUCT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilWeights {
    pub center: f64,
    pub neighbor: f64,
    pub shape: f64,
}

impl StencilWeights {
    /// Ratio of the neighbour weight to the classical `2/(3h^2)`.
    pub fn relative_scale(&self, h: f64) -> f64 {
        self.neighbor * 1.5 * h * h
    }
}

pub fn rbf_fd_weights(shape: f64, h: f64) -> Result<StencilWeights> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FwiError::validation(format!("stencil spacing must be positive, got {h}")));
    }
    let product = shape * h;
    if !(shape >= 0.0 && product <= MAX_SHAPE_PRODUCT) {
        return Err(FwiError::InvalidShapeParameter {
            product,
            max: MAX_SHAPE_PRODUCT,
        });
    }
    let h2 = h * h;
    let neighbor = if shape == 0.0 {
        2.0 / (3.0 * h2)
    } else {
        let t = product * product;
        let a = -(-t).exp_m1();
        let q = 1.0 - a;
        4.0 * t * (t * q + a) / (h2 * a * a * (12.0 - 6.0 * a + a * a))
    };
    Ok(StencilWeights {
        center: -6.0 * neighbor,
        neighbor,
        shape,
    })
}

/// Shape parameter supplied to the assembler.
///
/// The wavenumber variant receives the local wavenumber `k = omega*sqrt(m)` and
/// the lattice spacing `h` of each node and returns `eps` in 1/m.
#[derive(Clone)]
pub enum ShapeParameter {
    Constant(f64),
    Wavenumber(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl ShapeParameter {
    /// `eps = k / sqrt(12)`. The weight scale `1 + 3(eps h)^2/4` then cancels
    /// the `-k^4 h^2 / 16` term of the plane-wave symbol at the local wavenumber.
    pub fn plane_wave_matched() -> Self {
        ShapeParameter::Wavenumber(Arc::new(|k, _h| k / 12f64.sqrt()))
    }

    pub fn at(&self, wavenumber: f64, h: f64) -> f64 {
        match self {
            ShapeParameter::Constant(eps) => *eps,
            ShapeParameter::Wavenumber(f) => f(wavenumber, h),
        }
    }
}

impl Default for ShapeParameter {
    fn default() -> Self {
        ShapeParameter::Constant(0.0)
    }
}

impl fmt::Debug for ShapeParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeParameter::Constant(eps) => f.debug_tuple("Constant").field(eps).finish(),
            ShapeParameter::Wavenumber(_) => f.write_str("Wavenumber(<fn>)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NEIGHBOR_DIRECTIONS;

    fn hexagon(h: f64) -> Vec<(f64, f64)> {
        let mut pts = vec![(0.0, 0.0)];
        pts.extend(NEIGHBOR_DIRECTIONS.iter().map(|(x, z)| (x * h, z * h)));
        pts
    }

    fn apply(w: &StencilWeights, h: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let pts = hexagon(h);
        w.center * f(0.0, 0.0) + pts[1..].iter().map(|&(x, z)| w.neighbor * f(x, z)).sum::<f64>()
    }

    /// Dense solve of the full 8x8 augmented RBF-FD system (oracle).
    fn dense_weights(eps: f64, h: f64) -> Vec<f64> {
        let pts = hexagon(h);
        let phi = |r2: f64| (-eps * eps * r2).exp();
        let lap_phi = |r2: f64| (4.0 * eps.powi(4) * r2 - 4.0 * eps * eps) * phi(r2);
        let n = 8;
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..7 {
            for j in 0..7 {
                let r2 = (pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2);
                a[i][j] = phi(r2);
            }
            a[i][7] = 1.0;
            a[7][i] = 1.0;
            let r2 = pts[i].0.powi(2) + pts[i].1.powi(2);
            a[i][8] = lap_phi(r2);
        }
        // Gauss-Jordan with partial pivoting
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs())).unwrap();
            a.swap(k, p);
            for i in 0..n {
                if i != k {
                    let l = a[i][k] / a[k][k];
                    for j in k..=n {
                        a[i][j] -= l * a[k][j];
                    }
                }
            }
        }
        (0..7).map(|i| a[i][8] / a[i][i]).collect()
    }

    #[test]
    fn flat_limit_is_classical() {
        let w = rbf_fd_weights(0.0, 1.0).unwrap();
        assert_eq!(w.neighbor, 2.0 / 3.0);
        assert_eq!(w.center, -4.0);
        let w = rbf_fd_weights(0.0, 2.5).unwrap();
        assert!((w.neighbor - 2.0 / (3.0 * 6.25)).abs() < 1e-15);
    }

    #[test]
    fn classical_weights_match_taylor_expansion() {
        // sum over the six unit directions of (e.x)^2 = 3, so a weight of 2/3 per
        // neighbour reproduces u_xx + u_zz on quadratics
        let s: f64 = NEIGHBOR_DIRECTIONS.iter().map(|(x, _)| x * x).sum();
        assert!((s - 3.0).abs() < 1e-15);
        let w = rbf_fd_weights(0.0, 1.0).unwrap();
        assert!((w.neighbor * s / 2.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_shape_converges_to_classical() {
        for eps in [1e-8, 1e-6, 1e-4, 1e-3] {
            let w = rbf_fd_weights(eps, 1.0).unwrap();
            assert!((w.neighbor - 2.0 / 3.0).abs() < 1e-2 * eps.max(1e-6), "eps={eps}: {}", w.neighbor);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        for eps in [0.0, 0.01, 0.1, 0.5, 1.0, 1.9] {
            let w = rbf_fd_weights(eps, 1.0).unwrap();
            assert!((6.0 * w.neighbor + w.center).abs() <= 1e-10 * w.center.abs());
        }
    }

    #[test]
    fn closed_form_matches_dense_solve() {
        for (eps, h) in [(0.3, 1.0), (0.5, 1.0), (1.0, 1.0), (0.05, 10.0), (1.5, 1.0)] {
            let w = rbf_fd_weights(eps, h).unwrap();
            let dense = dense_weights(eps, h);
            let scale = w.center.abs();
            assert!((dense[0] - w.center).abs() < 1e-8 * scale, "{eps}: {} vs {}", dense[0], w.center);
            for d in &dense[1..] {
                assert!((d - w.neighbor).abs() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn quadratic_laplacian_within_shape_error() {
        let w = rbf_fd_weights(0.1, 1.0).unwrap();
        let got = apply(&w, 1.0, |x, z| x * x + z * z);
        // relative scale is 1 + 0.75 t + O(t^2) with t = (eps h)^2
        assert!(((got - 4.0) / 4.0).abs() <= 0.01 * 1.0, "{got}");
        let exact = apply(&rbf_fd_weights(0.0, 1.0).unwrap(), 1.0, |x, z| x * x + z * z);
        assert!((exact - 4.0).abs() < 1e-14);
    }

    #[test]
    fn quadratics_reproduced_for_all_shapes() {
        for eps in [0.0, 0.05, 0.2] {
            let h = 0.5;
            let w = rbf_fd_weights(eps, h).unwrap();
            for (a, b, c, d) in [(1.0, 2.0, 0.5, -1.0), (-3.0, 0.5, 2.0, 4.0)] {
                let f = |x: f64, z: f64| a * x * x + b * z * z + c * x * z + d * x;
                let lap = 2.0 * a + 2.0 * b;
                let got = apply(&w, h, f);
                let tol = 1.0 * (eps * h).powi(2) * lap.abs() + 1e-12;
                assert!((got - lap).abs() <= tol, "eps={eps}: {got} vs {lap}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range_shapes() {
        assert!(matches!(rbf_fd_weights(3.0, 1.0), Err(FwiError::InvalidShapeParameter { .. })));
        assert!(rbf_fd_weights(-0.1, 1.0).is_err());
        assert!(rbf_fd_weights(f64::NAN, 1.0).is_err());
        assert!(rbf_fd_weights(0.1, 0.0).is_err());
    }
}
