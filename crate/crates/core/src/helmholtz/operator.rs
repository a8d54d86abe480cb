//! Assembly of the PML-damped Helmholtz operator on a hexagonal grid.
//!
//! Rows are the stretched equation multiplied through by `s_x s_z`:
//!
//! ```text
//! -d/dx(s_z/s_x du/dx) - d/dz(s_x/s_z du/dz) - omega^2 m s_x s_z u
//! ```
//!
//! The anisotropic operator is discretised edge by edge. For a diagonal tensor
//! `diag(kx, kz)` on the hexagon, the horizontal edges carry `(kx - kz/3)/h^2`
//! and the four slanted edges carry `2 kz/(3 h^2)`; with `kx = kz = 1` this is
//! the classical 7-point Laplacian. Coefficients are evaluated at edge
//! midpoints and scaled by the RBF-FD weight ratio, so the matrix is complex
//! symmetric. Boundary-ring nodes carry identity rows and are decoupled from
//! their neighbours (homogeneous Dirichlet closure).

use std::time::Instant;

use num_complex::Complex64;

use super::pml::{pml_stretch, PmlConfig};
use super::stencil::{rbf_fd_weights, ShapeParameter};
use crate::error::{FwiError, Result};
use crate::grid::{HexGrid, NodeKind};

/// Compressed sparse row matrix with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds from rows of `(column, value)`. Columns within a row must be distinct.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(FwiError::validation(format!("duplicate column {}", w[0].0)));
                }
            }
            for (c, v) in row {
                if c >= n {
                    return Err(FwiError::ShapeMismatch(format!("column {c} out of range for size {n}")));
                }
                cols.push(c);
                values.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { n, row_ptr, cols, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.row(i).find(|(c, _)| *c == j).map(|(_, v)| v).unwrap_or_default()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// True when `A[i][j] == A[j][i]` for every stored entry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }
}

/// Assembled operator together with what the gradient needs from it.
#[derive(Debug, Clone)]
pub struct HelmholtzOperator {
    matrix: SparseMatrix,
    omega: f64,
    m_nodes: Vec<f64>,
    mass_scale: Vec<Complex64>,
    assemble_seconds: f64,
}

impl HelmholtzOperator {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn m_nodes(&self) -> &[f64] {
        &self.m_nodes
    }

    /// `s_x s_z` per node; zero on boundary-ring nodes, whose rows do not
    /// depend on the model. The derivative of row `i` with respect to
    /// `m_i` is `-omega^2 * mass_scale[i]`.
    pub fn mass_scale(&self) -> &[Complex64] {
        &self.mass_scale
    }

    pub fn assemble_seconds(&self) -> f64 {
        self.assemble_seconds
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Assembles `H` on `grid` for slowness squared `m_nodes` (one value per node).
pub fn assemble(
    grid: &HexGrid,
    m_nodes: &[f64],
    omega: f64,
    pml: &PmlConfig,
    shape: &ShapeParameter,
) -> Result<HelmholtzOperator> {
    let start = Instant::now();
    let n = grid.len();
    if m_nodes.len() != n {
        return Err(FwiError::ShapeMismatch(format!("{} model values for {n} nodes", m_nodes.len())));
    }
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(FwiError::validation(format!("angular frequency must be non-negative, got {omega}")));
    }
    if let Some(bad) = m_nodes.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(FwiError::validation(format!("slowness squared must be positive, found {bad}")));
    }
    let h = grid.spacing();
    let h2 = h * h;
    let footprint = *grid.footprint();

    let mut scale = vec![0.0; n];
    for (i, s) in scale.iter_mut().enumerate() {
        let eps = shape.at(omega * m_nodes[i].sqrt(), h);
        *s = rbf_fd_weights(eps, h)?.relative_scale(h);
    }

    let mut mass_scale = vec![Complex64::new(0.0, 0.0); n];
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        if grid.kind(i) == NodeKind::Boundary {
            rows.push(vec![(i, Complex64::new(1.0, 0.0))]);
            continue;
        }
        let (xi, zi) = grid.position(i);
        let (sx, sz) = pml_stretch((xi, zi), &footprint, pml);
        mass_scale[i] = sx * sz;
        let mut row = Vec::with_capacity(7);
        let mut diag = -omega * omega * m_nodes[i] * mass_scale[i];
        for (slot, nb) in grid.neighbors(i).iter().enumerate() {
            let j = nb.expect("non-boundary nodes have six neighbours");
            let (xj, zj) = grid.position(j);
            let mid = (0.5 * (xi + xj), 0.5 * (zi + zj));
            let (mx, mz) = pml_stretch(mid, &footprint, pml);
            let kx = mz / mx;
            let kz = mx / mz;
            let edge_scale = 0.5 * (scale[i] + scale[j]);
            let coef = if slot % 3 == 0 {
                (kx - kz / 3.0) * (edge_scale / h2)
            } else {
                kz * (2.0 * edge_scale / (3.0 * h2))
            };
            diag += coef;
            if grid.kind(j) != NodeKind::Boundary {
                row.push((j, -coef));
            }
        }
        row.push((i, diag));
        rows.push(row);
    }
    let matrix = SparseMatrix::from_rows(rows)?;
    Ok(HelmholtzOperator {
        matrix,
        omega,
        m_nodes: m_nodes.to_vec(),
        mass_scale,
        assemble_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Footprint, DEFAULT_NODE_BUDGET};

    fn grid(h: f64, pml: f64) -> HexGrid {
        let fp = Footprint {
            origin: (0.0, 0.0),
            width: 1000.0,
            depth: 800.0,
        };
        HexGrid::with_spacing(fp, h, pml, DEFAULT_NODE_BUDGET).unwrap()
    }

    #[test]
    fn zero_frequency_annihilates_constants() {
        let g = grid(50.0, 100.0);
        let m = vec![1.0 / (2000.0f64 * 2000.0); g.len()];
        let pml = PmlConfig::standard(100.0, 0.0).unwrap();
        let op = assemble(&g, &m, 0.0, &pml, &ShapeParameter::default()).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); g.len()];
        let y = op.matrix().mul_vec(&ones);
        for i in 0..g.len() {
            let interior_ring = g.neighbors(i).iter().flatten().all(|&j| g.kind(j) != NodeKind::Boundary);
            if g.kind(i) != NodeKind::Boundary && interior_ring {
                assert!(y[i].norm() < 1e-12 / (50.0 * 50.0), "row {i}: {}", y[i]);
            }
        }
    }

    #[test]
    fn matrix_is_complex_symmetric_with_seven_point_rows() {
        let g = grid(60.0, 150.0);
        let m: Vec<f64> = g.positions().iter().map(|(x, z)| 1.0 / (1500.0 + 0.3 * x + 0.5 * z).powi(2)).collect();
        let pml = PmlConfig::standard(150.0, 2.0 * std::f64::consts::PI * 3.0).unwrap();
        let op = assemble(&g, &m, pml.omega, &pml, &ShapeParameter::Constant(0.002)).unwrap();
        assert!(op.matrix().is_symmetric());
        assert!(op.matrix().max_row_nnz() <= 7);
        assert_eq!(op.dim(), g.len());
    }

    #[test]
    fn assembly_is_deterministic() {
        let g = grid(70.0, 140.0);
        let m = vec![4e-7; g.len()];
        let pml = PmlConfig::standard(140.0, 12.0).unwrap();
        let a = assemble(&g, &m, 12.0, &pml, &ShapeParameter::default()).unwrap();
        let b = assemble(&g, &m, 12.0, &pml, &ShapeParameter::default()).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn plane_wave_symbol_matches_dispersion() {
        // apply the interior stencil to exp(i k x) along a lattice row
        let h = 20.0;
        let g = grid(h, 0.0);
        let m = vec![1.0; g.len()];
        let pml = PmlConfig::standard(1.0, 0.0).unwrap();
        let op = assemble(&g, &m, 0.0, &pml, &ShapeParameter::default()).unwrap();
        let centre = (0..g.len())
            .find(|&i| g.neighbors(i).iter().flatten().all(|&j| g.kind(j) != NodeKind::Boundary) && g.kind(i) != NodeKind::Boundary)
            .unwrap();
        for kh in [0.1, 0.3, 0.6] {
            let k = kh / h;
            let u: Vec<Complex64> = g.positions().iter().map(|(x, _)| Complex64::from_polar(1.0, k * x)).collect();
            let y = op.matrix().mul_vec(&u);
            let symbol = (y[centre] / u[centre]).re;
            // -Laplacian symbol is k^2 - k^4 h^2/16 + O(k^6 h^4)
            let rel = (symbol - k * k).abs() / (k * k);
            assert!(rel <= 0.07 * kh * kh, "kh={kh}: rel {rel}");
            assert!((symbol - (k * k - k.powi(4) * h * h / 16.0)).abs() / (k * k) < 0.01 * kh.powi(4));
        }
    }

    #[test]
    fn plane_wave_matched_shape_removes_leading_dispersion() {
        let h = 20.0;
        let c = 2000.0;
        let g = grid(h, 0.0);
        let m = vec![1.0 / (c * c); g.len()];
        let centre = (0..g.len())
            .find(|&i| g.neighbors(i).iter().flatten().all(|&j| g.kind(j) != NodeKind::Boundary) && g.kind(i) != NodeKind::Boundary)
            .unwrap();
        for kh in [0.2, 0.4, 0.74] {
            let k = kh / h;
            let omega = k * c;
            let pml = PmlConfig::standard(1.0, omega).unwrap();
            let u: Vec<Complex64> = g.positions().iter().map(|(x, _)| Complex64::from_polar(1.0, k * x)).collect();
            let residual = |shape: &ShapeParameter| {
                let op = assemble(&g, &m, omega, &pml, shape).unwrap();
                (op.matrix().mul_vec(&u)[centre] / u[centre]).re / (k * k)
            };
            let classical = residual(&ShapeParameter::default());
            let matched = residual(&ShapeParameter::plane_wave_matched());
            assert!((classical + kh * kh / 16.0).abs() < 0.01 * kh.powi(4), "kh={kh}: {classical}");
            assert!(matched.abs() < 0.01 * kh.powi(4), "kh={kh}: {matched}");
        }
    }

    #[test]
    fn rejects_non_positive_model() {
        let g = grid(100.0, 100.0);
        let mut m = vec![1e-7; g.len()];
        m[3] = 0.0;
        let pml = PmlConfig::standard(100.0, 1.0).unwrap();
        assert!(assemble(&g, &m, 1.0, &pml, &ShapeParameter::default()).is_err());
    }

    #[test]
    fn propagates_invalid_shape() {
        let g = grid(100.0, 100.0);
        let m = vec![1e-7; g.len()];
        let pml = PmlConfig::standard(100.0, 1.0).unwrap();
        let err = assemble(&g, &m, 1.0, &pml, &ShapeParameter::Constant(1.0)).unwrap_err();
        assert!(matches!(err, FwiError::InvalidShapeParameter { .. }));
    }
}
