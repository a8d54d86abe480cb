//! Discrete point sources.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::HexGrid;

/// Right-hand side for a unit point source at `position`: the barycentric
/// weights over the enclosing lattice triangle, each divided by the node cell
/// area, so that `sum(rhs) * cell_area == 1`.
pub fn point_source_rhs(grid: &HexGrid, position: (f64, f64)) -> Result<Vec<Complex64>> {
    let mut rhs = vec![Complex64::default(); grid.len()];
    let area = grid.cell_area();
    for (node, w) in grid.locate(position.0, position.1)? {
        rhs[node] += Complex64::new(w / area, 0.0);
    }
    Ok(rhs)
}
