//! Transfer between rectangular model grids and hexagonal solver grids.
//!
//! [`sample_to_hex`] averages model samples with a separable hat kernel whose
//! half-width is the larger of the model spacing and the lattice spacing; on
//! grids finer than the model this is plain bilinear interpolation. Points in
//! the collar take the value at the nearest footprint point.
//! [`project_to_model`] is the exact transpose.

use crate::error::Result;
use crate::grid::{HexGrid, NodeKind};
use crate::model::{ModelField, Quantity, VelocityModel};

/// Which nodes contribute when projecting back to the model grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSelection {
    /// Physical-domain nodes only.
    Interior,
    /// Interior and PML nodes. Boundary nodes never contribute.
    InteriorAndPml,
}

impl NodeSelection {
    fn admits(self, kind: NodeKind) -> bool {
        match self {
            NodeSelection::Interior => kind == NodeKind::Interior,
            NodeSelection::InteriorAndPml => kind != NodeKind::Boundary,
        }
    }
}

/// Bilinear weights of the point `(x, z)` over the model samples, clamped to
/// the model footprint.
pub fn bilinear_weights(model: &VelocityModel, x: f64, z: f64) -> [(usize, f64); 4] {
    let (x0, z0) = model.origin();
    let fx = ((x - x0) / model.dx()).clamp(0.0, (model.nx() - 1) as f64);
    let fz = ((z - z0) / model.dz()).clamp(0.0, (model.nz() - 1) as f64);
    let j = (fx.floor() as usize).min(model.nx() - 2);
    let i = (fz.floor() as usize).min(model.nz() - 2);
    let (tx, tz) = (fx - j as f64, fz - i as f64);
    let nx = model.nx();
    [
        (i * nx + j, (1.0 - tx) * (1.0 - tz)),
        (i * nx + j + 1, tx * (1.0 - tz)),
        ((i + 1) * nx + j, (1.0 - tx) * tz),
        ((i + 1) * nx + j + 1, tx * tz),
    ]
}

/// Hat-kernel weights along one axis: samples at `k * d`, point at `f * d`
/// (`f` in sample units), half-width `a` in sample units (`a >= 1`).
fn axis_weights(f: f64, a: f64, n: usize) -> Vec<(usize, f64)> {
    let lo = (f - a).ceil().max(0.0) as usize;
    let hi = ((f + a).floor() as usize).min(n - 1);
    let mut w: Vec<(usize, f64)> = (lo..=hi)
        .map(|k| (k, 1.0 - (k as f64 - f).abs() / a))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let total: f64 = w.iter().map(|(_, v)| v).sum();
    for (_, v) in &mut w {
        *v /= total;
    }
    w
}

/// Weights of the point `(x, z)` for a lattice of spacing `h`. Reduces to
/// [`bilinear_weights`] when `h` does not exceed the model spacing.
pub fn transfer_weights(model: &VelocityModel, x: f64, z: f64, h: f64) -> Vec<(usize, f64)> {
    if h <= model.dx() && h <= model.dz() {
        return bilinear_weights(model, x, z).into_iter().filter(|(_, w)| *w != 0.0).collect();
    }
    let (x0, z0) = model.origin();
    let fx = ((x - x0) / model.dx()).clamp(0.0, (model.nx() - 1) as f64);
    let fz = ((z - z0) / model.dz()).clamp(0.0, (model.nz() - 1) as f64);
    let wx = axis_weights(fx, (h / model.dx()).max(1.0), model.nx());
    let wz = axis_weights(fz, (h / model.dz()).max(1.0), model.nz());
    let nx = model.nx();
    let mut out = Vec::with_capacity(wx.len() * wz.len());
    for &(i, a) in &wz {
        for &(j, b) in &wx {
            out.push((i * nx + j, a * b));
        }
    }
    out
}

/// Interpolates a model field onto every grid node.
pub fn sample_to_hex(field: &ModelField, model: &VelocityModel, grid: &HexGrid) -> Result<Vec<f64>> {
    model.check_field(field)?;
    let values = field.values();
    Ok(grid
        .positions()
        .iter()
        .map(|&(x, z)| {
            transfer_weights(model, x, z, grid.spacing())
                .iter()
                .map(|(k, w)| w * values[*k])
                .sum()
        })
        .collect())
}

/// Transpose of [`sample_to_hex`] restricted to the selected nodes. The result
/// is tagged as a gradient.
pub fn project_to_model(
    node_values: &[f64],
    grid: &HexGrid,
    model: &VelocityModel,
    selection: NodeSelection,
) -> Result<ModelField> {
    if node_values.len() != grid.len() {
        return Err(crate::error::FwiError::ShapeMismatch(format!(
            "{} node values for a grid of {} nodes",
            node_values.len(),
            grid.len()
        )));
    }
    let mut out = vec![0.0; model.nz() * model.nx()];
    for (node, (&(x, z), &v)) in grid.positions().iter().zip(node_values).enumerate() {
        if !selection.admits(grid.kind(node)) || v == 0.0 {
            continue;
        }
        for (k, w) in transfer_weights(model, x, z, grid.spacing()) {
            out[k] += w * v;
        }
    }
    ModelField::new(model.nz(), model.nx(), Quantity::Gradient, out)
}
