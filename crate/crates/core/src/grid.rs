//! Uniform hexagonal solver grids.
//!
//! The lattice has rows of constant depth spaced `h*sqrt(3)/2` apart, nodes
//! `h` apart along a row, and odd rows shifted by `h/2`. Row and column
//! indices are anchored at the physical origin so that two grids with the same
//! spacing share node positions wherever they overlap.

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::model::VelocityModel;

/// Grids above this many nodes are refused unless a larger budget is given.
pub const DEFAULT_NODE_BUDGET: usize = 5_000_000;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Unit offsets of the six lattice neighbours, in the fixed order used by the
/// neighbour table: east, north-east, north-west, west, south-west, south-east
/// (north meaning larger depth).
pub const NEIGHBOR_DIRECTIONS: [(f64, f64); 6] = [
    (1.0, 0.0),
    (0.5, SQRT3_2),
    (-0.5, SQRT3_2),
    (-1.0, 0.0),
    (-0.5, -SQRT3_2),
    (0.5, -SQRT3_2),
];

/// Resolution rule for one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSizing {
    /// Points per minimum wavelength, `Ng`.
    pub points_per_wavelength: f64,
    pub frequency: f64,
    pub lambda_min: f64,
    pub lambda_mean: f64,
}

impl GridSizing {
    pub fn new(points_per_wavelength: f64, frequency: f64, c_min: f64, c_mean: f64) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(FwiError::validation(format!("frequency must be positive, got {frequency}")));
        }
        if !(points_per_wavelength > 2.0 && points_per_wavelength.is_finite()) {
            return Err(FwiError::validation(format!(
                "points per wavelength must exceed 2, got {points_per_wavelength}"
            )));
        }
        if !(c_min > 0.0 && c_mean >= c_min && c_mean.is_finite()) {
            return Err(FwiError::validation(format!(
                "invalid reference velocities min={c_min}, mean={c_mean}"
            )));
        }
        Ok(Self {
            points_per_wavelength,
            frequency,
            lambda_min: c_min / frequency,
            lambda_mean: c_mean / frequency,
        })
    }

    pub fn from_model(model: &VelocityModel, frequency: f64, points_per_wavelength: f64) -> Result<Self> {
        Self::new(points_per_wavelength, frequency, model.min_velocity(), model.mean_velocity())
    }

    /// Lattice spacing `h = lambda_min / Ng`.
    pub fn spacing(&self) -> f64 {
        self.lambda_min / self.points_per_wavelength
    }

    /// PML thickness as a multiple of the mean wavelength.
    pub fn pml_thickness(&self, pml_in_wavelengths: f64) -> f64 {
        pml_in_wavelengths * self.lambda_mean
    }
}

/// Rectangle covered by the physical (non-PML) part of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub origin: (f64, f64),
    pub width: f64,
    pub depth: f64,
}

impl Footprint {
    pub fn of_model(model: &VelocityModel) -> Self {
        Self {
            origin: model.origin(),
            width: model.width(),
            depth: model.depth(),
        }
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        let tol = 1e-9 * self.width.max(self.depth);
        x >= self.origin.0 - tol
            && x <= self.origin.0 + self.width + tol
            && z >= self.origin.1 - tol
            && z <= self.origin.1 + self.depth + tol
    }
}

/// Role of a node in the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    /// Inside the physical footprint.
    Interior,
    /// In the absorbing collar, with a full neighbourhood.
    Pml,
    /// Outermost ring; carries the homogeneous Dirichlet closure.
    Boundary,
}

/// Node and row/column counts a grid will have, computed without building it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCounts {
    pub rows: usize,
    pub cols: usize,
    pub nodes: usize,
    /// Interior plus PML nodes, i.e. the unknowns not pinned by the outer closure.
    pub inner_nodes: usize,
}

#[derive(Debug, Clone, Copy)]
struct LatticeBox {
    row_lo: i64,
    row_hi: i64,
    col_lo: i64,
    col_hi: i64,
}

impl LatticeBox {
    fn new(footprint: &Footprint, h: f64, pml: f64) -> Self {
        let row_step = h * SQRT3_2;
        let (x0, z0) = footprint.origin;
        let up = |v: f64| (v - 1e-9).ceil() as i64;
        let down = |v: f64| (v + 1e-9).floor() as i64;
        Self {
            row_lo: down((z0 - pml) / row_step),
            row_hi: up((z0 + footprint.depth + pml) / row_step),
            // odd rows are shifted by h/2, so reach half a step further left
            col_lo: down((x0 - pml) / h - 0.5),
            col_hi: up((x0 + footprint.width + pml) / h),
        }
    }

    fn rows(&self) -> usize {
        (self.row_hi - self.row_lo + 1) as usize
    }

    fn cols(&self) -> usize {
        (self.col_hi - self.col_lo + 1) as usize
    }

    fn counts(&self) -> GridCounts {
        let (rows, cols) = (self.rows(), self.cols());
        GridCounts {
            rows,
            cols,
            nodes: rows * cols,
            inner_nodes: rows.saturating_sub(2) * cols.saturating_sub(2),
        }
    }
}

/// Counts for the grid [`HexGrid::from_sizing`] would build.
pub fn predict_counts(footprint: &Footprint, sizing: &GridSizing, pml_in_wavelengths: f64) -> GridCounts {
    LatticeBox::new(footprint, sizing.spacing(), sizing.pml_thickness(pml_in_wavelengths)).counts()
}

/// Hexagonal node set covering a physical footprint plus a PML collar.
#[derive(Debug, Clone)]
pub struct HexGrid {
    h: f64,
    pml_thickness: f64,
    footprint: Footprint,
    lattice: LatticeBox,
    row_major: bool,
    positions: Vec<(f64, f64)>,
    kinds: Vec<NodeKind>,
    neighbors: Vec<[Option<u32>; 6]>,
}

impl HexGrid {
    /// Grid for `model` at frequency `f`: spacing `min(c)/(f*Ng)`, collar
    /// `pml_in_wavelengths * mean(c)/f`.
    pub fn build(model: &VelocityModel, frequency: f64, points_per_wavelength: f64, pml_in_wavelengths: f64) -> Result<Self> {
        let sizing = GridSizing::from_model(model, frequency, points_per_wavelength)?;
        Self::from_sizing(Footprint::of_model(model), &sizing, pml_in_wavelengths, DEFAULT_NODE_BUDGET)
    }

    pub fn from_sizing(footprint: Footprint, sizing: &GridSizing, pml_in_wavelengths: f64, node_budget: usize) -> Result<Self> {
        if !(pml_in_wavelengths >= 0.0 && pml_in_wavelengths.is_finite()) {
            return Err(FwiError::validation(format!(
                "PML thickness in wavelengths must be non-negative, got {pml_in_wavelengths}"
            )));
        }
        Self::with_spacing(footprint, sizing.spacing(), sizing.pml_thickness(pml_in_wavelengths), node_budget)
    }

    /// Grid with an explicit spacing and collar thickness.
    pub fn with_spacing(footprint: Footprint, h: f64, pml_thickness: f64, node_budget: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(FwiError::validation(format!("grid spacing must be positive, got {h}")));
        }
        if !(footprint.width > 0.0 && footprint.depth > 0.0) {
            return Err(FwiError::validation("footprint must have positive width and depth"));
        }
        if !(pml_thickness >= 0.0 && pml_thickness.is_finite()) {
            return Err(FwiError::validation(format!("PML thickness must be non-negative, got {pml_thickness}")));
        }
        let lattice = LatticeBox::new(&footprint, h, pml_thickness);
        // float budget check first: huge extents would overflow the integer product
        let approx = lattice.rows() as f64 * lattice.cols() as f64;
        if approx > node_budget as f64 {
            return Err(FwiError::InfeasibleResolution {
                nodes: approx.min(usize::MAX as f64) as usize,
                budget: node_budget,
            });
        }
        let (rows, cols) = (lattice.rows(), lattice.cols());
        let row_major = cols <= rows;
        let n = rows * cols;

        let mut grid = Self {
            h,
            pml_thickness,
            footprint,
            lattice,
            row_major,
            positions: vec![(0.0, 0.0); n],
            kinds: vec![NodeKind::Boundary; n],
            neighbors: vec![[None; 6]; n],
        };
        for r in lattice.row_lo..=lattice.row_hi {
            for c in lattice.col_lo..=lattice.col_hi {
                let idx = grid.index_unchecked(r, c);
                let pos = grid.lattice_position(r, c);
                grid.positions[idx] = pos;
                let on_ring = r == lattice.row_lo || r == lattice.row_hi || c == lattice.col_lo || c == lattice.col_hi;
                grid.kinds[idx] = if on_ring {
                    NodeKind::Boundary
                } else if footprint.contains(pos.0, pos.1) {
                    NodeKind::Interior
                } else {
                    NodeKind::Pml
                };
                let mut nb = [None; 6];
                for (slot, (dr, dc)) in neighbor_steps(r).into_iter().enumerate() {
                    nb[slot] = grid.index(r + dr, c + dc).map(|i| i as u32);
                }
                grid.neighbors[idx] = nb;
            }
        }
        Ok(grid)
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Distance between lattice rows, `h*sqrt(3)/2`.
    pub fn row_spacing(&self) -> f64 {
        self.h * SQRT3_2
    }

    /// Area of the hexagonal cell owned by one node, `(sqrt(3)/2) h^2`.
    pub fn cell_area(&self) -> f64 {
        SQRT3_2 * self.h * self.h
    }

    pub fn pml_thickness(&self) -> f64 {
        self.pml_thickness
    }

    pub fn footprint(&self) -> &Footprint {
        &self.footprint
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn counts(&self) -> GridCounts {
        self.lattice.counts()
    }

    /// Number of interior plus PML nodes.
    pub fn inner_node_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k != NodeKind::Boundary).count()
    }

    pub fn position(&self, node: usize) -> (f64, f64) {
        self.positions[node]
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.kinds[node] == NodeKind::Interior
    }

    pub fn is_pml(&self, node: usize) -> bool {
        self.kinds[node] == NodeKind::Pml
    }

    /// The six neighbours in [`NEIGHBOR_DIRECTIONS`] order; `None` past the lattice edge.
    pub fn neighbors(&self, node: usize) -> [Option<usize>; 6] {
        self.neighbors[node].map(|n| n.map(|v| v as usize))
    }

    /// Node at lattice row `r`, column `c`, if it exists.
    pub fn index(&self, r: i64, c: i64) -> Option<usize> {
        let l = &self.lattice;
        if r < l.row_lo || r > l.row_hi || c < l.col_lo || c > l.col_hi {
            return None;
        }
        Some(self.index_unchecked(r, c))
    }

    fn index_unchecked(&self, r: i64, c: i64) -> usize {
        let l = &self.lattice;
        let (ri, ci) = ((r - l.row_lo) as usize, (c - l.col_lo) as usize);
        if self.row_major {
            ri * l.cols() + ci
        } else {
            ci * l.rows() + ri
        }
    }

    fn lattice_position(&self, r: i64, c: i64) -> (f64, f64) {
        ((c as f64 + row_offset(r)) * self.h, r as f64 * self.row_spacing())
    }

    /// The three nodes of the lattice triangle containing `(x, z)` and the
    /// point's barycentric weights in it. Weights are non-negative and sum to one.
    pub fn locate(&self, x: f64, z: f64) -> Result<[(usize, f64); 3]> {
        if !self.footprint.contains(x, z) {
            return Err(FwiError::OutsideDomain { x, z });
        }
        let fr = z / self.row_spacing();
        let r = (fr.floor() as i64).clamp(self.lattice.row_lo, self.lattice.row_hi - 1);
        let s = (fr - r as f64).clamp(0.0, 1.0);
        let (o_lo, o_hi) = (row_offset(r), row_offset(r + 1));
        let shift = o_hi - o_lo;
        // skew coordinates: both rows sit on integer u
        let u = x / self.h - o_lo - s * shift;
        let i = u.floor() as i64;
        let fu = (u - i as f64).clamp(0.0, 1.0);

        let node = |rr: i64, cc: i64| {
            self.index(rr, cc)
                .ok_or_else(|| FwiError::Numerical(format!("lattice node ({rr}, {cc}) missing")))
        };
        let tri = if shift > 0.0 {
            if fu + s <= 1.0 {
                [(node(r, i)?, 1.0 - fu - s), (node(r, i + 1)?, fu), (node(r + 1, i)?, s)]
            } else {
                [(node(r, i + 1)?, 1.0 - s), (node(r + 1, i)?, 1.0 - fu), (node(r + 1, i + 1)?, fu + s - 1.0)]
            }
        } else if fu >= s {
            [(node(r, i)?, 1.0 - fu), (node(r, i + 1)?, fu - s), (node(r + 1, i + 1)?, s)]
        } else {
            [(node(r, i)?, 1.0 - s), (node(r + 1, i)?, s - fu), (node(r + 1, i + 1)?, fu)]
        };
        Ok(tri)
    }
}

fn row_offset(r: i64) -> f64 {
    if r.rem_euclid(2) == 1 {
        0.5
    } else {
        0.0
    }
}

/// Lattice (row, col) steps matching [`NEIGHBOR_DIRECTIONS`].
fn neighbor_steps(r: i64) -> [(i64, i64); 6] {
    // odd rows are shifted right, so their diagonal neighbours sit at c and c+1
    let d = if r.rem_euclid(2) == 1 { 1 } else { 0 };
    [(0, 1), (1, d), (1, d - 1), (0, -1), (-1, d - 1), (-1, d)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(h: f64, pml: f64) -> HexGrid {
        let fp = Footprint {
            origin: (0.0, 0.0),
            width: 1.0,
            depth: 1.0,
        };
        HexGrid::with_spacing(fp, h, pml, DEFAULT_NODE_BUDGET).unwrap()
    }

    #[test]
    fn marmousi_spacing() {
        let model = VelocityModel::constant(151, 551, 20.0, 20.0, 1500.0).unwrap();
        let sizing = GridSizing::from_model(&model, 1.0, 8.5).unwrap();
        assert!((sizing.spacing() - 1500.0 / 8.5).abs() < 1e-12);
        assert!((sizing.spacing() - 176.470_588).abs() < 1e-5);
    }

    #[test]
    fn doubling_frequency_halves_spacing() {
        let a = GridSizing::new(8.5, 3.0, 1500.0, 2000.0).unwrap();
        let b = GridSizing::new(8.5, 6.0, 1500.0, 2000.0).unwrap();
        assert_eq!(a.spacing(), 2.0 * b.spacing());
    }

    #[test]
    fn sizing_rejects_bad_inputs() {
        assert!(GridSizing::new(2.0, 1.0, 1500.0, 1500.0).is_err());
        assert!(GridSizing::new(8.5, 0.0, 1500.0, 1500.0).is_err());
        assert!(GridSizing::new(8.5, -1.0, 1500.0, 1500.0).is_err());
    }

    #[test]
    fn node_budget_is_enforced() {
        let model = VelocityModel::constant(151, 551, 20.0, 20.0, 1500.0).unwrap();
        let sizing = GridSizing::from_model(&model, 50.0, 10.0).unwrap();
        let err = HexGrid::from_sizing(Footprint::of_model(&model), &sizing, 1.0, 1000).unwrap_err();
        assert!(matches!(err, FwiError::InfeasibleResolution { budget: 1000, .. }));
    }

    #[test]
    fn neighbours_match_brute_force_scan() {
        // ~100 nodes including the collar
        let grid = unit_square(0.125, 0.1);
        assert!(grid.len() > 80 && grid.len() < 200, "{}", grid.len());
        let h = grid.spacing();
        for i in 0..grid.len() {
            let (xi, zi) = grid.position(i);
            let mut found: Vec<usize> = (0..grid.len())
                .filter(|&j| {
                    let (xj, zj) = grid.position(j);
                    j != i && ((xi - xj).powi(2) + (zi - zj).powi(2)).sqrt() < 1.5 * h
                })
                .collect();
            found.sort_unstable();
            for j in &found {
                let (xj, zj) = grid.position(*j);
                let d = ((xi - xj).powi(2) + (zi - zj).powi(2)).sqrt();
                assert!((d - h).abs() <= 1e-9 * h);
            }
            let mut table: Vec<usize> = grid.neighbors(i).iter().flatten().copied().collect();
            table.sort_unstable();
            assert_eq!(table, found, "node {i}");
            if grid.kind(i) != NodeKind::Boundary {
                assert_eq!(table.len(), 6);
            }
        }
    }

    #[test]
    fn neighbour_slots_follow_directions() {
        let grid = unit_square(0.1, 0.05);
        let h = grid.spacing();
        for i in 0..grid.len() {
            let (xi, zi) = grid.position(i);
            for (slot, nb) in grid.neighbors(i).iter().enumerate() {
                if let Some(j) = nb {
                    let (xj, zj) = grid.position(*j);
                    let (ex, ez) = NEIGHBOR_DIRECTIONS[slot];
                    assert!((xj - xi - ex * h).abs() < 1e-9 && (zj - zi - ez * h).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn collar_covers_padded_domain_and_masks_are_disjoint() {
        let grid = unit_square(0.07, 0.2);
        let (mut xmin, mut xmax, mut zmin, mut zmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, z) in grid.positions() {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            zmin = zmin.min(z);
            zmax = zmax.max(z);
        }
        assert!(xmin <= -0.2 && zmin <= -0.2 && xmax >= 1.2 && zmax >= 1.2);
        let interior = grid.kinds().iter().filter(|k| **k == NodeKind::Interior).count();
        let pml = grid.kinds().iter().filter(|k| **k == NodeKind::Pml).count();
        let boundary = grid.kinds().iter().filter(|k| **k == NodeKind::Boundary).count();
        assert_eq!(interior + pml + boundary, grid.len());
        assert_eq!(grid.inner_node_count(), interior + pml);
        assert_eq!(grid.counts().inner_nodes, interior + pml);
        for i in 0..grid.len() {
            let (x, z) = grid.position(i);
            if grid.is_interior(i) {
                assert!(grid.footprint().contains(x, z));
            }
        }
    }

    #[test]
    fn overlapping_grids_share_nodes() {
        let small = unit_square(0.1, 0.0);
        let fp = Footprint {
            origin: (0.0, 0.0),
            width: 1.0,
            depth: 1.0,
        };
        let big = HexGrid::with_spacing(fp, 0.1, 0.5, DEFAULT_NODE_BUDGET).unwrap();
        for &(x, z) in small.positions() {
            let tri = big.locate(x.clamp(0.0, 1.0), z.clamp(0.0, 1.0)).unwrap();
            assert!(tri.iter().all(|(_, w)| w.is_finite()));
        }
        for i in (0..small.len()).filter(|&i| small.is_interior(i)) {
            let (x, z) = small.position(i);
            let tri = big.locate(x, z).unwrap();
            let hit = tri.iter().find(|(_, w)| (*w - 1.0).abs() < 1e-9).unwrap();
            let (bx, bz) = big.position(hit.0);
            assert!((bx - x).abs() < 1e-12 && (bz - z).abs() < 1e-12);
        }
    }

    #[test]
    fn offset_footprints_share_exact_positions() {
        let small = unit_square(0.1, 0.2);
        let fp = Footprint {
            origin: (-1.37, -2.05),
            width: 4.0,
            depth: 4.5,
        };
        let big = HexGrid::with_spacing(fp, 0.1, 0.3, DEFAULT_NODE_BUDGET).unwrap();
        let key = |p: (f64, f64)| (p.0.to_bits(), p.1.to_bits());
        let positions: std::collections::HashSet<_> = big.positions().iter().map(|&p| key(p)).collect();
        for i in 0..small.len() {
            assert!(positions.contains(&key(small.position(i))), "node {i} at {:?}", small.position(i));
        }
    }

    #[test]
    fn locate_reproduces_linear_functions() {
        let grid = unit_square(0.09, 0.1);
        let f = |x: f64, z: f64| 3.0 - 2.0 * x + 5.0 * z;
        for k in 0..400 {
            let x = (k as f64 * 0.618_033_988_7).fract();
            let z = (k as f64 * 0.414_213_562_3).fract();
            let tri = grid.locate(x, z).unwrap();
            let sum: f64 = tri.iter().map(|(_, w)| w).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(tri.iter().all(|(_, w)| *w >= -1e-12));
            let interp: f64 = tri
                .iter()
                .map(|(n, w)| {
                    let (xn, zn) = grid.position(*n);
                    w * f(xn, zn)
                })
                .sum();
            assert!((interp - f(x, z)).abs() < 1e-12);
            for (n, _) in tri {
                let (xn, zn) = grid.position(n);
                assert!(((xn - x).powi(2) + (zn - z).powi(2)).sqrt() <= grid.spacing() + 1e-12);
            }
        }
    }

    #[test]
    fn locate_rejects_outside_points() {
        let grid = unit_square(0.1, 0.1);
        assert!(matches!(grid.locate(1.5, 0.5), Err(FwiError::OutsideDomain { .. })));
        assert!(grid.locate(-0.01, 0.5).is_err());
    }

    #[test]
    fn predicted_counts_match_built_grid() {
        let model = VelocityModel::constant(41, 81, 25.0, 25.0, 1800.0).unwrap();
        for f in [1.0, 2.0, 3.7, 8.0] {
            let sizing = GridSizing::from_model(&model, f, 8.5).unwrap();
            let grid = HexGrid::from_sizing(Footprint::of_model(&model), &sizing, 1.0, DEFAULT_NODE_BUDGET).unwrap();
            let predicted = predict_counts(&Footprint::of_model(&model), &sizing, 1.0);
            assert_eq!(predicted, grid.counts());
            assert_eq!(predicted.inner_nodes, grid.inner_node_count());
        }
    }
}
