//! Least-squares misfit and its adjoint-state gradient.
//!
//! For `J(m) = 1/2 sum_s |d_s - P u_s|^2` with `H(m) u_s = b_s`, the adjoint
//! fields solve `H^H lambda_s = P^T r_s` and
//!
//! ```text
//! dJ/dm_node = -omega^2 Re( (s_x s_z)_node * sum_s u_s conj(lambda_s) )
//! ```
//!
//! The node gradient is mapped back to the model grid with the transpose of the
//! model-to-grid interpolation over every node whose operator row depends on
//! the model (interior and collar).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::forward::{forward_map, AcquisitionGeometry, ForwardSolution, FrequencyDataset, SolverConfig};
use crate::grid::HexGrid;
use crate::model::{ModelField, Quantity, VelocityModel};
use crate::transfer::{project_to_model, NodeSelection};

#[derive(Debug, Clone, PartialEq)]
pub struct MisfitReport {
    pub value: f64,
    /// `observed - predicted`, row-major by source.
    pub residual: Vec<Complex64>,
    pub gradient_norm: Option<f64>,
    pub omega: f64,
}

pub fn misfit(observed: &FrequencyDataset, predicted: &FrequencyDataset) -> Result<MisfitReport> {
    let rel = (observed.omega() - predicted.omega()).abs() / observed.omega();
    if rel > 1e-12 {
        return Err(FwiError::validation(format!(
            "frequency mismatch: observed omega {} vs predicted {}",
            observed.omega(),
            predicted.omega()
        )));
    }
    if observed.n_sources() != predicted.n_sources() || observed.n_receivers() != predicted.n_receivers() {
        return Err(FwiError::ShapeMismatch(format!(
            "observed {}x{} vs predicted {}x{}",
            observed.n_sources(),
            observed.n_receivers(),
            predicted.n_sources(),
            predicted.n_receivers()
        )));
    }
    let residual: Vec<Complex64> = observed.data().iter().zip(predicted.data()).map(|(d, p)| d - p).collect();
    let value = 0.5 * residual.iter().map(|r| r.norm_sqr()).sum::<f64>();
    Ok(MisfitReport {
        value,
        residual,
        gradient_norm: None,
        omega: observed.omega(),
    })
}

/// Gradient of the misfit with respect to slowness squared on the model grid.
///
/// `solution` must come from [`forward_map`] on the same `m`, `grid` and
/// geometry; its factorization is reused for the adjoint solves.
pub fn adjoint_gradient(
    model: &VelocityModel,
    observed: &FrequencyDataset,
    grid: &HexGrid,
    solution: &ForwardSolution,
) -> Result<(MisfitReport, ModelField)> {
    let predicted = &solution.dataset;
    let mut report = misfit(observed, predicted)?;
    let n_sources = observed.n_sources();
    let n_receivers = observed.n_receivers();
    if solution.wavefields.len() != n_sources {
        return Err(FwiError::ShapeMismatch(format!(
            "{} wavefields for {n_sources} sources",
            solution.wavefields.len()
        )));
    }
    if solution.factorization.dim() != grid.len() || solution.operator.dim() != grid.len() {
        return Err(FwiError::ShapeMismatch("factorization does not match the grid".into()));
    }
    let omega = solution.operator.omega();
    let mass = solution.operator.mass_scale();

    let partials: Vec<Vec<f64>> = (0..n_sources)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let r = &report.residual[s * n_receivers..(s + 1) * n_receivers];
            let mut lambda = solution.receivers.inject(r)?;
            solution.factorization.solve_adjoint_in_place(&mut lambda)?;
            let u = &solution.wavefields[s];
            Ok(u.iter()
                .zip(&lambda)
                .zip(mass)
                .map(|((u, l), sigma)| (sigma * u * l.conj()).re)
                .collect())
        })
        .collect::<Result<_>>()?;

    // fixed-order reduction keeps the result independent of thread scheduling
    let mut g_nodes = vec![0.0; grid.len()];
    for part in &partials {
        for (g, p) in g_nodes.iter_mut().zip(part) {
            *g += p;
        }
    }
    let factor = -omega * omega;
    for g in &mut g_nodes {
        *g *= factor;
    }
    let gradient = project_to_model(&g_nodes, grid, model, NodeSelection::InteriorAndPml)?;
    report.gradient_norm = Some(gradient.norm());
    if !(report.value.is_finite() && gradient.values().iter().all(|v| v.is_finite())) {
        return Err(FwiError::Numerical("non-finite misfit or gradient".into()));
    }
    Ok((report, gradient))
}

/// Single-frequency misfit problem on a fixed grid.
#[derive(Debug, Clone)]
pub struct FwiProblem<'a> {
    pub model: &'a VelocityModel,
    pub observed: &'a FrequencyDataset,
    pub geometry: &'a AcquisitionGeometry,
    pub grid: &'a HexGrid,
    pub config: &'a SolverConfig,
}

impl FwiProblem<'_> {
    fn field(&self, m: &[f64]) -> Result<ModelField> {
        ModelField::new(self.model.nz(), self.model.nx(), Quantity::SlownessSquared, m.to_vec())
    }

    pub fn misfit(&self, m: &[f64]) -> Result<f64> {
        let sol = forward_map(&self.field(m)?, self.model, self.observed.omega(), self.geometry, self.grid, self.config)?;
        Ok(misfit(self.observed, &sol.dataset)?.value)
    }

    pub fn misfit_and_gradient(&self, m: &[f64]) -> Result<(MisfitReport, ModelField)> {
        let sol = forward_map(&self.field(m)?, self.model, self.observed.omega(), self.geometry, self.grid, self.config)?;
        adjoint_gradient(self.model, self.observed, self.grid, &sol)
    }
}

/// One row of a finite-difference gradient check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdCheckRow {
    pub step: f64,
    pub finite_difference: f64,
    pub adjoint: f64,
    pub relative_error: f64,
}

/// Compares `<grad J, p>` with central differences of `J` along `p`.
///
/// Steps are relative: the perturbation is `step * |m| / |p| * p`.
pub fn directional_misfit_check(
    objective: impl Fn(&[f64]) -> Result<f64>,
    m: &[f64],
    gradient: &[f64],
    direction: &[f64],
    steps: &[f64],
) -> Result<Vec<FdCheckRow>> {
    if direction.len() != m.len() || gradient.len() != m.len() {
        return Err(FwiError::ShapeMismatch("direction, gradient and model differ in length".into()));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let p_norm = norm(direction);
    let adjoint: f64 = gradient.iter().zip(direction).map(|(g, p)| g * p).sum();
    let mut rows = Vec::with_capacity(steps.len());
    for &step in steps {
        let finite_difference = if p_norm == 0.0 {
            0.0
        } else {
            let scale = step * norm(m) / p_norm;
            let plus: Vec<f64> = m.iter().zip(direction).map(|(x, p)| x + scale * p).collect();
            let minus: Vec<f64> = m.iter().zip(direction).map(|(x, p)| x - scale * p).collect();
            (objective(&plus)? - objective(&minus)?) / (2.0 * scale)
        };
        let diff = (finite_difference - adjoint).abs();
        let relative_error = if adjoint != 0.0 { diff / adjoint.abs() } else { diff };
        rows.push(FdCheckRow {
            step,
            finite_difference,
            adjoint,
            relative_error,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::Provenance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ds(data: Vec<Complex64>, rows: usize, cols: usize) -> FrequencyDataset {
        FrequencyDataset::new(4.0, rows, cols, data, Provenance::Observed).unwrap()
    }

    #[test]
    fn identical_data_has_zero_misfit() {
        let d = ds(vec![Complex64::new(1.0, 2.0); 6], 2, 3);
        let rep = misfit(&d, &d).unwrap();
        assert_eq!(rep.value, 0.0);
        assert!(rep.residual.iter().all(|r| *r == Complex64::default()));
    }

    #[test]
    fn half_squared_norm() {
        let obs = ds(vec![Complex64::new(1.0, 0.0)], 1, 1);
        let pred = ds(vec![Complex64::new(0.0, 0.0)], 1, 1);
        assert_eq!(misfit(&obs, &pred).unwrap().value, 0.5);
    }

    #[test]
    fn matches_elementwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rc = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let a: Vec<_> = (0..12).map(|_| rc()).collect();
        let b: Vec<_> = (0..12).map(|_| rc()).collect();
        let mut brute = 0.0;
        for s in 0..3 {
            for r in 0..4 {
                let d = a[s * 4 + r] - b[s * 4 + r];
                brute += 0.5 * (d.re * d.re + d.im * d.im);
            }
        }
        let rep = misfit(&ds(a, 3, 4), &ds(b, 3, 4)).unwrap();
        assert!((rep.value - brute).abs() <= 1e-12 * brute);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = ds(vec![Complex64::default(); 6], 2, 3);
        let b = ds(vec![Complex64::default(); 6], 3, 2);
        assert!(misfit(&a, &b).is_err());
        let c = FrequencyDataset::new(5.0, 2, 3, vec![Complex64::default(); 6], Provenance::Predicted).unwrap();
        assert!(misfit(&a, &c).is_err());
    }

    #[test]
    fn zero_direction_gives_zero_difference() {
        let m = vec![1.0, 2.0, 3.0];
        let rows = directional_misfit_check(|x| Ok(x.iter().sum()), &m, &[1.0; 3], &[0.0; 3], &[1e-3, 1e-6]).unwrap();
        for row in rows {
            assert_eq!(row.finite_difference, 0.0);
            assert_eq!(row.adjoint, 0.0);
            assert_eq!(row.relative_error, 0.0);
        }
    }

    #[test]
    fn quadratic_surrogate_matches_identity_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let j = |x: &[f64]| Ok(0.5 * x.iter().map(|v| v * v).sum::<f64>());
        let rows = directional_misfit_check(j, &m, &m, &p, &[1e-6]).unwrap();
        assert!(rows[0].relative_error < 1e-8, "{:?}", rows[0]);
    }
}
