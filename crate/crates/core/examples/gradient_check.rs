//! Adjoint-state gradient against central finite differences along random directions.
//!
//! cargo run --release --example gradient_check

use std::f64::consts::PI;

use hexfwi::grid::Footprint;
use hexfwi::{directional_misfit_check, forward_map, AcquisitionGeometry, FwiProblem, Result, SolverConfig, VelocityModel, VelocityStats};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> Result<()> {
    let truth = VelocityModel::from_fn(21, 31, 20.0, 20.0, |_, z| if z < 200.0 { 1500.0 } else { 2200.0 })?;
    let start = VelocityModel::from_fn(21, 31, 20.0, 20.0, |_, z| 1500.0 + 1.5 * z)?;
    let config = SolverConfig::default();
    let f = 6.0;
    let grid = config.grid(Footprint::of_model(&truth), f, VelocityStats::of_model(&truth))?;
    let geometry = AcquisitionGeometry::new(
        vec![(100.0, 20.0), (300.0, 20.0), (500.0, 20.0)],
        (0..15).map(|i| (20.0 + 40.0 * i as f64, 20.0)).collect(),
    )?;
    let observed = forward_map(&truth.slowness_squared(), &truth, 2.0 * PI * f, &geometry, &grid, &config)?.dataset;
    let problem = FwiProblem {
        model: &start,
        observed: &observed,
        geometry: &geometry,
        grid: &grid,
        config: &config,
    };
    let m = start.slowness_squared();
    let (report, g) = problem.misfit_and_gradient(m.values())?;
    println!("{} nodes, J = {:.6e}, |g| = {:.3e}", grid.len(), report.value, g.norm());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let steps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
    for d in 0..5 {
        let p: Vec<f64> = (0..m.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let rows = directional_misfit_check(|x| problem.misfit(x), m.values(), g.values(), &p, &steps)?;
        let errors: Vec<String> = rows.iter().map(|r| format!("{:.0e}:{:.1e}", r.step, r.relative_error)).collect();
        println!("direction {d}: {}", errors.join("  "));
    }
    Ok(())
}
