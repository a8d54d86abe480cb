mod common;

use std::f64::consts::PI;

use hexfwi::grid::Footprint;
use hexfwi::*;

fn layered() -> VelocityModel {
    VelocityModel::from_fn(16, 21, 25.0, 25.0, |x, z| 1600.0 + 0.8 * z + if x > 300.0 && z > 200.0 { 300.0 } else { 0.0 }).unwrap()
}

#[test]
fn data_are_reciprocal() {
    let model = layered();
    let cfg = SolverConfig::default();
    let f = 5.0;
    let grid = cfg.grid(Footprint::of_model(&model), f, VelocityStats::of_model(&model)).unwrap();
    let (a, b) = ((110.0, 60.0), (410.0, 290.0));
    let forward = |s: (f64, f64), r: (f64, f64)| {
        let g = AcquisitionGeometry::new(vec![s], vec![r]).unwrap();
        forward_map(&model.slowness_squared(), &model, 2.0 * PI * f, &g, &grid, &cfg).unwrap().dataset.get(0, 0)
    };
    let (ab, ba) = (forward(a, b), forward(b, a));
    assert!((ab - ba).norm() <= 1e-8 * ab.norm(), "{ab} vs {ba}");
}

#[test]
fn negative_gradient_is_a_descent_direction() {
    let truth = layered();
    let start = VelocityModel::from_fn(16, 21, 25.0, 25.0, |_, z| 1600.0 + 0.8 * z).unwrap();
    let cfg = SolverConfig::default();
    let f = 4.0;
    let grid = cfg.grid(Footprint::of_model(&truth), f, VelocityStats::of_model(&truth)).unwrap();
    let geometry = AcquisitionGeometry::new(vec![(100.0, 25.0), (400.0, 25.0)], (0..10).map(|i| (25.0 + 50.0 * i as f64, 25.0)).collect()).unwrap();
    let observed = forward_map(&truth.slowness_squared(), &truth, 2.0 * PI * f, &geometry, &grid, &cfg).unwrap().dataset;
    let problem = FwiProblem { model: &start, observed: &observed, geometry: &geometry, grid: &grid, config: &cfg };
    let m = start.slowness_squared();
    let (report, g) = problem.misfit_and_gradient(m.values()).unwrap();
    let scale = 1e-3 * m.values().iter().map(|v| v * v).sum::<f64>().sqrt() / g.norm();
    let stepped: Vec<f64> = m.values().iter().zip(g.values()).map(|(v, d)| v - scale * d).collect();
    assert!(problem.misfit(&stepped).unwrap() < report.value);
}

#[test]
fn exact_model_has_zero_misfit_and_gradient() {
    let truth = layered();
    let cfg = SolverConfig::default();
    let f = 3.0;
    let grid = cfg.grid(Footprint::of_model(&truth), f, VelocityStats::of_model(&truth)).unwrap();
    let geometry = AcquisitionGeometry::new(vec![(250.0, 25.0)], vec![(50.0, 25.0), (450.0, 25.0)]).unwrap();
    let sol = forward_map(&truth.slowness_squared(), &truth, 2.0 * PI * f, &geometry, &grid, &cfg).unwrap();
    let (report, g) = adjoint_gradient(&truth, &sol.dataset, &grid, &sol).unwrap();
    assert_eq!(report.value, 0.0);
    assert_eq!(g.norm(), 0.0);
}

#[test]
fn greens_error_shrinks_with_resolution() {
    use hexfwi::helmholtz::ShapeParameter;
    let coarse = common::scenarios::greens_error(8.5, ShapeParameter::plane_wave_matched());
    let fine = common::scenarios::greens_error(12.0, ShapeParameter::plane_wave_matched());
    assert!(fine < coarse && coarse < 0.05, "{coarse} {fine}");
}
