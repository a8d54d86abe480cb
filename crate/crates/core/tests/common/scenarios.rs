//! Experiment set-ups shared by the acceptance suite and the integration tests.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use hexfwi::grid::Footprint;
use hexfwi::helmholtz::ShapeParameter;
use hexfwi::io::write_model;
use hexfwi::*;

use super::{greens_function, relative_l2};

/// Homogeneous 2000 m/s medium, 10 Hz, six wavelengths across, source at the
/// node closest to the centre. Returns the relative L2 error against the
/// free-space Green's function over interior nodes with `2h < r < width/3`.
pub fn greens_error(points_per_wavelength: f64, shape: ShapeParameter) -> f64 {
    let (c, f) = (2000.0, 10.0);
    let n = 41;
    let d = 6.0 * c / f / (n - 1) as f64;
    let model = VelocityModel::constant(n, n, d, d, c).unwrap();
    let cfg = SolverConfig {
        points_per_wavelength,
        shape,
        ..SolverConfig::default()
    };
    let grid = cfg.grid(Footprint::of_model(&model), f, VelocityStats::of_model(&model)).unwrap();
    let centre = (model.width() / 2.0, model.depth() / 2.0);
    let dist = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).hypot(p.1 - q.1);
    let src = grid
        .positions()
        .iter()
        .copied()
        .min_by(|a, b| dist(*a, centre).total_cmp(&dist(*b, centre)))
        .unwrap();
    let geometry = AcquisitionGeometry::new(vec![src], vec![src]).unwrap();
    let sol = forward_map(&model.slowness_squared(), &model, 2.0 * PI * f, &geometry, &grid, &cfg).unwrap();
    let k = 2.0 * PI * f / c;
    let h = grid.spacing();
    let (mut numeric, mut exact) = (Vec::new(), Vec::new());
    for i in 0..grid.len() {
        let r = dist(grid.position(i), src);
        if grid.is_interior(i) && r > 2.0 * h && r < model.width() / 3.0 {
            numeric.push(sol.wavefields[0][i]);
            exact.push(greens_function(k, r));
        }
    }
    relative_l2(&numeric, &exact)
}

/// Reflection from the absorbing collar: a 4-wavelength box against a box four
/// times wider on the same lattice. Returns (relative L2, max difference over
/// max reference amplitude) on the small box's interior nodes.
pub fn pml_reflection(cfg: &SolverConfig) -> (f64, f64) {
    let (c, f) = (2000.0, 10.0);
    let n = 33;
    let w = 4.0 * c / f;
    let d = w / (n - 1) as f64;
    let nb = 4 * (n - 1) + 1;
    let small = VelocityModel::constant(n, n, d, d, c).unwrap();
    let big = VelocityModel::new(nb, nb, d, d, (-1.5 * w, -1.5 * w), vec![c; nb * nb]).unwrap();
    let stats = VelocityStats { min: c, mean: c };
    let src = (0.3 * w, 0.4 * w);
    let field = |model: &VelocityModel| {
        let grid = cfg.grid(Footprint::of_model(model), f, stats).unwrap();
        let geometry = AcquisitionGeometry::new(vec![src], vec![src]).unwrap();
        let sol = forward_map(&model.slowness_squared(), model, 2.0 * PI * f, &geometry, &grid, cfg).unwrap();
        (grid, sol.wavefields.into_iter().next().unwrap())
    };
    let (gs, us) = field(&small);
    let (gb, ub) = field(&big);
    let key = |p: (f64, f64)| ((p.0 * 1e3).round() as i64, (p.1 * 1e3).round() as i64);
    let lookup: HashMap<_, _> = (0..gb.len()).map(|i| (key(gb.position(i)), i)).collect();
    let (mut num, mut den, mut max_diff, mut max_ref) = (0.0, 0.0, 0.0f64, 0.0f64);
    for i in (0..gs.len()).filter(|&i| gs.is_interior(i)) {
        let j = lookup[&key(gs.position(i))];
        let diff: Complex64 = us[i] - ub[j];
        num += diff.norm_sqr();
        den += ub[j].norm_sqr();
        max_diff = max_diff.max(diff.norm());
        max_ref = max_ref.max(ub[j].norm());
    }
    ((num / den).sqrt(), max_diff / max_ref)
}

/// Best relative error per random direction on a 21 x 31 two-layer toy at 6 Hz.
/// Also returns the number of hex nodes.
pub fn gradient_check(directions: usize, seed: u64) -> (usize, Vec<f64>) {
    let truth = VelocityModel::from_fn(21, 31, 20.0, 20.0, |_, z| if z < 200.0 { 1500.0 } else { 2200.0 }).unwrap();
    let start = VelocityModel::from_fn(21, 31, 20.0, 20.0, |_, z| 1500.0 + 1.5 * z).unwrap();
    let cfg = SolverConfig::default();
    let f = 6.0;
    let grid = cfg.grid(Footprint::of_model(&truth), f, VelocityStats::of_model(&truth)).unwrap();
    let geometry = AcquisitionGeometry::new(
        vec![(100.0, 20.0), (300.0, 20.0), (500.0, 20.0)],
        (0..15).map(|i| (20.0 + 40.0 * i as f64, 20.0)).collect(),
    )
    .unwrap();
    let omega = 2.0 * PI * f;
    let observed = forward_map(&truth.slowness_squared(), &truth, omega, &geometry, &grid, &cfg).unwrap().dataset;
    let problem = FwiProblem {
        model: &start,
        observed: &observed,
        geometry: &geometry,
        grid: &grid,
        config: &cfg,
    };
    let m = start.slowness_squared();
    let (_, g) = problem.misfit_and_gradient(m.values()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
    let best = (0..directions)
        .map(|_| {
            let p: Vec<f64> = (0..m.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            directional_misfit_check(|x| problem.misfit(x), m.values(), g.values(), &p, &steps)
                .unwrap()
                .iter()
                .map(|r| r.relative_error)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    (grid.len(), best)
}

/// Two-layer desk model: 1 km deep, 2 km wide, 40 m cells, 1800 m/s over
/// 2200 m/s with the interface at 500 m.
pub fn desk_model() -> VelocityModel {
    VelocityModel::from_fn(26, 51, 40.0, 40.0, |_, z| if z < 500.0 { 1800.0 } else { 2200.0 }).unwrap()
}

/// Writes the desk model and a run config into `dir`; returns the config path.
/// Surface acquisition: 20 sources every 100 m, 100 receivers every 20 m.
pub fn write_desk_run(dir: &Path, schedule: &[f64], maxiter: usize) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    write_model(&dir.join("true.json"), &desk_model()).unwrap();
    let config = serde_json::json!({
        "model": "true.json",
        "data_dir": "data",
        "output_dir": "out",
        "schedule": schedule,
        "geometry": {
            "sources": {"count": 20, "spacing": 100.0, "first_offset": 50.0, "depth": 20.0},
            "receivers": {"count": 100, "spacing": 20.0, "first_offset": 10.0, "depth": 20.0}
        },
        "optimizer": {"kind": {"method": "lbfgs", "memory": 10}},
        "velocity_bounds": [1400.0, 3000.0],
        "stop": {"maxiter": maxiter},
        "seed": 7
    });
    let path = dir.join("run.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

pub fn rms_difference(a: &VelocityModel, b: &VelocityModel) -> f64 {
    let s: f64 = a.velocities().iter().zip(b.velocities()).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.velocities().len() as f64).sqrt()
}
