//! Single-frequency forward modelling: point sources in a layered medium,
//! sampled at a surface receiver line and written as a dataset file.
//!
//! cargo run --release --example forward_modeling -- [output dir]

use std::f64::consts::PI;
use std::path::PathBuf;

use hexfwi::grid::Footprint;
use hexfwi::helmholtz::ShapeParameter;
use hexfwi::io::{dataset_file_name, read_dataset, write_dataset};
use hexfwi::{forward_map, AcquisitionGeometry, Result, SolverConfig, VelocityModel, VelocityStats};

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let model = VelocityModel::from_fn(41, 81, 25.0, 25.0, |x, z| {
        let bump = 150.0 * (-((x - 1000.0) / 300.0).powi(2)).exp();
        if z < 500.0 - bump { 1600.0 } else { 2300.0 }
    })?;
    let geometry = AcquisitionGeometry::new(
        vec![(400.0, 25.0), (1000.0, 25.0), (1600.0, 25.0)],
        (0..80).map(|i| (12.5 + 25.0 * i as f64, 25.0)).collect(),
    )?;
    let f = 6.0;
    // dispersion-matched shape parameter instead of the flat limit
    let config = SolverConfig {
        shape: ShapeParameter::plane_wave_matched(),
        ..SolverConfig::default()
    };
    let grid = config.grid(Footprint::of_model(&model), f, VelocityStats::of_model(&model))?;
    let sol = forward_map(&model.slowness_squared(), &model, 2.0 * PI * f, &geometry, &grid, &config)?;
    println!("{} hex nodes, h = {:.2} m", grid.len(), grid.spacing());

    for s in 0..geometry.sources().len() {
        let row = sol.dataset.row(s);
        let peak = row.iter().map(|d| d.norm()).fold(0.0, f64::max);
        println!("source {s}: peak |d| = {peak:.3e}, phase at receiver 40 = {:.3} rad", row[40].arg());
    }

    let path = out.join(dataset_file_name(f));
    write_dataset(&path, &sol.dataset)?;
    assert_eq!(read_dataset(&path)?.data(), sol.dataset.data());
    println!("wrote {}", path.display());
    Ok(())
}
