//! Two-layer inversion over 2, 4 and 8 Hz with checkpoints, images and profiles.
//!
//! cargo run --release --example multiscale_inversion -- [output dir]

use std::path::PathBuf;

use hexfwi::io::{write_image, write_profiles, Palette};
use hexfwi::optimize::{BoundsConstraint, OptimizerConfig, StoppingCriteria};
use hexfwi::{
    generate_observed, linear_initial_model, run_multiscale, AcquisitionGeometry, FrequencySchedule, MultiscaleConfig, Result, SolverConfig,
    VelocityModel, VelocityStats,
};

fn rms(a: &VelocityModel, b: &VelocityModel) -> f64 {
    let s: f64 = a.velocities().iter().zip(b.velocities()).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.velocities().len() as f64).sqrt()
}

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hexfwi-multiscale"));
    let truth = VelocityModel::from_fn(26, 51, 40.0, 40.0, |_, z| if z < 500.0 { 1800.0 } else { 2200.0 })?;
    let m0 = linear_initial_model(1800.0, 2200.0, &truth, None)?;
    let geometry = AcquisitionGeometry::new(
        (0..20).map(|i| (50.0 + 100.0 * i as f64, 20.0)).collect(),
        (0..100).map(|i| (10.0 + 20.0 * i as f64, 20.0)).collect(),
    )?;
    let frequencies = vec![2.0, 4.0, 8.0];
    let solver = SolverConfig::default();
    let reference = VelocityStats::of_model(&truth);
    let data = generate_observed(&truth, &frequencies, &geometry, reference, &solver)?;

    let config = MultiscaleConfig {
        solver,
        optimizer: OptimizerConfig::lbfgs(10).with_bounds(BoundsConstraint::from_velocity(1400.0, 3000.0)?),
        stop: StoppingCriteria::new(1e-7, 1e-12, 60)?,
        sizing_reference: reference,
        checkpoint_dir: Some(out.clone()),
        resume: false,
    };
    let result = run_multiscale(&m0, &FrequencySchedule::new(frequencies)?, &data, &geometry, &config, &mut |r| {
        if r.k % 20 == 0 {
            println!("{} Hz  k={:>3}  J={:.4e}", r.frequency_hz, r.k, r.misfit);
        }
    })?;
    for s in &result.stages {
        println!(
            "{} Hz: {} iterations, J {:.3e} -> {:.3e}, rms error {:.1} m/s",
            s.frequency_hz,
            s.summary.iterations,
            s.summary.initial_misfit,
            s.summary.final_misfit,
            rms(&s.model, &truth)
        );
    }
    println!("rms error: initial {:.1} m/s, final {:.1} m/s", rms(&m0, &truth), rms(&result.final_model, &truth));

    let clip = Some((1700.0, 2300.0));
    write_image(&out.join("true.ppm"), &truth, Palette::Jet, clip)?;
    write_image(&out.join("final.ppm"), &result.final_model, Palette::Jet, clip)?;
    write_profiles(&out.join("profiles.csv"), &result.final_model, &[500.0, 1000.0, 1500.0])?;
    println!("checkpoints, summary.csv, images and profiles in {}", out.display());
    Ok(())
}
