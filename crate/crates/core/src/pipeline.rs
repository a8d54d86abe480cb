//! End-to-end commands driven by a [`RunConfig`]: data generation, inversion,
//! grid reports and gradient checks.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::forward::{check_schedule, forward_map, generate_observed, AcquisitionGeometry, FrequencyDataset, VelocityStats};
use crate::gradient::{adjoint_gradient, directional_misfit_check, FdCheckRow, FwiProblem};
use crate::grid::{Footprint, GridSizing};
use crate::io::config::{archive_config, InitialModelSpec, Manifest, ManifestEntry, RunConfig, VERSION};
use crate::io::{dataset_file_name, read_dataset, read_model, write_dataset, write_model};
use crate::model::VelocityModel;
use crate::multiscale::{linear_initial_model, run_multiscale, stage_counts, FrequencySchedule, MultiscaleConfig, MultiscaleResult, ShallowLayer};
use crate::optimize::IterationRecord;

/// Generates one dataset per scheduled frequency plus a manifest in `data_dir`.
pub fn run_forward(config: &RunConfig, config_text: &str, config_path: &Path) -> Result<Manifest> {
    check_schedule(&config.schedule)?;
    let model = read_model(&config.model)?;
    let geometry = config.geometry.build(&model)?;
    let reference = config.sizing_reference.unwrap_or_else(|| VelocityStats::of_model(&model));
    let solver = config.solver.solver_config();
    let mut datasets = generate_observed(&model, &config.schedule, &geometry, reference, &solver)?;
    if let Some(noise) = config.noise {
        for (p, d) in datasets.iter_mut().enumerate() {
            d.add_noise(noise.snr_db, config.seed.wrapping_add(p as u64))?;
        }
    }

    let dir = &config.data_dir;
    fs::create_dir_all(dir).map_err(|e| FwiError::io(dir, e))?;
    let mut files = Vec::with_capacity(datasets.len());
    for (f, d) in config.schedule.iter().zip(&datasets) {
        let name = dataset_file_name(*f);
        write_dataset(&dir.join(&name), d)?;
        files.push(ManifestEntry {
            frequency_hz: *f,
            file: name,
        });
    }
    let manifest = Manifest {
        version: VERSION.into(),
        files,
        sources: geometry.sources().to_vec(),
        receivers: geometry.receivers().to_vec(),
        sizing_reference: reference,
        solver: config.solver,
        noise: config.noise,
        seed: config.seed,
    };
    manifest.write(dir)?;
    archive_config(dir, config_text, config_path)?;
    Ok(manifest)
}

/// Starting model of an inversion. Without an `initial_model` entry, a linear model
/// spanning the reference model's velocity range is used.
pub fn initial_model(config: &RunConfig, reference: &VelocityModel) -> Result<VelocityModel> {
    match &config.initial_model {
        Some(InitialModelSpec::File { path }) => {
            let m = read_model(path)?;
            if !m.same_shape(reference) {
                return Err(FwiError::ShapeMismatch("initial model grid differs from the reference model".into()));
            }
            Ok(m)
        }
        Some(InitialModelSpec::Linear {
            c_top,
            c_bottom,
            shallow_depth,
        }) => {
            let layer = shallow_depth.map(|depth| ShallowLayer::FromModel {
                depth,
                model: reference.clone(),
            });
            linear_initial_model(*c_top, *c_bottom, reference, layer.as_ref())
        }
        None => linear_initial_model(reference.min_velocity(), reference.max_velocity(), reference, None),
    }
}

/// Datasets listed in the manifest for every scheduled frequency.
pub fn load_datasets(config: &RunConfig) -> Result<(Manifest, Vec<FrequencyDataset>)> {
    let manifest = Manifest::read(&config.data_dir)?;
    let datasets = config
        .schedule
        .iter()
        .map(|f| {
            let entry = manifest
                .files
                .iter()
                .find(|e| (e.frequency_hz - f).abs() <= 1e-9 * f)
                .ok_or_else(|| FwiError::validation(format!("no dataset for {f} Hz in the manifest")))?;
            read_dataset(&config.data_dir.join(&entry.file))
        })
        .collect::<Result<_>>()?;
    Ok((manifest, datasets))
}

fn multiscale_config(config: &RunConfig, reference: VelocityStats, resume: bool) -> Result<MultiscaleConfig> {
    Ok(MultiscaleConfig {
        solver: config.solver.solver_config(),
        optimizer: config.optimizer_config()?,
        stop: config.stop.criteria()?,
        sizing_reference: reference,
        checkpoint_dir: Some(config.output_dir.clone()),
        resume,
    })
}

/// Sizes of one stage as reported by `grid-info` and `invert --dry-run`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    pub frequency_hz: f64,
    pub spacing: f64,
    pub pml_thickness: f64,
    pub rows: usize,
    pub cols: usize,
    pub nodes: usize,
    pub inner_nodes: usize,
    /// Banded LU storage for the complex factors.
    pub estimated_factor_bytes: usize,
}

pub fn plan_stages(config: &RunConfig) -> Result<Vec<StagePlan>> {
    let schedule = FrequencySchedule::new(config.schedule.clone())?;
    let model = read_model(&config.model)?;
    let reference = config.sizing_reference.unwrap_or_else(|| VelocityStats::of_model(&model));
    let ms = MultiscaleConfig {
        checkpoint_dir: None,
        ..multiscale_config(config, reference, false)?
    };
    schedule
        .frequencies()
        .iter()
        .enumerate()
        .map(|(p, &f)| {
            let counts = stage_counts(&model, f, schedule.overrides(p), &ms)?;
            let sizing = GridSizing::new(ms.solver.points_per_wavelength, f, reference.min, reference.mean)?;
            // a bandwidth of one grid line, doubled for fill-in from pivoting
            let half = counts.rows.min(counts.cols) + 1;
            let bytes = counts.nodes * (3 * half + 1) * std::mem::size_of::<num_complex::Complex64>();
            Ok(StagePlan {
                frequency_hz: f,
                spacing: sizing.spacing(),
                pml_thickness: sizing.pml_thickness(ms.solver.pml_wavelengths),
                rows: counts.rows,
                cols: counts.cols,
                nodes: counts.nodes,
                inner_nodes: counts.inner_nodes,
                estimated_factor_bytes: bytes,
            })
        })
        .collect()
}

/// Runs the frequency chain, writing checkpoints and `summary.csv` to `output_dir`.
pub fn run_invert(
    config: &RunConfig,
    config_text: &str,
    config_path: &Path,
    resume: bool,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<MultiscaleResult> {
    let schedule = FrequencySchedule::new(config.schedule.clone())?;
    let reference_model = read_model(&config.model)?;
    let (manifest, datasets) = load_datasets(config)?;
    let geometry = AcquisitionGeometry::new(manifest.sources.clone(), manifest.receivers.clone())?;
    let reference = config.sizing_reference.unwrap_or(manifest.sizing_reference);
    let m0 = initial_model(config, &reference_model)?;
    archive_config(&config.output_dir, config_text, config_path)?;
    let ms = multiscale_config(config, reference, resume)?;
    let result = run_multiscale(&m0, &schedule, &datasets, &geometry, &ms, observer)?;
    write_model(&config.output_dir.join("initial_model.json"), &m0)?;
    write_model(&config.output_dir.join("final_model.json"), &result.final_model)?;
    Ok(result)
}

/// Directional derivative checks of the adjoint gradient at the initial model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub frequency_hz: f64,
    pub misfit: f64,
    pub gradient_norm: f64,
    /// Per direction, the rows for every step.
    pub directions: Vec<Vec<FdCheckRow>>,
}

impl GradcheckReport {
    /// Smallest relative error over the steps, per direction.
    pub fn best_errors(&self) -> Vec<f64> {
        self.directions
            .iter()
            .map(|rows| rows.iter().map(|r| r.relative_error).fold(f64::INFINITY, f64::min))
            .collect()
    }
}

/// Compares adjoint and finite-difference derivatives along random directions.
/// Observed data come from the configured model; the gradient is evaluated at
/// the configured initial model.
pub fn run_gradcheck(config: &RunConfig) -> Result<GradcheckReport> {
    let settings = &config.gradcheck;
    let truth = read_model(&config.model)?;
    let geometry = config.geometry.build(&truth)?;
    let reference = config.sizing_reference.unwrap_or_else(|| VelocityStats::of_model(&truth));
    let solver = config.solver.solver_config();
    let f = settings.frequency_hz;
    let omega = 2.0 * PI * f;
    let grid = solver.grid(Footprint::of_model(&truth), f, reference)?;
    let observed = forward_map(&truth.slowness_squared(), &truth, omega, &geometry, &grid, &solver)?.dataset;
    let start = initial_model(config, &truth)?;
    let m = start.slowness_squared();
    let problem = FwiProblem {
        model: &start,
        observed: &observed,
        geometry: &geometry,
        grid: &grid,
        config: &solver,
    };
    let solution = forward_map(&m, &start, omega, &geometry, &grid, &solver)?;
    let (report, gradient) = adjoint_gradient(&start, &observed, &grid, &solution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut directions = Vec::with_capacity(settings.directions);
    for _ in 0..settings.directions {
        let p: Vec<f64> = (0..m.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        directions.push(directional_misfit_check(
            |x| problem.misfit(x),
            m.values(),
            gradient.values(),
            &p,
            &settings.steps,
        )?);
    }
    Ok(GradcheckReport {
        frequency_hz: f,
        misfit: report.value,
        gradient_norm: report.gradient_norm.unwrap_or(0.0),
        directions,
    })
}
