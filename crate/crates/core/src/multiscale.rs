//! Frequency continuation: each single-frequency inversion starts from the
//! previous stage's model. The model always lives on the rectangular grid;
//! every stage samples it onto its own hexagonal grid.
//!
//! Stage outputs are rounded to `f32` before being handed on, so a run resumed
//! from an on-disk checkpoint continues from exactly the same model as an
//! uninterrupted run.

use std::f64::consts::PI;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::forward::{check_schedule, AcquisitionGeometry, FrequencyDataset, SolverConfig, VelocityStats};
use crate::gradient::FwiProblem;
use crate::grid::{predict_counts, Footprint, GridCounts, HexGrid};
use crate::io::model_file::{read_model, write_model};
use crate::io::{millihertz, write_summary, SummaryRow};
use crate::model::{ModelField, VelocityModel};
use crate::optimize::{minimize_single_frequency, IterationRecord, OptimizerConfig, OptimizerHistory, StopReason, StoppingCriteria};

/// Per-stage settings that replace the run-wide defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageOverrides {
    pub points_per_wavelength: Option<f64>,
    pub pml_wavelengths: Option<f64>,
    pub stop: Option<StoppingCriteria>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySchedule {
    frequencies: Vec<f64>,
    overrides: Vec<StageOverrides>,
}

impl FrequencySchedule {
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        check_schedule(&frequencies)?;
        let overrides = vec![StageOverrides::default(); frequencies.len()];
        Ok(Self { frequencies, overrides })
    }

    pub fn with_overrides(frequencies: Vec<f64>, overrides: Vec<StageOverrides>) -> Result<Self> {
        if overrides.len() != frequencies.len() {
            return Err(FwiError::validation(format!(
                "{} overrides for {} frequencies",
                overrides.len(),
                frequencies.len()
            )));
        }
        let mut schedule = Self::new(frequencies)?;
        schedule.overrides = overrides;
        Ok(schedule)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn overrides(&self, stage: usize) -> StageOverrides {
        self.overrides[stage]
    }
}

/// `omega0 = 2 pi / (z_d sqrt(min m0))`, i.e. `f0 = max(c0) / z_d`.
pub fn initial_frequency(m0: &ModelField, z_d: f64) -> Result<f64> {
    let m_min = m0.min();
    if !(m_min > 0.0 && z_d > 0.0) {
        return Err(FwiError::validation("initial frequency needs m0 > 0 and z_d > 0"));
    }
    Ok(2.0 * PI / (z_d * m_min.sqrt()))
}

/// Known near-surface values that overwrite the top of an initial model.
#[derive(Debug, Clone, PartialEq)]
pub enum ShallowLayer {
    /// Rows shallower than `depth` get `velocity`.
    Constant { depth: f64, velocity: f64 },
    /// Rows shallower than `depth` are copied from `model` (same grid).
    FromModel { depth: f64, model: VelocityModel },
}

/// Velocity linear in depth from `c_top` (first row) to `c_bottom` (last row).
pub fn linear_initial_model(
    c_top: f64,
    c_bottom: f64,
    template: &VelocityModel,
    known_shallow: Option<&ShallowLayer>,
) -> Result<VelocityModel> {
    if !(c_top > 0.0 && c_top <= c_bottom && c_bottom.is_finite()) {
        return Err(FwiError::validation(format!(
            "need 0 < c_top <= c_bottom, got {c_top} and {c_bottom}"
        )));
    }
    let (nz, nx) = (template.nz(), template.nx());
    let mut c = Vec::with_capacity(nz * nx);
    for iz in 0..nz {
        let t = if nz > 1 { iz as f64 / (nz - 1) as f64 } else { 0.0 };
        let v = c_top + (c_bottom - c_top) * t;
        c.extend(std::iter::repeat_n(v, nx));
    }
    if let Some(layer) = known_shallow {
        let depth = match layer {
            ShallowLayer::Constant { depth, .. } | ShallowLayer::FromModel { depth, .. } => *depth,
        };
        if let ShallowLayer::FromModel { model, .. } = layer {
            if !model.same_shape(template) {
                return Err(FwiError::ShapeMismatch("shallow layer model differs from template".into()));
            }
        }
        for iz in 0..nz {
            if iz as f64 * template.dz() >= depth {
                break;
            }
            for ix in 0..nx {
                c[iz * nx + ix] = match layer {
                    ShallowLayer::Constant { velocity, .. } => *velocity,
                    ShallowLayer::FromModel { model, .. } => model.at(iz, ix),
                };
            }
        }
    }
    VelocityModel::new(nz, nx, template.dz(), template.dx(), template.origin(), c)
}

#[derive(Debug, Clone)]
pub struct MultiscaleConfig {
    pub solver: SolverConfig,
    pub optimizer: OptimizerConfig,
    pub stop: StoppingCriteria,
    /// Velocities that size every stage's grid. Fixing them keeps the grids
    /// independent of the evolving model.
    pub sizing_reference: VelocityStats,
    pub checkpoint_dir: Option<PathBuf>,
    /// Skip stages whose checkpoint is complete.
    pub resume: bool,
}

/// Per-stage outcome as stored in `stage.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub frequency_hz: f64,
    pub mean_iter_seconds: f64,
    pub iterations: usize,
    pub inner_nodes: usize,
    pub final_grad_norm: f64,
    pub initial_misfit: f64,
    pub final_misfit: f64,
    pub stop_reason: Option<StopReason>,
    pub nodes: usize,
    pub spacing: f64,
    pub pml_thickness: f64,
}

impl StageSummary {
    pub fn row(&self) -> SummaryRow {
        SummaryRow {
            frequency_hz: self.frequency_hz,
            mean_iter_seconds: self.mean_iter_seconds,
            iterations: self.iterations,
            inner_nodes: self.inner_nodes,
            final_grad_norm: self.final_grad_norm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageResult {
    pub frequency_hz: f64,
    /// Model the stage started from.
    pub initial_model: VelocityModel,
    /// Model handed to the next stage.
    pub model: VelocityModel,
    /// `None` for stages restored from a checkpoint.
    pub history: Option<OptimizerHistory>,
    pub summary: StageSummary,
}

#[derive(Debug, Clone)]
pub struct MultiscaleResult {
    pub stages: Vec<StageResult>,
    pub final_model: VelocityModel,
}

pub fn stage_dir(root: &Path, frequency_hz: f64) -> PathBuf {
    root.join(format!("stage_{}", millihertz(frequency_hz)))
}

/// Grid for one stage.
pub fn stage_grid(
    model: &VelocityModel,
    frequency_hz: f64,
    overrides: StageOverrides,
    config: &MultiscaleConfig,
) -> Result<HexGrid> {
    stage_solver(overrides, &config.solver).grid(Footprint::of_model(model), frequency_hz, config.sizing_reference)
}

/// Node counts of a stage predicted without building the grid.
pub fn stage_counts(
    model: &VelocityModel,
    frequency_hz: f64,
    overrides: StageOverrides,
    config: &MultiscaleConfig,
) -> Result<GridCounts> {
    let solver = stage_solver(overrides, &config.solver);
    let sizing = solver.sizing(frequency_hz, config.sizing_reference)?;
    Ok(predict_counts(&Footprint::of_model(model), &sizing, solver.pml_wavelengths))
}

fn stage_solver(overrides: StageOverrides, base: &SolverConfig) -> SolverConfig {
    let mut solver = base.clone();
    if let Some(ng) = overrides.points_per_wavelength {
        solver.points_per_wavelength = ng;
    }
    if let Some(w) = overrides.pml_wavelengths {
        solver.pml_wavelengths = w;
    }
    solver
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| FwiError::format(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| FwiError::io(path, e))
}

fn load_stage(dir: &Path) -> Result<Option<(VelocityModel, StageSummary)>> {
    let marker = dir.join("stage.json");
    if !marker.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&marker).map_err(|e| FwiError::io(&marker, e))?;
    let summary = serde_json::from_str(&text).map_err(|e| FwiError::format(&marker, e.to_string()))?;
    Ok(Some((read_model(&dir.join("model.json"))?, summary)))
}

fn history_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| FwiError::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| FwiError::io(path, e))
}

/// Runs the frequency loop. One dataset per scheduled frequency, in order.
pub fn run_multiscale(
    m0: &VelocityModel,
    schedule: &FrequencySchedule,
    datasets: &[FrequencyDataset],
    geometry: &AcquisitionGeometry,
    config: &MultiscaleConfig,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<MultiscaleResult> {
    if datasets.len() != schedule.len() {
        return Err(FwiError::validation(format!(
            "{} datasets for {} scheduled frequencies",
            datasets.len(),
            schedule.len()
        )));
    }
    for (f, d) in schedule.frequencies().iter().zip(datasets) {
        let omega = 2.0 * PI * f;
        if (d.omega() - omega).abs() > 1e-9 * omega {
            return Err(FwiError::validation(format!(
                "dataset at {} Hz does not match scheduled {f} Hz",
                d.frequency_hz()
            )));
        }
        d.check_geometry(geometry)?;
    }
    geometry.check_inside(&Footprint::of_model(m0))?;
    if let Some(root) = &config.checkpoint_dir {
        fs::create_dir_all(root).map_err(|e| FwiError::io(root, e))?;
    }

    let mut current = m0.quantized();
    let mut stages: Vec<StageResult> = Vec::with_capacity(schedule.len());
    let mut history_all: Vec<String> = Vec::new();
    for (p, (&f, observed)) in schedule.frequencies().iter().zip(datasets).enumerate() {
        let dir = config.checkpoint_dir.as_ref().map(|root| stage_dir(root, f));
        if let (true, Some(dir)) = (config.resume, &dir) {
            if let Some((model, summary)) = load_stage(dir)? {
                history_all.extend(history_lines(&dir.join("history.jsonl"))?);
                stages.push(StageResult {
                    frequency_hz: f,
                    initial_model: current.clone(),
                    model: model.clone(),
                    history: None,
                    summary,
                });
                current = model;
                continue;
            }
        }

        let overrides = schedule.overrides(p);
        let solver = stage_solver(overrides, &config.solver);
        let stop = overrides.stop.unwrap_or(config.stop);
        let grid = stage_grid(&current, f, overrides, config)?;
        let problem = FwiProblem {
            model: &current,
            observed,
            geometry,
            grid: &grid,
            config: &solver,
        };

        let mut stage_history = match &dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| FwiError::io(dir, e))?;
                let path = dir.join("history.jsonl");
                Some((
                    OpenOptions::new()
                        .create(true)
                        .write(true)
                        .truncate(true)
                        .open(&path)
                        .map_err(|e| FwiError::io(&path, e))?,
                    path,
                ))
            }
            None => None,
        };
        let mut write_error = None;
        let mut lines = Vec::new();
        let mut record = |r: &IterationRecord| {
            let line = serde_json::to_string(r).expect("record serializes");
            if let Some((file, path)) = &mut stage_history {
                if let Err(e) = writeln!(file, "{line}") {
                    write_error.get_or_insert(FwiError::io(path.clone(), e));
                }
            }
            lines.push(line);
            observer(r);
        };
        let (m_final, history) =
            minimize_single_frequency(&current.slowness_squared(), &problem, &config.optimizer, &stop, &mut record)?;
        if let Some(e) = write_error {
            return Err(e);
        }
        history_all.extend(lines);

        let model = current.with_field(&m_final)?.quantized();
        let summary = StageSummary {
            frequency_hz: f,
            mean_iter_seconds: history.mean_iteration_seconds(),
            iterations: history.iterations(),
            inner_nodes: grid.inner_node_count(),
            final_grad_norm: history.final_grad_norm.unwrap_or(f64::NAN),
            initial_misfit: history.initial_misfit.unwrap_or(f64::NAN),
            final_misfit: history.final_misfit.unwrap_or(f64::NAN),
            stop_reason: history.stop_reason,
            nodes: grid.len(),
            spacing: grid.spacing(),
            pml_thickness: grid.pml_thickness(),
        };
        if let Some(dir) = &dir {
            write_model(&dir.join("model.json"), &model)?;
            // written last: its presence marks the stage complete
            write_json(&dir.join("stage.json"), &summary)?;
        }
        stages.push(StageResult {
            frequency_hz: f,
            initial_model: current,
            model: model.clone(),
            history: Some(history),
            summary,
        });
        current = model;

        if let Some(root) = &config.checkpoint_dir {
            let rows: Vec<SummaryRow> = stages.iter().map(|s| s.summary.row()).collect();
            write_summary(&root.join("summary.csv"), &rows)?;
            let path = root.join("history.jsonl");
            let mut text = history_all.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            fs::write(&path, text).map_err(|e| FwiError::io(&path, e))?;
        }
    }
    Ok(MultiscaleResult {
        final_model: current,
        stages,
    })
}
