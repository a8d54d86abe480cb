//! Run configuration (JSON or TOML) and the dataset manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::forward::{AcquisitionGeometry, SolverConfig, VelocityStats};
use crate::grid::DEFAULT_NODE_BUDGET;
use crate::helmholtz::{ShapeParameter, DEFAULT_PML_AMPLITUDE};
use crate::model::VelocityModel;
use crate::optimize::{BoundsConstraint, OptimizerConfig, StoppingCriteria};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A line of equally spaced positions or an explicit list of `(x, z)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PositionSpec {
    Line {
        count: usize,
        spacing: f64,
        /// Distance of the first position from the model's left edge.
        first_offset: f64,
        /// Depth below the model origin; one model row when omitted.
        #[serde(default)]
        depth: Option<f64>,
    },
    Points(Vec<(f64, f64)>),
}

impl PositionSpec {
    pub fn positions(&self, model: &VelocityModel) -> Result<Vec<(f64, f64)>> {
        match self {
            PositionSpec::Line {
                count,
                spacing,
                first_offset,
                depth,
            } => {
                if *count == 0 || !(spacing.is_finite() && *spacing >= 0.0) || (*count > 1 && *spacing == 0.0) {
                    return Err(FwiError::validation("a position line needs count >= 1 and a positive spacing"));
                }
                let (x0, z0) = model.origin();
                let z = z0 + depth.unwrap_or(model.dz());
                Ok((0..*count).map(|i| (x0 + first_offset + i as f64 * spacing, z)).collect())
            }
            PositionSpec::Points(points) => Ok(points.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub sources: PositionSpec,
    pub receivers: PositionSpec,
}

impl GeometrySpec {
    pub fn build(&self, model: &VelocityModel) -> Result<AcquisitionGeometry> {
        AcquisitionGeometry::new(self.sources.positions(model)?, self.receivers.positions(model)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub points_per_wavelength: f64,
    pub pml_wavelengths: f64,
    /// PML strength `sigma0 / omega`.
    pub pml_amplitude: f64,
    pub pml_exponent: i32,
    /// Gaussian shape parameter in 1/m; 0 gives the flat limit.
    pub shape_parameter: f64,
    pub node_budget: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            points_per_wavelength: 8.5,
            pml_wavelengths: 1.0,
            pml_amplitude: DEFAULT_PML_AMPLITUDE,
            pml_exponent: 2,
            shape_parameter: 0.0,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl SolverSettings {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            points_per_wavelength: self.points_per_wavelength,
            pml_wavelengths: self.pml_wavelengths,
            pml_amplitude: self.pml_amplitude,
            pml_exponent: self.pml_exponent,
            shape: ShapeParameter::Constant(self.shape_parameter),
            node_budget: self.node_budget,
            stats: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSettings {
    pub tol_g: f64,
    pub tol_j: f64,
    pub maxiter: usize,
}

impl Default for StopSettings {
    fn default() -> Self {
        Self {
            tol_g: 1e-7,
            tol_j: 1e-12,
            maxiter: 800,
        }
    }
}

impl StopSettings {
    pub fn criteria(&self) -> Result<StoppingCriteria> {
        StoppingCriteria::new(self.tol_g, self.tol_j, self.maxiter)
    }
}

/// How the inversion's starting model is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialModelSpec {
    File { path: PathBuf },
    /// Linear in depth; `shallow_depth` rows are copied from the true model.
    Linear {
        c_top: f64,
        c_bottom: f64,
        #[serde(default)]
        shallow_depth: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSettings {
    pub frequency_hz: f64,
    pub directions: usize,
    pub steps: Vec<f64>,
}

impl Default for GradcheckSettings {
    fn default() -> Self {
        Self {
            frequency_hz: 2.0,
            directions: 10,
            steps: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
        }
    }
}

/// Everything a run needs. Relative paths are resolved against the directory
/// of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// True model (`forward`, `gradcheck`) or reference model for an inversion.
    pub model: PathBuf,
    /// Dataset directory written by `forward` and read by `invert`.
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Frequencies in Hz, strictly increasing.
    pub schedule: Vec<f64>,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Velocity bounds `[c_min, c_max]` applied to every iterate.
    #[serde(default)]
    pub velocity_bounds: Option<(f64, f64)>,
    #[serde(default)]
    pub stop: StopSettings,
    #[serde(default)]
    pub initial_model: Option<InitialModelSpec>,
    /// Velocities that size the grids; taken from `model` when omitted.
    #[serde(default)]
    pub sizing_reference: Option<VelocityStats>,
    #[serde(default)]
    pub noise: Option<NoiseSettings>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gradcheck: GradcheckSettings,
}

impl RunConfig {
    /// Parses TOML for `.toml` files and JSON otherwise, then resolves paths.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = fs::read_to_string(path).map_err(|e| FwiError::io(path, e))?;
        let mut config = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok((config, text))
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let parsed = if origin.extension().is_some_and(|e| e == "toml") {
            toml::from_str(text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| FwiError::format(origin, message))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.model);
        fix(&mut self.data_dir);
        fix(&mut self.output_dir);
        if let Some(InitialModelSpec::File { path }) = &mut self.initial_model {
            fix(path);
        }
    }

    pub fn optimizer_config(&self) -> Result<OptimizerConfig> {
        let mut cfg = self.optimizer;
        if let Some((lo, hi)) = self.velocity_bounds {
            cfg = cfg.with_bounds(BoundsConstraint::from_velocity(lo, hi)?);
        }
        Ok(cfg)
    }
}

/// Index of a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub files: Vec<ManifestEntry>,
    pub sources: Vec<(f64, f64)>,
    pub receivers: Vec<(f64, f64)>,
    /// Velocities the forward grids were sized from.
    pub sizing_reference: VelocityStats,
    pub solver: SolverSettings,
    pub noise: Option<NoiseSettings>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub frequency_hz: f64,
    pub file: String,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self).map_err(|e| FwiError::format(&path, e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| FwiError::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| FwiError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| FwiError::format(&path, e.to_string()))
    }
}

/// Copies the config text verbatim and writes a version stamp into `dir`.
pub fn archive_config(dir: &Path, text: &str, origin: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| FwiError::io(dir, e))?;
    let ext = if origin.extension().is_some_and(|e| e == "toml") { "toml" } else { "json" };
    let path = dir.join(format!("config.{ext}"));
    fs::write(&path, text).map_err(|e| FwiError::io(&path, e))?;
    let stamp = dir.join("VERSION");
    fs::write(&stamp, format!("hexfwi {VERSION}\n")).map_err(|e| FwiError::io(&stamp, e))
}
