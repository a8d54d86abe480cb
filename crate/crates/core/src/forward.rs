//! Forward modelling map: model to receiver data at one frequency.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::grid::{Footprint, GridSizing, HexGrid, DEFAULT_NODE_BUDGET};
use crate::helmholtz::{
    assemble, factorize, point_source_rhs, Factorization, HelmholtzOperator, PmlConfig, ShapeParameter,
    SolverStats, StatsLog, DEFAULT_PML_AMPLITUDE,
};
use crate::model::{ModelField, Quantity, VelocityModel};
use crate::transfer::sample_to_hex;

/// Source and receiver positions in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionGeometry {
    sources: Vec<(f64, f64)>,
    receivers: Vec<(f64, f64)>,
}

impl AcquisitionGeometry {
    pub fn new(sources: Vec<(f64, f64)>, receivers: Vec<(f64, f64)>) -> Result<Self> {
        for (name, list) in [("source", &sources), ("receiver", &receivers)] {
            if list.is_empty() {
                return Err(FwiError::validation(format!("at least one {name} is required")));
            }
            if list.iter().any(|(x, z)| !(x.is_finite() && z.is_finite())) {
                return Err(FwiError::validation(format!("{name} positions must be finite")));
            }
            let mut sorted = list.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(FwiError::validation(format!("duplicate {name} positions")));
            }
        }
        Ok(Self { sources, receivers })
    }

    pub fn sources(&self) -> &[(f64, f64)] {
        &self.sources
    }

    pub fn receivers(&self) -> &[(f64, f64)] {
        &self.receivers
    }

    /// Checks that every position lies in the physical footprint.
    pub fn check_inside(&self, footprint: &Footprint) -> Result<()> {
        for &(x, z) in self.sources.iter().chain(&self.receivers) {
            if !footprint.contains(x, z) {
                return Err(FwiError::OutsideDomain { x, z });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Observed,
    Predicted,
}

/// Complex receiver data at one angular frequency, `n_sources x n_receivers`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDataset {
    omega: f64,
    n_sources: usize,
    n_receivers: usize,
    data: Vec<Complex64>,
    provenance: Provenance,
}

impl FrequencyDataset {
    pub fn new(omega: f64, n_sources: usize, n_receivers: usize, data: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if data.len() != n_sources * n_receivers {
            return Err(FwiError::ShapeMismatch(format!(
                "{} data entries for {n_sources}x{n_receivers}",
                data.len()
            )));
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(FwiError::Numerical("dataset contains non-finite entries".into()));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(FwiError::validation(format!("angular frequency must be positive, got {omega}")));
        }
        Ok(Self {
            omega,
            n_sources,
            n_receivers,
            data,
            provenance,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn n_receivers(&self) -> usize {
        self.n_receivers
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, source: usize, receiver: usize) -> Complex64 {
        self.data[source * self.n_receivers + receiver]
    }

    pub fn row(&self, source: usize) -> &[Complex64] {
        &self.data[source * self.n_receivers..(source + 1) * self.n_receivers]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Checks that the dataset matches a geometry's dimensions.
    pub fn check_geometry(&self, geometry: &AcquisitionGeometry) -> Result<()> {
        if self.n_sources != geometry.sources().len() || self.n_receivers != geometry.receivers().len() {
            return Err(FwiError::ShapeMismatch(format!(
                "dataset is {}x{}, geometry has {} sources and {} receivers",
                self.n_sources,
                self.n_receivers,
                geometry.sources().len(),
                geometry.receivers().len()
            )));
        }
        Ok(())
    }

    /// Adds circular complex Gaussian noise at the given signal-to-noise ratio (dB, power).
    pub fn add_noise(&mut self, snr_db: f64, seed: u64) -> Result<()> {
        let power = self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.data.len() as f64;
        let noise_power = power / 10f64.powf(snr_db / 10.0);
        let sigma = (noise_power / 2.0).sqrt();
        if !(sigma.is_finite()) {
            return Err(FwiError::validation(format!("invalid SNR {snr_db} dB")));
        }
        if sigma == 0.0 {
            return Ok(());
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| FwiError::validation(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut self.data {
            *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
        Ok(())
    }
}

/// Reference velocities that fix grid spacing and collar thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityStats {
    pub min: f64,
    pub mean: f64,
}

impl VelocityStats {
    pub fn of_model(model: &VelocityModel) -> Self {
        Self {
            min: model.min_velocity(),
            mean: model.mean_velocity(),
        }
    }
}

/// Discretisation and solver settings shared by forward and adjoint runs.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Points per minimum wavelength.
    pub points_per_wavelength: f64,
    /// Collar thickness in mean wavelengths.
    pub pml_wavelengths: f64,
    /// `sigma0 / omega`.
    pub pml_amplitude: f64,
    pub pml_exponent: i32,
    pub shape: ShapeParameter,
    pub node_budget: usize,
    pub stats: Option<Arc<StatsLog>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            points_per_wavelength: 8.5,
            pml_wavelengths: 1.0,
            pml_amplitude: DEFAULT_PML_AMPLITUDE,
            pml_exponent: 2,
            shape: ShapeParameter::default(),
            node_budget: DEFAULT_NODE_BUDGET,
            stats: None,
        }
    }
}

impl SolverConfig {
    pub fn sizing(&self, frequency_hz: f64, reference: VelocityStats) -> Result<GridSizing> {
        GridSizing::new(self.points_per_wavelength, frequency_hz, reference.min, reference.mean)
    }

    /// Grid for one frequency over `footprint`.
    pub fn grid(&self, footprint: Footprint, frequency_hz: f64, reference: VelocityStats) -> Result<HexGrid> {
        let sizing = self.sizing(frequency_hz, reference)?;
        HexGrid::from_sizing(footprint, &sizing, self.pml_wavelengths, self.node_budget)
    }

    pub fn pml(&self, grid: &HexGrid, omega: f64) -> Result<PmlConfig> {
        let thickness = if grid.pml_thickness() > 0.0 {
            grid.pml_thickness()
        } else {
            grid.spacing()
        };
        PmlConfig::new(
            thickness,
            self.pml_exponent,
            (self.pml_amplitude * omega).max(f64::MIN_POSITIVE),
            omega,
        )
    }

    fn record(&self, stats: SolverStats) {
        if let Some(log) = &self.stats {
            log.record(&stats);
        }
    }
}

/// Sampling of nodal fields at fixed positions by linear interpolation over
/// lattice triangles.
#[derive(Debug, Clone)]
pub struct ReceiverSampler {
    weights: Vec<[(usize, f64); 3]>,
    n_nodes: usize,
}

impl ReceiverSampler {
    pub fn new(grid: &HexGrid, positions: &[(f64, f64)]) -> Result<Self> {
        let weights = positions
            .iter()
            .map(|&(x, z)| grid.locate(x, z))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights,
            n_nodes: grid.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sample(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        if field.len() != self.n_nodes {
            return Err(FwiError::ShapeMismatch(format!(
                "field of length {} for a grid of {} nodes",
                field.len(),
                self.n_nodes
            )));
        }
        Ok(self
            .weights
            .iter()
            .map(|tri| tri.iter().map(|(n, w)| field[*n] * *w).sum())
            .collect())
    }

    /// Transpose of [`Self::sample`].
    pub fn inject(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.weights.len() {
            return Err(FwiError::ShapeMismatch(format!(
                "{} values for {} receivers",
                values.len(),
                self.weights.len()
            )));
        }
        let mut out = vec![Complex64::default(); self.n_nodes];
        for (tri, v) in self.weights.iter().zip(values) {
            for (n, w) in tri {
                out[*n] += v * *w;
            }
        }
        Ok(out)
    }
}

/// Samples a wavefield at receiver positions.
pub fn sample_receivers(field: &[Complex64], receivers: &[(f64, f64)], grid: &HexGrid) -> Result<Vec<Complex64>> {
    ReceiverSampler::new(grid, receivers)?.sample(field)
}

/// Everything a forward run produces; the gradient reuses all of it.
#[derive(Debug)]
pub struct ForwardSolution {
    pub dataset: FrequencyDataset,
    pub wavefields: Vec<Vec<Complex64>>,
    pub operator: HelmholtzOperator,
    pub factorization: Factorization,
    pub receivers: ReceiverSampler,
}

/// Evaluates `F_omega(m)`: assembles and factorizes once, solves one right-hand
/// side per source and samples every wavefield at the receivers.
pub fn forward_map(
    m: &ModelField,
    model: &VelocityModel,
    omega: f64,
    geometry: &AcquisitionGeometry,
    grid: &HexGrid,
    config: &SolverConfig,
) -> Result<ForwardSolution> {
    if m.quantity() != Quantity::SlownessSquared {
        return Err(FwiError::validation("forward modelling expects slowness squared"));
    }
    geometry.check_inside(grid.footprint())?;
    let m_nodes = sample_to_hex(m, model, grid)?;
    let pml = config.pml(grid, omega)?;
    let operator = assemble(grid, &m_nodes, omega, &pml, &config.shape)?;
    let factorization = factorize(&operator)?;
    let frequency_hz = omega / (2.0 * PI);
    config.record(SolverStats {
        event: "factorize".into(),
        frequency_hz,
        nodes: grid.len(),
        inner_nodes: grid.inner_node_count(),
        nonzeros: operator.matrix().nnz(),
        assemble_seconds: Some(operator.assemble_seconds()),
        factor_seconds: Some(factorization.factor_seconds()),
        factor_bytes: Some(factorization.memory_bytes()),
        rhs: None,
        solve_seconds_per_rhs: None,
    });

    let rhs = geometry
        .sources()
        .iter()
        .map(|&s| point_source_rhs(grid, s))
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    let wavefields = factorization.solve_batch(&rhs)?;
    let elapsed = start.elapsed().as_secs_f64();
    config.record(SolverStats {
        event: "solve".into(),
        frequency_hz,
        nodes: grid.len(),
        inner_nodes: grid.inner_node_count(),
        nonzeros: operator.matrix().nnz(),
        assemble_seconds: None,
        factor_seconds: None,
        factor_bytes: None,
        rhs: Some(rhs.len()),
        solve_seconds_per_rhs: Some(elapsed / rhs.len() as f64),
    });
    if wavefields.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(FwiError::Numerical(format!("non-finite wavefield at {frequency_hz} Hz")));
    }

    let receivers = ReceiverSampler::new(grid, geometry.receivers())?;
    let mut data = Vec::with_capacity(geometry.sources().len() * geometry.receivers().len());
    for field in &wavefields {
        data.extend(receivers.sample(field)?);
    }
    let dataset = FrequencyDataset::new(
        omega,
        geometry.sources().len(),
        geometry.receivers().len(),
        data,
        Provenance::Predicted,
    )?;
    Ok(ForwardSolution {
        dataset,
        wavefields,
        operator,
        factorization,
        receivers,
    })
}

/// Synthetic observed data for every frequency (Hz) of a strictly increasing
/// schedule. Grids are sized from `reference`.
pub fn generate_observed(
    true_model: &VelocityModel,
    schedule_hz: &[f64],
    geometry: &AcquisitionGeometry,
    reference: VelocityStats,
    config: &SolverConfig,
) -> Result<Vec<FrequencyDataset>> {
    check_schedule(schedule_hz)?;
    let m = true_model.slowness_squared();
    schedule_hz
        .iter()
        .map(|&f| {
            let grid = config.grid(crate::grid::Footprint::of_model(true_model), f, reference)?;
            let solution = forward_map(&m, true_model, 2.0 * PI * f, geometry, &grid, config)?;
            Ok(solution.dataset.with_provenance(Provenance::Observed))
        })
        .collect()
}

/// Schedules must be non-empty, positive and strictly increasing.
pub fn check_schedule(schedule_hz: &[f64]) -> Result<()> {
    if schedule_hz.is_empty() {
        return Err(FwiError::validation("frequency schedule is empty"));
    }
    if schedule_hz.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(FwiError::validation("frequencies must be positive"));
    }
    if schedule_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FwiError::validation("frequencies must be strictly increasing"));
    }
    Ok(())
}
