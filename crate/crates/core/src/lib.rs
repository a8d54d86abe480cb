//! Frequency-domain acoustic full-waveform inversion on hexagonal grids.
//!
//! The forward problem is the 2D Helmholtz equation discretized with a
//! seven-point Gaussian RBF-FD stencil and surrounded by a PML. Gradients come
//! from the adjoint-state method and drive Barzilai-Borwein or L-BFGS updates
//! in a multi-scale chain of single-frequency inversions.

pub mod error;
pub mod forward;
pub mod gradient;
pub mod grid;
pub mod helmholtz;
pub mod io;
pub mod model;
pub mod multiscale;
pub mod optimize;
pub mod pipeline;
pub mod transfer;

pub use error::{FwiError, Result};
pub use forward::{
    forward_map, generate_observed, AcquisitionGeometry, ForwardSolution, FrequencyDataset, Provenance, SolverConfig,
    VelocityStats,
};
pub use gradient::{adjoint_gradient, directional_misfit_check, misfit, FdCheckRow, FwiProblem, MisfitReport};
pub use grid::{GridSizing, HexGrid, NodeKind};
pub use model::{ModelField, Quantity, VelocityModel};
pub use multiscale::{initial_frequency, linear_initial_model, run_multiscale, FrequencySchedule, MultiscaleConfig, MultiscaleResult};
