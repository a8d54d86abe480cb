//! PML-damped Helmholtz operator on hexagonal grids and its direct solver.

mod operator;
mod pml;
mod solver;
mod source;
mod stats;
mod stencil;

pub use operator::{assemble, HelmholtzOperator, SparseMatrix};
pub use pml::{pml_stretch, PmlConfig, DEFAULT_PML_AMPLITUDE};
pub use solver::{factorize, factorize_matrix, Factorization};
pub use source::point_source_rhs;
pub use stats::{SolverStats, StatsLog};
pub use stencil::{rbf_fd_weights, ShapeParameter, StencilWeights, MAX_SHAPE_PRODUCT};
