//! Barzilai-Borwein and L-BFGS descent for the single-frequency problem.

mod bb;
mod lbfgs;
mod minimize;

pub use bb::{bb_step, BbVariant};
pub use lbfgs::{lbfgs_direction, CurvaturePairs};
pub use minimize::{
    minimize, minimize_single_frequency, BoundsConstraint, IterationRecord, Objective, OptimizerConfig,
    OptimizerHistory, OptimizerKind, StopReason, StoppingCriteria,
};
