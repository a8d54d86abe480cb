//! The single-frequency descent loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::bb::{bb_step, BbVariant};
use super::lbfgs::{dot, lbfgs_direction, CurvaturePairs};
use crate::error::{FwiError, Result};
use crate::gradient::FwiProblem;
use crate::model::ModelField;

/// Loop guard: iterate while `k < maxiter`, `|g| > tol_g` and `J > tol_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    pub tol_g: f64,
    pub tol_j: f64,
    pub maxiter: usize,
}

impl StoppingCriteria {
    pub fn new(tol_g: f64, tol_j: f64, maxiter: usize) -> Result<Self> {
        if !(tol_g > 0.0 && tol_j > 0.0) {
            return Err(FwiError::validation(format!(
                "tolerances must be positive, got tol_g={tol_g}, tol_j={tol_j}"
            )));
        }
        Ok(Self { tol_g, tol_j, maxiter })
    }

    /// The reason to stop at this state, if any.
    pub fn check(&self, k: usize, misfit: f64, grad_norm: f64) -> Option<StopReason> {
        if k >= self.maxiter {
            Some(StopReason::MaxIterations)
        } else if grad_norm <= self.tol_g {
            Some(StopReason::GradientTolerance)
        } else if misfit <= self.tol_j {
            Some(StopReason::MisfitTolerance)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIterations,
    GradientTolerance,
    MisfitTolerance,
    /// L-BFGS backtracking found no decrease even along the steepest descent direction.
    LineSearchFailed,
}

/// Projection box on slowness squared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsConstraint {
    pub m_min: f64,
    pub m_max: f64,
}

impl BoundsConstraint {
    pub fn new(m_min: f64, m_max: f64) -> Result<Self> {
        if !(m_min > 0.0 && m_min < m_max && m_max.is_finite()) {
            return Err(FwiError::validation(format!("invalid bounds [{m_min}, {m_max}]")));
        }
        Ok(Self { m_min, m_max })
    }

    /// Bounds from prior velocity limits.
    pub fn from_velocity(c_min: f64, c_max: f64) -> Result<Self> {
        if !(c_min > 0.0 && c_min < c_max) {
            return Err(FwiError::validation(format!("invalid velocity bounds [{c_min}, {c_max}]")));
        }
        Self::new(1.0 / (c_max * c_max), 1.0 / (c_min * c_min))
    }

    pub fn project(&self, m: &mut [f64]) {
        for v in m {
            *v = v.clamp(self.m_min, self.m_max);
        }
    }

    pub fn contains(&self, m: &[f64]) -> bool {
        m.iter().all(|v| *v >= self.m_min && *v <= self.m_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum OptimizerKind {
    BarzilaiBorwein { variant: BbVariant },
    Lbfgs { memory: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// First step is `initial_step * |m| / |g|`.
    pub initial_step: f64,
    /// Sufficient-decrease constant for L-BFGS backtracking.
    pub armijo: f64,
    pub max_backtracks: usize,
    pub bounds: Option<BoundsConstraint>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Lbfgs { memory: 10 },
            initial_step: 1e-2,
            armijo: 1e-4,
            max_backtracks: 30,
            bounds: None,
        }
    }
}

impl OptimizerConfig {
    pub fn bb(variant: BbVariant) -> Self {
        Self {
            kind: OptimizerKind::BarzilaiBorwein { variant },
            ..Self::default()
        }
    }

    pub fn lbfgs(memory: usize) -> Self {
        Self {
            kind: OptimizerKind::Lbfgs { memory },
            ..Self::default()
        }
    }

    pub fn with_bounds(mut self, bounds: BoundsConstraint) -> Self {
        self.bounds = Some(bounds);
        self
    }
}

/// One completed iteration. `misfit` and `grad_norm` belong to the new iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub frequency_hz: f64,
    pub k: usize,
    pub misfit: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    pub iter_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct OptimizerHistory {
    pub pairs: CurvaturePairs,
    pub records: Vec<IterationRecord>,
    pub initial_misfit: Option<f64>,
    pub final_misfit: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub best_misfit: Option<f64>,
    pub best_iteration: Option<usize>,
    pub best_model: Option<Vec<f64>>,
    pub stop_reason: Option<StopReason>,
}

impl OptimizerHistory {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn mean_iteration_seconds(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.records.iter().map(|r| r.iter_seconds).sum::<f64>() / self.records.len() as f64
        }
    }
}

/// Anything that returns a value and gradient at a point.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<F> Objective for F
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self(x)
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn checked(value: f64, grad: Vec<f64>, k: usize) -> Result<(f64, Vec<f64>)> {
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(FwiError::Numerical(format!("non-finite misfit or gradient at iteration {k}")));
    }
    Ok((value, grad))
}

/// Runs `m <- m - alpha g` (BB) or `m <- m + alpha d` (L-BFGS) from `x0` until
/// the stopping guard fires. Returns the final iterate, not the best one.
pub fn minimize(
    objective: &mut dyn Objective,
    x0: &[f64],
    config: &OptimizerConfig,
    stop: &StoppingCriteria,
    frequency_hz: f64,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(Vec<f64>, OptimizerHistory)> {
    let memory = match config.kind {
        OptimizerKind::Lbfgs { memory } => memory,
        OptimizerKind::BarzilaiBorwein { .. } => 1,
    };
    let mut history = OptimizerHistory {
        pairs: CurvaturePairs::new(memory),
        ..Default::default()
    };
    let mut x = x0.to_vec();
    if let Some(b) = &config.bounds {
        b.project(&mut x);
    }
    if stop.maxiter == 0 {
        history.stop_reason = Some(StopReason::MaxIterations);
        return Ok((x, history));
    }

    let (mut value, mut grad) = {
        let (v, g) = objective.evaluate(&x)?;
        checked(v, g, 0)?
    };
    history.initial_misfit = Some(value);
    history.best_misfit = Some(value);
    history.best_iteration = Some(0);
    let first_scale = norm(&x) / norm(&grad).max(f64::MIN_POSITIVE);
    let seed_step = config.initial_step * first_scale;
    let mut last_alpha = seed_step;
    let mut k = 0;

    loop {
        if let Some(reason) = stop.check(k, value, norm(&grad)) {
            history.stop_reason = Some(reason);
            break;
        }
        let started = Instant::now();
        let step = match config.kind {
            OptimizerKind::BarzilaiBorwein { variant } => {
                let range = (1e-12 * first_scale, 1e12 * first_scale);
                let alpha = match history.pairs.iter().next_back() {
                    Some((s, y)) => bb_step(s, y, variant, last_alpha, range)?,
                    None if k == 0 => seed_step,
                    None => last_alpha.clamp(range.0, range.1),
                };
                let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - alpha * gi).collect();
                if let Some(b) = &config.bounds {
                    b.project(&mut trial);
                }
                let (v, g) = objective.evaluate(&trial)?;
                let (v, g) = checked(v, g, k + 1)?;
                Some((alpha, trial, v, g))
            }
            OptimizerKind::Lbfgs { .. } => lbfgs_step(objective, &mut history, &x, value, &grad, seed_step, config, k)?,
        };
        let Some((alpha, x_new, v_new, g_new)) = step else {
            history.stop_reason = Some(StopReason::LineSearchFailed);
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        if let OptimizerKind::BarzilaiBorwein { .. } = config.kind {
            // BB only needs the latest pair; it guards s.y itself
            history.pairs.clear();
        }
        history.pairs.push(s, y);
        x = x_new;
        value = v_new;
        grad = g_new;
        last_alpha = alpha;
        k += 1;

        let record = IterationRecord {
            frequency_hz,
            k,
            misfit: value,
            grad_norm: norm(&grad),
            alpha,
            iter_seconds: started.elapsed().as_secs_f64(),
        };
        observer(&record);
        history.records.push(record);
        if history.best_misfit.is_none_or(|b| value < b) {
            history.best_misfit = Some(value);
            history.best_iteration = Some(k);
            history.best_model = Some(x.clone());
        }
    }
    history.final_misfit = Some(value);
    history.final_grad_norm = Some(norm(&grad));
    Ok((x, history))
}

type Trial = Option<(f64, Vec<f64>, f64, Vec<f64>)>;

#[allow(clippy::too_many_arguments)]
fn lbfgs_step(
    objective: &mut dyn Objective,
    history: &mut OptimizerHistory,
    x: &[f64],
    value: f64,
    grad: &[f64],
    seed_step: f64,
    config: &OptimizerConfig,
    k: usize,
) -> Result<Trial> {
    for attempt in 0..2 {
        let steepest = history.pairs.is_empty();
        let mut direction = lbfgs_direction(&history.pairs, grad);
        if dot(&direction, grad) >= 0.0 {
            direction = grad.iter().map(|g| -g).collect();
        }
        let mut alpha = if steepest { seed_step } else { 1.0 };
        for _ in 0..=config.max_backtracks {
            let mut trial: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi + alpha * di).collect();
            if let Some(b) = &config.bounds {
                b.project(&mut trial);
            }
            let moved: f64 = trial.iter().zip(x).zip(grad).map(|((t, xi), g)| g * (t - xi)).sum();
            let (v, g) = objective.evaluate(&trial)?;
            let (v, g) = checked(v, g, k + 1)?;
            if v <= value + config.armijo * moved && moved < 0.0 {
                return Ok(Some((alpha, trial, v, g)));
            }
            alpha *= 0.5;
        }
        if attempt == 0 && !steepest {
            history.pairs.clear();
        } else {
            break;
        }
    }
    Ok(None)
}

/// Inverts one frequency starting from `m_init` (slowness squared on the model grid).
pub fn minimize_single_frequency(
    m_init: &ModelField,
    problem: &FwiProblem<'_>,
    config: &OptimizerConfig,
    stop: &StoppingCriteria,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<(ModelField, OptimizerHistory)> {
    let mut objective = |m: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (report, gradient) = problem.misfit_and_gradient(m)?;
        Ok((report.value, gradient.into_values()))
    };
    let frequency_hz = problem.observed.frequency_hz();
    let (m, history) = minimize(&mut objective, m_init.values(), config, stop, frequency_hz, observer)?;
    Ok((m_init.with_values(m)?, history))
}
