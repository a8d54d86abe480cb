//! Velocity models on rectangular grids and fields aligned with them.
//!
//! Samples sit at `origin + (j*dx, i*dz)` for row `i` (depth) and column `j`,
//! so the physical footprint spans `(nx-1)*dx` by `(nz-1)*dz`.

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};

/// Rectangular velocity field `c(x, z)` in m/s, stored row-major (`nz` rows of `nx`).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel {
    nz: usize,
    nx: usize,
    dz: f64,
    dx: f64,
    origin: (f64, f64),
    c: Vec<f64>,
}

impl VelocityModel {
    pub fn new(nz: usize, nx: usize, dz: f64, dx: f64, origin: (f64, f64), c: Vec<f64>) -> Result<Self> {
        if nz < 2 || nx < 2 {
            return Err(FwiError::validation(format!("model needs at least 2x2 samples, got {nz}x{nx}")));
        }
        if !(dz > 0.0 && dx > 0.0 && dz.is_finite() && dx.is_finite()) {
            return Err(FwiError::validation(format!("spacings must be positive, got dz={dz}, dx={dx}")));
        }
        if c.len() != nz * nx {
            return Err(FwiError::ShapeMismatch(format!(
                "expected {} velocity samples, got {}",
                nz * nx,
                c.len()
            )));
        }
        if let Some(bad) = c.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(FwiError::validation(format!("velocity must be positive and finite, found {bad}")));
        }
        Ok(Self { nz, nx, dz, dx, origin, c })
    }

    /// Model with a single constant velocity.
    pub fn constant(nz: usize, nx: usize, dz: f64, dx: f64, velocity: f64) -> Result<Self> {
        Self::new(nz, nx, dz, dx, (0.0, 0.0), vec![velocity; nz * nx])
    }

    /// Builds a model by evaluating `f(x, z)` at every sample (coordinates relative to the origin).
    pub fn from_fn(nz: usize, nx: usize, dz: f64, dx: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut c = Vec::with_capacity(nz * nx);
        for i in 0..nz {
            for j in 0..nx {
                c.push(f(j as f64 * dx, i as f64 * dz));
            }
        }
        Self::new(nz, nx, dz, dx, (0.0, 0.0), c)
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn velocities(&self) -> &[f64] {
        &self.c
    }

    pub fn at(&self, iz: usize, ix: usize) -> f64 {
        self.c[iz * self.nx + ix]
    }

    /// Horizontal extent of the sampled footprint.
    pub fn width(&self) -> f64 {
        (self.nx - 1) as f64 * self.dx
    }

    /// Vertical extent of the sampled footprint.
    pub fn depth(&self) -> f64 {
        (self.nz - 1) as f64 * self.dz
    }

    pub fn min_velocity(&self) -> f64 {
        self.c.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_velocity(&self) -> f64 {
        self.c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Arithmetic mean velocity `[c]`.
    pub fn mean_velocity(&self) -> f64 {
        self.c.iter().sum::<f64>() / self.c.len() as f64
    }

    pub fn same_shape(&self, other: &VelocityModel) -> bool {
        self.nz == other.nz
            && self.nx == other.nx
            && self.dz == other.dz
            && self.dx == other.dx
            && self.origin == other.origin
    }

    /// Slowness squared `m = c^-2`.
    pub fn slowness_squared(&self) -> ModelField {
        ModelField {
            nz: self.nz,
            nx: self.nx,
            quantity: Quantity::SlownessSquared,
            values: self.c.iter().map(|c| 1.0 / (c * c)).collect(),
        }
    }

    pub fn velocity_field(&self) -> ModelField {
        ModelField {
            nz: self.nz,
            nx: self.nx,
            quantity: Quantity::Velocity,
            values: self.c.clone(),
        }
    }

    /// Same geometry, velocities taken from `field` (velocity or slowness squared).
    pub fn with_field(&self, field: &ModelField) -> Result<VelocityModel> {
        self.check_field(field)?;
        let c = match field.quantity {
            Quantity::Velocity => field.values.clone(),
            Quantity::SlownessSquared => field.values.iter().map(|m| 1.0 / m.sqrt()).collect(),
            Quantity::Gradient => {
                return Err(FwiError::validation("a gradient field cannot be turned into a velocity model"))
            }
        };
        VelocityModel::new(self.nz, self.nx, self.dz, self.dx, self.origin, c)
    }

    /// Velocities rounded through `f32`, the precision of the on-disk format.
    pub fn quantized(&self) -> VelocityModel {
        let mut out = self.clone();
        for v in &mut out.c {
            *v = *v as f32 as f64;
        }
        out
    }

    pub(crate) fn check_field(&self, field: &ModelField) -> Result<()> {
        if field.nz != self.nz || field.nx != self.nx {
            return Err(FwiError::ShapeMismatch(format!(
                "field is {}x{}, model is {}x{}",
                field.nz, field.nx, self.nz, self.nx
            )));
        }
        Ok(())
    }
}

/// What a [`ModelField`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Velocity,
    SlownessSquared,
    Gradient,
}

/// Real field aligned 1:1 with a velocity model's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelField {
    nz: usize,
    nx: usize,
    quantity: Quantity,
    values: Vec<f64>,
}

impl ModelField {
    pub fn new(nz: usize, nx: usize, quantity: Quantity, values: Vec<f64>) -> Result<Self> {
        if values.len() != nz * nx {
            return Err(FwiError::ShapeMismatch(format!(
                "expected {} values, got {}",
                nz * nx,
                values.len()
            )));
        }
        if quantity == Quantity::SlownessSquared && values.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(FwiError::validation("slowness squared must be positive and finite"));
        }
        Ok(Self { nz, nx, quantity, values })
    }

    pub fn zeros_like(model: &VelocityModel, quantity: Quantity) -> Self {
        Self {
            nz: model.nz,
            nx: model.nx,
            quantity,
            values: vec![0.0; model.nz * model.nx],
        }
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same shape and tag, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.nz, self.nx, self.quantity, values)
    }
}
