//! Velocity model files: a JSON header plus a sibling raw little-endian
//! `f32` payload (`model.json` + `model.bin`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::model::{ModelField, VelocityModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub nz: usize,
    pub nx: usize,
    pub dz: f64,
    pub dx: f64,
    pub origin: (f64, f64),
    pub dtype: String,
    pub order: String,
}

/// Path of the payload that belongs to a header path.
pub fn payload_path(header: &Path) -> PathBuf {
    header.with_extension("bin")
}

fn write_raw(header_path: &Path, header: &ModelHeader, values: impl Iterator<Item = f64>) -> Result<()> {
    if let Some(dir) = header_path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| FwiError::io(dir, e))?;
        }
    }
    let mut bytes = Vec::with_capacity(4 * header.nz * header.nx);
    for v in values {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    let bin = payload_path(header_path);
    fs::write(&bin, bytes).map_err(|e| FwiError::io(&bin, e))?;
    let text = serde_json::to_string_pretty(header).map_err(|e| FwiError::format(header_path, e.to_string()))?;
    fs::write(header_path, text + "\n").map_err(|e| FwiError::io(header_path, e))
}

fn header_for(model: &VelocityModel) -> ModelHeader {
    ModelHeader {
        nz: model.nz(),
        nx: model.nx(),
        dz: model.dz(),
        dx: model.dx(),
        origin: model.origin(),
        dtype: "f32".into(),
        order: "row-major".into(),
    }
}

/// Writes `header_path` and its `.bin` sibling. Values are stored as `f32`.
pub fn write_model(header_path: &Path, model: &VelocityModel) -> Result<()> {
    write_raw(header_path, &header_for(model), model.velocities().iter().copied())
}

/// Writes any field aligned with `model` (e.g. a gradient snapshot) in the same format.
pub fn write_field(header_path: &Path, model: &VelocityModel, field: &ModelField) -> Result<()> {
    if field.nz() != model.nz() || field.nx() != model.nx() {
        return Err(FwiError::ShapeMismatch("field does not match model grid".into()));
    }
    write_raw(header_path, &header_for(model), field.values().iter().copied())
}

pub fn read_header(header_path: &Path) -> Result<ModelHeader> {
    let text = fs::read_to_string(header_path).map_err(|e| FwiError::io(header_path, e))?;
    let header: ModelHeader =
        serde_json::from_str(&text).map_err(|e| FwiError::format(header_path, e.to_string()))?;
    if header.dtype != "f32" || header.order != "row-major" {
        return Err(FwiError::format(
            header_path,
            format!("unsupported dtype/order {}/{}", header.dtype, header.order),
        ));
    }
    Ok(header)
}

/// Reads raw values; the payload must hold exactly `4*nz*nx` bytes.
pub fn read_values(header_path: &Path) -> Result<(ModelHeader, Vec<f64>)> {
    let header = read_header(header_path)?;
    let bin = payload_path(header_path);
    let bytes = fs::read(&bin).map_err(|e| FwiError::io(&bin, e))?;
    let expected = 4 * header.nz * header.nx;
    if bytes.len() != expected {
        return Err(FwiError::format(
            &bin,
            format!("payload has {} bytes, expected {expected}", bytes.len()),
        ));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok((header, values))
}

pub fn read_model(header_path: &Path) -> Result<VelocityModel> {
    let (h, values) = read_values(header_path)?;
    VelocityModel::new(h.nz, h.nx, h.dz, h.dx, h.origin, values)
}
