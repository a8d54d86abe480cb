//! Vertical velocity profiles at chosen horizontal positions.

use std::fs;
use std::path::Path;

use crate::error::{FwiError, Result};
use crate::model::VelocityModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub requested_x: f64,
    /// Position of the model column that was sampled.
    pub x: f64,
    pub column: usize,
    pub values: Vec<f64>,
}

/// Nearest-column profiles; every `x` must lie within the model width.
pub fn extract_profiles(model: &VelocityModel, xs: &[f64]) -> Result<Vec<Profile>> {
    let (x0, _) = model.origin();
    let tol = 1e-9 * model.width().max(model.dx());
    xs.iter()
        .map(|&x| {
            let rel = x - x0;
            if !(rel >= -tol && rel <= model.width() + tol) {
                return Err(FwiError::OutsideDomain { x, z: model.origin().1 });
            }
            let column = ((rel / model.dx()).round() as usize).min(model.nx() - 1);
            Ok(Profile {
                requested_x: x,
                x: x0 + column as f64 * model.dx(),
                column,
                values: (0..model.nz()).map(|iz| model.at(iz, column)).collect(),
            })
        })
        .collect()
}

/// CSV with a `depth_m` column and one `x_<sampled x>` column per profile.
pub fn format_profiles(model: &VelocityModel, profiles: &[Profile]) -> String {
    let mut out = String::from("depth_m");
    for p in profiles {
        out.push_str(&format!(",x_{}", p.x));
    }
    out.push('\n');
    let z0 = model.origin().1;
    for iz in 0..model.nz() {
        out.push_str(&format!("{}", z0 + iz as f64 * model.dz()));
        for p in profiles {
            out.push_str(&format!(",{}", p.values[iz]));
        }
        out.push('\n');
    }
    out
}

pub fn write_profiles(path: &Path, model: &VelocityModel, xs: &[f64]) -> Result<Vec<Profile>> {
    let profiles = extract_profiles(model, xs)?;
    fs::write(path, format_profiles(model, &profiles)).map_err(|e| FwiError::io(path, e))?;
    Ok(profiles)
}
