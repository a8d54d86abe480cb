//! Pixel-per-cell model rendering as binary PGM (gray) or PPM (colour).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::model::VelocityModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Palette {
    #[default]
    Gray,
    /// Blue-cyan-yellow-red ramp written as PPM.
    Jet,
}

/// Gray level of `v` under the affine map `[lo, hi] -> [0, 255]`, clipped.
pub fn gray_level(v: f64, lo: f64, hi: f64) -> u8 {
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (255.0 * t).round() as u8
}

fn jet(level: u8) -> [u8; 3] {
    let t = level as f64 / 255.0;
    let channel = |center: f64| (255.0 * (1.5 - (4.0 * t - center).abs()).clamp(0.0, 1.0)).round() as u8;
    [channel(3.0), channel(2.0), channel(1.0)]
}

fn check_clip(clip: (f64, f64)) -> Result<()> {
    if !(clip.0.is_finite() && clip.1.is_finite() && clip.0 < clip.1) {
        return Err(FwiError::validation(format!("invalid clip range [{}, {}]", clip.0, clip.1)));
    }
    Ok(())
}

/// Encodes the model, one pixel per cell, first row at the top. `clip`
/// defaults to the model's own range.
pub fn render(model: &VelocityModel, palette: Palette, clip: Option<(f64, f64)>) -> Result<Vec<u8>> {
    let clip = match clip {
        Some(c) => c,
        None if model.min_velocity() < model.max_velocity() => (model.min_velocity(), model.max_velocity()),
        None => (model.min_velocity() - 0.5, model.min_velocity() + 0.5),
    };
    check_clip(clip)?;
    let levels = model.velocities().iter().map(|&v| gray_level(v, clip.0, clip.1));
    let (magic, pixels): (&str, Vec<u8>) = match palette {
        Palette::Gray => ("P5", levels.collect()),
        Palette::Jet => ("P6", levels.flat_map(jet).collect()),
    };
    let mut out = format!("{magic}\n{} {}\n255\n", model.nx(), model.nz()).into_bytes();
    out.extend(pixels);
    Ok(out)
}

pub fn write_image(path: &Path, model: &VelocityModel, palette: Palette, clip: Option<(f64, f64)>) -> Result<()> {
    let bytes = render(model, palette, clip)?;
    fs::write(path, bytes).map_err(|e| FwiError::io(path, e))
}
