//! Frequency dataset files: one JSON header line, a newline, then
//! `n_sources * n_receivers` little-endian `f64` (re, im) pairs in row-major
//! order. Files are named by the frequency in millihertz.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};
use crate::forward::{FrequencyDataset, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub omega: f64,
    pub n_sources: usize,
    pub n_receivers: usize,
    pub layout: String,
    pub dtype: String,
}

/// Frequency rounded to whole millihertz.
pub fn millihertz(frequency_hz: f64) -> u64 {
    (frequency_hz * 1000.0).round() as u64
}

pub fn dataset_file_name(frequency_hz: f64) -> String {
    format!("{}mHz.dat", millihertz(frequency_hz))
}

pub fn dataset_path(dir: &Path, frequency_hz: f64) -> PathBuf {
    dir.join(dataset_file_name(frequency_hz))
}

pub fn encode_dataset(dataset: &FrequencyDataset) -> Vec<u8> {
    let header = DatasetHeader {
        omega: dataset.omega(),
        n_sources: dataset.n_sources(),
        n_receivers: dataset.n_receivers(),
        layout: "row-major".into(),
        dtype: "c128-interleaved".into(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.reserve(16 * dataset.data().len());
    for v in dataset.data() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_dataset(bytes: &[u8], provenance: Provenance, origin: &Path) -> Result<FrequencyDataset> {
    let split = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| FwiError::format(origin, "missing header line"))?;
    let header: DatasetHeader =
        serde_json::from_slice(&bytes[..split]).map_err(|e| FwiError::format(origin, e.to_string()))?;
    if header.layout != "row-major" || header.dtype != "c128-interleaved" {
        return Err(FwiError::format(origin, "unsupported layout or dtype"));
    }
    let payload = &bytes[split + 1..];
    let count = header.n_sources * header.n_receivers;
    if payload.len() != 16 * count {
        return Err(FwiError::format(
            origin,
            format!("payload has {} bytes, expected {}", payload.len(), 16 * count),
        ));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    FrequencyDataset::new(header.omega, header.n_sources, header.n_receivers, data, provenance)
}

pub fn write_dataset(path: &Path, dataset: &FrequencyDataset) -> Result<()> {
    fs::write(path, encode_dataset(dataset)).map_err(|e| FwiError::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<FrequencyDataset> {
    let bytes = fs::read(path).map_err(|e| FwiError::io(path, e))?;
    decode_dataset(&bytes, Provenance::Observed, path)
}
