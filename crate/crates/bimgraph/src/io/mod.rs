//! File formats: pointclouds (PLY, XYZ), trajectories (TUM), camera
//! calibration, rasters (PGM + JSON sidecar), detection streams (JSON Lines)
//! and graph documents.

mod cloud;
mod jsonl;
mod raster;
mod text;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use cloud::{read_cloud, write_colored_ply, write_ply, TimedCloud};
pub use jsonl::{read_detections, write_detections, write_ndjson, DetectionStream};
pub use raster::{
    read_bev, read_label_raster, read_pgm, write_bev, write_label_raster, write_pgm8, BevSidecar, Pgm,
};
pub use text::{read_calibration, read_tum, write_calibration, write_tum};

use crate::error::{AppError, AppResult};

pub fn read_text(path: &Path) -> AppResult<String> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

/// Writes a file through a buffered writer.
pub fn write_with(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> AppResult<()> {
    let file = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| AppError::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AppError::format(path, e.to_string()))?;
    write_with(path, |w| writeln!(w, "{text}"))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> AppResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| AppError::parse(path, e.line(), e.to_string()))
}
