//! Calibration sample sets, as read from calibration JSON files.
//!
//! Coordinates are `[lon, lat]` pairs and snap to the pixel containing them on
//! whatever grid the analysis runs on.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{EngineError, ThresholdPair};
use crate::raster::GridSpec;

/// Dates whose composites supply the calibration differences, when they should
/// differ from the dates being compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceDates {
    pub date1: NaiveDate,
    pub date2: NaiveDate,
}

/// Sampled areas of construction (`constructed`) and destruction (`destructed`).
///
/// `thresholds`, when present, is used as-is and the coordinates are ignored.
/// Otherwise thresholds are derived from the difference image at
/// `reference_dates`, or at the requested dates when that is absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSet {
    #[serde(default)]
    pub constructed: Vec<(f64, f64)>,
    #[serde(default)]
    pub destructed: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_dates: Option<ReferenceDates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdPair>,
}

/// Sampled pumice-raft pixels and non-pumice (sea) pixels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PumiceCalibration {
    pub pumice: Vec<(f64, f64)>,
    pub non_pumice: Vec<(f64, f64)>,
}

impl CalibrationSet {
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_json(&bytes).map_err(std::io::Error::other)
    }
}

impl PumiceCalibration {
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_json(&bytes).map_err(std::io::Error::other)
    }
}

/// Values at the valid pixels under `coords`. Coordinates off the grid or on
/// nodata are skipped; duplicates are kept.
pub(crate) fn sample_at(grid: &GridSpec, values: &[f32], valid: &[bool], coords: &[(f64, f64)]) -> Vec<f64> {
    coords
        .iter()
        .filter_map(|&(lon, lat)| grid.pixel_at(lon, lat))
        .map(|(c, r)| grid.index(c, r))
        .filter(|&i| valid[i])
        .map(|i| values[i] as f64)
        .collect()
}

/// Otsu threshold over the sampled values of one calibration class.
pub(crate) fn class_threshold(samples: &[f64], label: &str) -> Result<f64, EngineError> {
    super::otsu_threshold(samples).map_err(|e| e.for_class(label))
}
