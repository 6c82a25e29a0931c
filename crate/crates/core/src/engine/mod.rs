//! Change-detection math over catalog snapshots.

mod calibration;
mod change;
mod composite;
mod ndwi;
mod otsu;
mod pumice;
mod zonal;

pub use calibration::{CalibrationSet, PumiceCalibration, ReferenceDates};
pub use change::{
    apply_thresholds, calibrate_thresholds, detect_change, difference, sar_change, ChangeLayer, ChangeRequest,
    DiffPlane, ThresholdPair,
};
pub use composite::{composite_on_grid, composite_scenes, median_in_place, temporal_composite};
pub use ndwi::{ndwi, NDWI_BAND};
pub use otsu::{otsu_fit, otsu_threshold, OtsuFit, OTSU_BINS};
pub use pumice::{detect_pumice, nearest_scene, pumice_from_scene, PumiceRequest, PumiceResult};
pub use zonal::{zonal_mean, zonal_timeseries, DateRange, TimeSeries, TimeSeriesSample};

use thiserror::Error;

use crate::catalog::{CatalogError, DateWindow, Sensor};
use crate::raster::RasterError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("degenerate samples{}: {reason}", class.as_deref().map(|c| format!(" for class '{c}'")).unwrap_or_default())]
    DegenerateSamples { class: Option<String>, reason: String },
    #[error("blue threshold {blue} must exceed red threshold {red}")]
    CalibrationInconsistent { blue: f64, red: f64 },
    #[error("no {sensor} scenes between {} and {}", window.start(), window.end())]
    NoScenesInWindow { sensor: Sensor, window: DateWindow },
    #[error("polygon covers no pixel of any scene")]
    EmptyPolygonFootprint,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

impl EngineError {
    pub(crate) fn degenerate(reason: impl Into<String>) -> Self {
        EngineError::DegenerateSamples { class: None, reason: reason.into() }
    }

    /// Labels a `DegenerateSamples` error with the calibration class it came from.
    pub(crate) fn for_class(self, label: &str) -> Self {
        match self {
            EngineError::DegenerateSamples { reason, .. } => {
                EngineError::DegenerateSamples { class: Some(label.to_owned()), reason }
            }
            other => other,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            EngineError::DegenerateSamples { .. } => "DegenerateSamples",
            EngineError::CalibrationInconsistent { .. } => "CalibrationInconsistent",
            EngineError::NoScenesInWindow { .. } => "NoScenesInWindow",
            EngineError::EmptyPolygonFootprint => "EmptyPolygonFootprint",
            EngineError::GridMismatch(_) => "GridMismatch",
            EngineError::Raster(e) => e.code(),
            EngineError::Catalog(e) => e.code(),
        }
    }
}
