//! SAR backscatter change detection.
//!
//! The dB difference `D = I(date2) − I(date1)` is thresholded from above for
//! increases (blue: construction) and from below for decreases (red: removal).
//! Each threshold is an Otsu split of `D` sampled over its calibration class.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::calibration::{class_threshold, sample_at};
use super::composite::{analysis_grid, composite_on_grid};
use super::{CalibrationSet, EngineError};
use crate::catalog::{Catalog, DateWindow, Sensor, SAR_BAND};
use crate::raster::{BoundingBox, GridSpec, Mask, Raster};

/// Blue (increase) and red (decrease) thresholds in dB of difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    pub blue: f64,
    pub red: f64,
}

impl ThresholdPair {
    /// Requires `blue > red`, which keeps the two masks disjoint.
    pub fn new(blue: f64, red: f64) -> Result<Self, EngineError> {
        let pair = Self { blue, red };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.blue > self.red {
            Ok(())
        } else {
            Err(EngineError::CalibrationInconsistent { blue: self.blue, red: self.red })
        }
    }
}

/// Per-pixel dB difference with its common validity.
#[derive(Debug, Clone)]
pub struct DiffPlane {
    pub grid: GridSpec,
    pub values: Vec<f32>,
    pub valid: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct ChangeLayer {
    pub blue_mask: Mask,
    pub red_mask: Mask,
    pub thresholds: ThresholdPair,
    pub grid: GridSpec,
}

impl ChangeLayer {
    /// Two 0/1 float bands `blue` and `red`, all pixels valid.
    pub fn to_raster(&self) -> Raster {
        Raster::from_bands(self.grid, [("blue", self.blue_mask.to_f32()), ("red", self.red_mask.to_f32())])
            .expect("masks share the layer grid")
    }
}

/// `after − before` on `band`; pixels invalid in either input are invalid.
pub fn difference(before: &Raster, after: &Raster, band: &str) -> Result<DiffPlane, EngineError> {
    if before.grid() != after.grid() {
        return Err(EngineError::GridMismatch(format!("{:?} vs {:?}", before.grid(), after.grid())));
    }
    let (a, b) = (before.band(band)?, after.band(band)?);
    let values = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let valid = before.valid().iter().zip(after.valid()).map(|(p, q)| *p && *q).collect();
    Ok(DiffPlane { grid: *before.grid(), values, valid })
}

/// Otsu thresholds of the difference sampled at each calibration class.
pub fn calibrate_thresholds(diff: &DiffPlane, calib: &CalibrationSet) -> Result<ThresholdPair, EngineError> {
    let constructed = sample_at(&diff.grid, &diff.values, &diff.valid, &calib.constructed);
    let destructed = sample_at(&diff.grid, &diff.values, &diff.valid, &calib.destructed);
    let blue = class_threshold(&constructed, "constructed")?;
    let red = class_threshold(&destructed, "destructed")?;
    ThresholdPair::new(blue, red)
}

/// `blue = D ≥ t_blue`, `red = D ≤ t_red`, both restricted to valid pixels.
pub fn apply_thresholds(diff: &DiffPlane, thresholds: ThresholdPair) -> Result<ChangeLayer, EngineError> {
    thresholds.validate()?;
    let n = diff.values.len();
    let mut blue = Vec::with_capacity(n);
    let mut red = Vec::with_capacity(n);
    for (&d, &ok) in diff.values.iter().zip(&diff.valid) {
        let d = d as f64;
        blue.push(ok && d >= thresholds.blue);
        red.push(ok && d <= thresholds.red);
    }
    Ok(ChangeLayer {
        blue_mask: Mask::new(diff.grid, blue)?,
        red_mask: Mask::new(diff.grid, red)?,
        thresholds,
        grid: diff.grid,
    })
}

/// Change between two composites. Thresholds come from `calib.thresholds` when
/// set, otherwise from this pair's own difference.
pub fn detect_change(before: &Raster, after: &Raster, calib: &CalibrationSet) -> Result<ChangeLayer, EngineError> {
    let diff = difference(before, after, SAR_BAND)?;
    let thresholds = match calib.thresholds {
        Some(t) => t,
        None => calibrate_thresholds(&diff, calib)?,
    };
    apply_thresholds(&diff, thresholds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangeRequest {
    pub date1: NaiveDate,
    pub date2: NaiveDate,
    pub calibration: CalibrationSet,
    pub bbox: BoundingBox,
    /// Half-width of each date's SAR compositing window.
    pub window_days: u32,
}

impl ChangeRequest {
    pub fn new(date1: NaiveDate, date2: NaiveDate, calibration: CalibrationSet, bbox: BoundingBox) -> Self {
        Self { date1, date2, calibration, bbox, window_days: DateWindow::SAR_DAYS }
    }

    fn window(&self, date: NaiveDate) -> DateWindow {
        DateWindow::symmetric(date, self.window_days)
    }
}

/// Blue/red change layer between the SAR composites at `date1` and `date2`.
pub fn sar_change(catalog: &Catalog, req: &ChangeRequest) -> Result<ChangeLayer, EngineError> {
    let w1 = req.window(req.date1);
    let w2 = req.window(req.date2);
    let grid = analysis_grid(catalog, Sensor::Sar, &w1, &req.bbox)?;
    let c1 = composite_on_grid(catalog, Sensor::Sar, &w1, &req.bbox, &grid)?;
    let c2 = if req.date2 == req.date1 {
        c1.clone()
    } else {
        composite_on_grid(catalog, Sensor::Sar, &w2, &req.bbox, &grid)?
    };
    let diff = difference(&c1, &c2, SAR_BAND)?;

    let thresholds = match (req.calibration.thresholds, req.calibration.reference_dates) {
        (Some(t), _) => t,
        (None, Some(refs)) if (refs.date1, refs.date2) != (req.date1, req.date2) => {
            let r1 = composite_on_grid(catalog, Sensor::Sar, &req.window(refs.date1), &req.bbox, &grid)?;
            let r2 = composite_on_grid(catalog, Sensor::Sar, &req.window(refs.date2), &req.bbox, &grid)?;
            calibrate_thresholds(&difference(&r1, &r2, SAR_BAND)?, &req.calibration)?
        }
        _ => calibrate_thresholds(&diff, &req.calibration)?,
    };
    apply_thresholds(&diff, thresholds)
}
