//! Floating pumice detection from a single optical acquisition.
//!
//! NDWI is high over open sea and drops over floating material. The calibration
//! samples of both classes are pooled into one Otsu run; pixels below that
//! threshold are pumice unless they are cloudy or on land.

use chrono::NaiveDate;

use super::calibration::sample_at;
use super::{ndwi, EngineError, PumiceCalibration, NDWI_BAND};
use crate::catalog::{Catalog, DateWindow, SceneEntry, SceneId, Sensor, CLOUD_BAND};
use crate::raster::{read_window, BoundingBox, Mask, Raster};

#[derive(Debug, Clone, PartialEq)]
pub struct PumiceRequest {
    pub date: NaiveDate,
    pub calibration: PumiceCalibration,
    /// Restrict to this extent; the whole scene when `None`.
    pub bbox: Option<BoundingBox>,
    /// Farthest a scene may be from `date`, in days.
    pub search_days: u32,
}

impl PumiceRequest {
    pub fn new(date: NaiveDate, calibration: PumiceCalibration) -> Self {
        Self { date, calibration, bbox: None, search_days: DateWindow::OPTICAL_DAYS }
    }
}

#[derive(Debug, Clone)]
pub struct PumiceResult {
    pub mask: Mask,
    pub threshold: f64,
    pub scene: SceneId,
}

/// Scene of `sensor` closest in calendar days to `date`; ties go to the earlier one.
pub fn nearest_scene<'a>(
    catalog: &'a Catalog,
    sensor: Sensor,
    date: NaiveDate,
    bbox: Option<&BoundingBox>,
    max_days: u32,
) -> Option<&'a SceneEntry> {
    let window = DateWindow::symmetric(date, max_days);
    catalog
        .entries()
        .iter()
        .filter(|e| e.sensor == sensor && window.contains(&e.timestamp))
        .filter(|e| bbox.is_none_or(|b| e.bbox.intersects(b)))
        .min_by_key(|e| ((e.timestamp.date_naive() - date).num_days().abs(), e.timestamp))
}

/// Pumice mask for one optical raster (`green`, `nir`, `cloud` bands).
///
/// `land` is a per-pixel land flag on the raster's grid. Returns the mask and the
/// pooled Otsu threshold.
pub fn pumice_from_scene(
    scene: &Raster,
    land: Option<&[bool]>,
    calib: &PumiceCalibration,
) -> Result<(Mask, f64), EngineError> {
    let index = ndwi(scene.view("green")?, scene.view("nir")?)?;
    let values = index.band(NDWI_BAND)?;
    let grid = index.grid();
    let mut pooled = sample_at(grid, values, index.valid(), &calib.pumice);
    pooled.extend(sample_at(grid, values, index.valid(), &calib.non_pumice));
    let threshold = super::otsu_threshold(&pooled).map_err(|e| e.for_class("pumice+non_pumice"))?;

    let cloud = scene.band(CLOUD_BAND)?;
    if let Some(land) = land {
        if land.len() != grid.len() {
            return Err(EngineError::GridMismatch("land mask size differs from scene".into()));
        }
    }
    let bits = (0..grid.len())
        .map(|i| index.valid()[i] && (values[i] as f64) < threshold && cloud[i] == 0.0 && !land.is_some_and(|l| l[i]))
        .collect();
    Ok((Mask::new(*grid, bits)?, threshold))
}

pub fn detect_pumice(catalog: &Catalog, req: &PumiceRequest) -> Result<PumiceResult, EngineError> {
    let entry = nearest_scene(catalog, Sensor::Optical, req.date, req.bbox.as_ref(), req.search_days).ok_or(
        EngineError::NoScenesInWindow {
            sensor: Sensor::Optical,
            window: DateWindow::symmetric(req.date, req.search_days),
        },
    )?;
    let scene = catalog.load(entry)?;
    let raster = match &req.bbox {
        Some(b) => read_window(&scene.raster, b)?,
        None => scene.raster,
    };
    let land = catalog.land_mask_on(raster.grid())?;
    let (mask, threshold) = pumice_from_scene(&raster, land.as_deref(), &req.calibration)?;
    Ok(PumiceResult { mask, threshold, scene: entry.id.clone() })
}
