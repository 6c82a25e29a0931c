//! Layer specifications and their computed rasters.

use std::path::Path;

use chrono::NaiveDate;
use grasp_core::catalog::{DateWindow, SceneId};
use grasp_core::engine::{
    detect_pumice, sar_change, temporal_composite, CalibrationSet, ChangeRequest, PumiceCalibration, PumiceRequest,
};
use grasp_core::{BoundingBox, Catalog, EngineError, Raster, Sensor};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::ApiError;

pub const CALIBRATION_DIR: &str = "calibration";
pub const PUMICE_BAND: &str = "pumice";

/// What to compute. Parsed from JSON with a `kind` tag; calibration may be given
/// inline or as the name of a file under the catalog's `calibration/` directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    RgbComposite {
        date: NaiveDate,
        window_days: u32,
        bbox: Option<BoundingBox>,
        stretch: (f64, f64),
    },
    SarChange {
        date1: NaiveDate,
        date2: NaiveDate,
        calibration: CalibrationSet,
        window_days: u32,
        bbox: Option<BoundingBox>,
    },
    Pumice {
        date: NaiveDate,
        calibration: PumiceCalibration,
        search_days: u32,
        bbox: Option<BoundingBox>,
    },
    SarIntensity {
        date: NaiveDate,
        window_days: u32,
        bbox: Option<BoundingBox>,
        range_db: (f64, f64),
    },
}

pub const DEFAULT_STRETCH: (f64, f64) = (0.0, 0.3);
pub const DEFAULT_RANGE_DB: (f64, f64) = (-25.0, 0.0);

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value, ApiError> {
    obj.get(name).filter(|v| !v.is_null()).ok_or_else(|| ApiError::invalid(name, format!("missing field '{name}'")))
}

pub(crate) fn parse_date(v: &Value, name: &str) -> Result<NaiveDate, ApiError> {
    let s = v.as_str().ok_or_else(|| ApiError::invalid(name, "expected a YYYY-MM-DD string"))?;
    let day = s.get(..10).unwrap_or(s);
    NaiveDate::parse_from_str(day, "%Y-%m-%d").map_err(|e| ApiError::invalid(name, format!("invalid date '{s}': {e}")))
}

fn date(obj: &Map<String, Value>, name: &str) -> Result<NaiveDate, ApiError> {
    parse_date(field(obj, name)?, name)
}

fn days(obj: &Map<String, Value>, name: &str, default: u32) -> Result<u32, ApiError> {
    match obj.get(name).filter(|v| !v.is_null()) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .and_then(|d| u32::try_from(d).ok())
            .filter(|d| *d <= 3660)
            .ok_or_else(|| ApiError::invalid(name, "expected a whole number of days up to 3660")),
    }
}

fn pair(obj: &Map<String, Value>, name: &str, default: (f64, f64)) -> Result<(f64, f64), ApiError> {
    match obj.get(name).filter(|v| !v.is_null()) {
        None => Ok(default),
        Some(v) => serde_json::from_value::<(f64, f64)>(v.clone())
            .ok()
            .filter(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo < hi)
            .ok_or_else(|| ApiError::invalid(name, "expected [lo, hi] with lo < hi")),
    }
}

/// `[west, south, east, north]` or `{"west": .., "south": .., "east": .., "north": ..}`.
pub(crate) fn parse_bbox(obj: &Map<String, Value>, name: &str) -> Result<Option<BoundingBox>, ApiError> {
    let Some(v) = obj.get(name).filter(|v| !v.is_null()) else {
        return Ok(None);
    };
    let bbox = if let Ok([w, s, e, n]) = serde_json::from_value::<[f64; 4]>(v.clone()) {
        BoundingBox { west: w, south: s, east: e, north: n }
    } else {
        serde_json::from_value::<BoundingBox>(v.clone())
            .map_err(|_| ApiError::invalid(name, "expected [west, south, east, north]"))?
    };
    bbox.validate().map_err(|e| ApiError::invalid(name, e.to_string()))?;
    Ok(Some(bbox))
}

fn calibration<T: for<'de> Deserialize<'de>>(obj: &Map<String, Value>, catalog_root: &Path) -> Result<T, ApiError> {
    let name = "calibration";
    let v = field(obj, name)?;
    let value = match v {
        Value::String(reference) => {
            let id = SceneId::parse(reference)
                .map_err(|_| ApiError::invalid(name, format!("invalid calibration reference '{reference}'")))?;
            let path = catalog_root.join(CALIBRATION_DIR).join(format!("{id}.json"));
            let bytes = std::fs::read(&path)
                .map_err(|_| ApiError::invalid(name, format!("calibration '{reference}' not found")))?;
            serde_json::from_slice(&bytes).map_err(|e| ApiError::invalid(name, format!("{reference}: {e}")))?
        }
        other => other.clone(),
    };
    serde_json::from_value(value).map_err(|e| ApiError::invalid(name, e.to_string()))
}

impl LayerSpec {
    pub fn parse(value: &Value, catalog_root: &Path) -> Result<Self, ApiError> {
        let obj = value.as_object().ok_or_else(|| ApiError::invalid("kind", "expected a JSON object"))?;
        let kind = field(obj, "kind")?.as_str().ok_or_else(|| ApiError::invalid("kind", "expected a string"))?;
        let bbox = parse_bbox(obj, "bbox")?;
        Ok(match kind {
            "rgb_composite" => LayerSpec::RgbComposite {
                date: date(obj, "date")?,
                window_days: days(obj, "window_days", DateWindow::OPTICAL_DAYS)?,
                bbox,
                stretch: pair(obj, "stretch", DEFAULT_STRETCH)?,
            },
            "sar_change" => LayerSpec::SarChange {
                date1: date(obj, "date1")?,
                date2: date(obj, "date2")?,
                calibration: calibration(obj, catalog_root)?,
                window_days: days(obj, "window_days", DateWindow::SAR_DAYS)?,
                bbox,
            },
            "pumice" => LayerSpec::Pumice {
                date: date(obj, "date")?,
                calibration: calibration(obj, catalog_root)?,
                search_days: days(obj, "search_days", DateWindow::OPTICAL_DAYS)?,
                bbox,
            },
            "sar_intensity" => LayerSpec::SarIntensity {
                date: date(obj, "date")?,
                window_days: days(obj, "window_days", DateWindow::SAR_DAYS)?,
                bbox,
                range_db: pair(obj, "range_db", DEFAULT_RANGE_DB)?,
            },
            other => {
                return Err(ApiError::invalid(
                    "kind",
                    format!("unknown kind '{other}', expected rgb_composite, sar_change, pumice or sar_intensity"),
                ))
            }
        })
    }

    /// Stable id over the normalized spec and the catalog version.
    pub fn layer_id(&self, catalog_version: &str) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("spec serializes"));
        h.update(b"\n");
        h.update(catalog_version.as_bytes());
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// How a layer's raster turns into RGBA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Paint {
    /// `blue` / `red` 0/1 bands.
    Change,
    /// `pumice` 0/1 band.
    Pumice,
    /// `red`, `green`, `blue` reflectance stretched linearly over `(lo, hi)`.
    Rgb(f64, f64),
    /// `vv` dB stretched linearly over `(lo, hi)` to gray.
    Gray(f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LayerInfo {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<grasp_core::engine::ThresholdPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detected_pixels: Option<usize>,
}

#[derive(Debug)]
pub struct Layer {
    pub id: String,
    pub spec: LayerSpec,
    pub raster: Raster,
    pub paint: Paint,
    pub info: LayerInfo,
}

fn extent(
    catalog: &Catalog,
    sensor: Sensor,
    bbox: &Option<BoundingBox>,
    date: NaiveDate,
) -> Result<BoundingBox, ApiError> {
    match bbox {
        Some(b) => Ok(*b),
        None => catalog
            .sensor_extent(sensor)
            .ok_or_else(|| EngineError::NoScenesInWindow { sensor, window: DateWindow::symmetric(date, 0) }.into()),
    }
}

impl Layer {
    /// Runs the analysis; thresholds are resolved here, once per layer.
    pub fn compute(catalog: &Catalog, id: String, spec: LayerSpec) -> Result<Self, ApiError> {
        let mut info = LayerInfo::default();
        let (raster, paint) = match &spec {
            LayerSpec::RgbComposite { date, window_days, bbox, stretch } => {
                let b = extent(catalog, Sensor::Optical, bbox, *date)?;
                let w = DateWindow::symmetric(*date, *window_days);
                (temporal_composite(catalog, Sensor::Optical, &w, &b)?, Paint::Rgb(stretch.0, stretch.1))
            }
            LayerSpec::SarIntensity { date, window_days, bbox, range_db } => {
                let b = extent(catalog, Sensor::Sar, bbox, *date)?;
                let w = DateWindow::symmetric(*date, *window_days);
                (temporal_composite(catalog, Sensor::Sar, &w, &b)?, Paint::Gray(range_db.0, range_db.1))
            }
            LayerSpec::SarChange { date1, date2, calibration, window_days, bbox } => {
                let b = extent(catalog, Sensor::Sar, bbox, *date1)?;
                let mut req = ChangeRequest::new(*date1, *date2, calibration.clone(), b);
                req.window_days = *window_days;
                let layer = sar_change(catalog, &req)?;
                info.thresholds = Some(layer.thresholds);
                info.detected_pixels = Some(layer.blue_mask.count() + layer.red_mask.count());
                (layer.to_raster(), Paint::Change)
            }
            LayerSpec::Pumice { date, calibration, search_days, bbox } => {
                let mut req = PumiceRequest::new(*date, calibration.clone());
                req.search_days = *search_days;
                req.bbox = *bbox;
                let result = detect_pumice(catalog, &req)?;
                info.threshold = Some(result.threshold);
                info.scene = Some(result.scene);
                info.detected_pixels = Some(result.mask.count());
                let raster = Raster::from_bands(result.mask.grid, [(PUMICE_BAND, result.mask.to_f32())])?;
                (raster, Paint::Pumice)
            }
        };
        Ok(Self { id, spec, raster, paint, info })
    }
}
