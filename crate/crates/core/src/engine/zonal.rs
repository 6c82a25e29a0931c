use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::catalog::{Catalog, SceneId, Sensor};
use crate::raster::{rasterize_polygon, GeoPolygon, Mask, Raster};

/// Inclusive calendar-date range; open on a side when that bound is `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

impl DateRange {
    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        let d = ts.date_naive();
        self.start.is_none_or(|s| d >= s) && self.end.is_none_or(|e| d <= e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesSample {
    pub scene: SceneId,
    pub timestamp: DateTime<Utc>,
    /// Absent when no valid pixel fell inside the polygon.
    pub mean: Option<f64>,
    pub valid_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<TimeSeriesSample>,
}

/// Mean of `band` over valid pixels under `mask`, summed in row-major order.
pub fn zonal_mean(raster: &Raster, band: &str, mask: &Mask) -> Result<(Option<f64>, usize), EngineError> {
    if mask.grid != *raster.grid() {
        return Err(EngineError::GridMismatch("zone mask and raster differ in grid".into()));
    }
    let values = raster.band(band)?;
    let (mut sum, mut count) = (0.0f64, 0usize);
    for ((&v, &ok), &inside) in values.iter().zip(raster.valid()).zip(&mask.bits) {
        if ok && inside {
            sum += v as f64;
            count += 1;
        }
    }
    Ok(((count > 0).then(|| sum / count as f64), count))
}

/// Per-scene mean of `band` over the pixels whose centers fall inside `poly`.
///
/// Every scene of `sensor` in `range` whose extent touches the polygon's bounding
/// box contributes one sample, in timestamp order.
pub fn zonal_timeseries(
    catalog: &Catalog,
    poly: &GeoPolygon,
    sensor: Sensor,
    band: &str,
    range: &DateRange,
) -> Result<TimeSeries, EngineError> {
    poly.validate()?;
    let pb = poly.bbox().expect("validated polygon has vertices");
    let mut samples = Vec::new();
    let mut any_footprint = false;
    for entry in catalog.entries() {
        let b = &entry.bbox;
        let touches = b.west <= pb.east && pb.west <= b.east && b.south <= pb.north && pb.south <= b.north;
        if entry.sensor != sensor || !range.contains(&entry.timestamp) || !touches {
            continue;
        }
        let scene = catalog.load(entry)?;
        let zone = rasterize_polygon(poly, scene.raster.grid())?;
        any_footprint |= zone.bits.iter().any(|b| *b);
        let (mean, valid_pixels) = zonal_mean(&scene.raster, band, &zone)?;
        samples.push(TimeSeriesSample { scene: entry.id.clone(), timestamp: entry.timestamp, mean, valid_pixels });
    }
    if !any_footprint {
        return Err(EngineError::EmptyPolygonFootprint);
    }
    Ok(TimeSeries { samples })
}
