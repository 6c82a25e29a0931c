//! Change-detection raster engine.
//!
//! * [`raster`]: grids, rasters, masks, polygon rasterization, tile math.
//! * [`container`]: the `GRSP` binary raster container.
//! * [`catalog`]: timestamped scene store with time-window and bbox queries.
//! * [`engine`]: Otsu thresholding, temporal composites, SAR change detection,
//!   NDWI, pumice detection and zonal time series.
//! * [`synth`]: deterministic synthetic catalogs with ground truth, and mask scoring.

pub mod catalog;
pub mod container;
pub mod engine;
pub mod raster;
pub mod synth;

pub use catalog::{Catalog, CatalogError, DateWindow, SceneEntry, SceneId, Sensor};
pub use engine::EngineError;
pub use raster::{BoundingBox, GeoPolygon, GridSpec, Mask, Raster, RasterError, TileKey};
