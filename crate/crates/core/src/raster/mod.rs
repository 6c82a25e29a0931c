//! Grids, rasters, masks, polygon rasterization and tile pyramid math.
//!
//! Storage is plain geographic lat/lon; Web-Mercator only appears when
//! resampling into tiles.

mod grid;
mod polygon;
#[allow(clippy::module_inception)]
mod raster;
mod tile;
mod window;

pub use grid::{BoundingBox, GridSpec, MAX_MERCATOR_LAT};
pub use polygon::{rasterize_polygon, GeoPolygon};
pub use raster::{Band, BandView, Mask, Raster};
pub use tile::{lat_to_mercator_row, lonlat_to_tile, mercator_row_to_lat, tile_bounds, TileKey, MAX_ZOOM, TILE_SIZE};
pub use window::{read_window, resample_to_tile, window_grid};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid bounding box {0:?}")]
    InvalidBoundingBox(BoundingBox),
    #[error("unsupported extent: {0}")]
    UnsupportedExtent(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("requested area does not intersect the raster")]
    EmptyIntersection,
    #[error("{what} has {actual} pixels, expected {expected}")]
    ShapeMismatch { what: String, expected: usize, actual: usize },
    #[error("band '{0}' appears more than once")]
    DuplicateBand(String),
    #[error("band '{0}' not found")]
    MissingBand(String),
}

impl RasterError {
    /// Stable identifier used in CLI and HTTP error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            RasterError::InvalidGrid(_) => "InvalidGrid",
            RasterError::InvalidBoundingBox(_) => "InvalidBoundingBox",
            RasterError::UnsupportedExtent(_) => "UnsupportedExtent",
            RasterError::OutOfRange(_) => "OutOfRange",
            RasterError::DegeneratePolygon(_) => "DegeneratePolygon",
            RasterError::EmptyIntersection => "EmptyIntersection",
            RasterError::ShapeMismatch { .. } => "ShapeMismatch",
            RasterError::DuplicateBand(_) => "DuplicateBand",
            RasterError::MissingBand(_) => "MissingBand",
        }
    }
}
