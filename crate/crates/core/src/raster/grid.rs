use serde::{Deserialize, Serialize};

use super::RasterError;

/// Largest latitude reachable by the Web-Mercator tile pyramid.
pub const MAX_MERCATOR_LAT: f64 = 85.051_128_779_806_59;

/// Axis-aligned extent in geographic degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub west: f64,
    pub south: f64,
    pub east: f64,
    pub north: f64,
}

impl BoundingBox {
    pub fn new(west: f64, south: f64, east: f64, north: f64) -> Result<Self, RasterError> {
        let bbox = Self { west, south, east, north };
        bbox.validate()?;
        Ok(bbox)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        let finite = [self.west, self.south, self.east, self.north].iter().all(|v| v.is_finite());
        if !finite || self.west >= self.east || self.south >= self.north {
            return Err(RasterError::InvalidBoundingBox(*self));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.east - self.west
    }

    pub fn height(&self) -> f64 {
        self.north - self.south
    }

    /// Closed-interval containment.
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        lon >= self.west && lon <= self.east && lat >= self.south && lat <= self.north
    }

    /// True when the two boxes share a region of positive area.
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.west < other.east && other.west < self.east && self.south < other.north && other.south < self.north
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        if !self.intersects(other) {
            return None;
        }
        Some(BoundingBox {
            west: self.west.max(other.west),
            south: self.south.max(other.south),
            east: self.east.min(other.east),
            north: self.north.min(other.north),
        })
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            west: self.west.min(other.west),
            south: self.south.min(other.south),
            east: self.east.max(other.east),
            north: self.north.max(other.north),
        }
    }
}

/// Regular lat/lon pixel grid anchored at its top-left corner.
///
/// Pixel `(col, row)` covers `[origin_lon + col·size, origin_lon + (col+1)·size]` in
/// longitude and `[origin_lat − (row+1)·size, origin_lat − row·size]` in latitude.
/// All point-in-cell tests use the pixel center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_lon: f64,
    pub origin_lat: f64,
    pub pixel_size: f64,
    pub width: u32,
    pub height: u32,
}

impl GridSpec {
    pub fn new(
        origin_lon: f64,
        origin_lat: f64,
        pixel_size: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, RasterError> {
        let grid = Self { origin_lon, origin_lat, pixel_size, width, height };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        if self.width == 0 || self.height == 0 {
            return Err(RasterError::InvalidGrid("width and height must be at least 1".into()));
        }
        if !(self.pixel_size.is_finite() && self.pixel_size > 0.0) {
            return Err(RasterError::InvalidGrid(format!("pixel_size must be positive, got {}", self.pixel_size)));
        }
        if !(self.origin_lon.is_finite() && self.origin_lat.is_finite()) {
            return Err(RasterError::InvalidGrid("origin must be finite".into()));
        }
        let east = self.east();
        if east - self.origin_lon > 360.0 {
            return Err(RasterError::UnsupportedExtent(format!(
                "longitude span {} exceeds 360 degrees",
                east - self.origin_lon
            )));
        }
        if self.origin_lon < -180.0 || east > 180.0 {
            return Err(RasterError::UnsupportedExtent(format!(
                "grid [{}, {}] crosses the antimeridian",
                self.origin_lon, east
            )));
        }
        if self.origin_lat >= MAX_MERCATOR_LAT || self.south() <= -MAX_MERCATOR_LAT {
            return Err(RasterError::UnsupportedExtent(format!(
                "latitude rows [{}, {}] leave the tile-addressable band",
                self.south(),
                self.origin_lat
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn east(&self) -> f64 {
        self.origin_lon + self.width as f64 * self.pixel_size
    }

    pub fn south(&self) -> f64 {
        self.origin_lat - self.height as f64 * self.pixel_size
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox { west: self.origin_lon, south: self.south(), east: self.east(), north: self.origin_lat }
    }

    pub fn pixel_area(&self) -> f64 {
        self.pixel_size * self.pixel_size
    }

    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }

    #[inline]
    pub fn center_lon(&self, col: u32) -> f64 {
        self.origin_lon + (col as f64 + 0.5) * self.pixel_size
    }

    #[inline]
    pub fn center_lat(&self, row: u32) -> f64 {
        self.origin_lat - (row as f64 + 0.5) * self.pixel_size
    }

    pub fn pixel_center(&self, col: u32, row: u32) -> (f64, f64) {
        (self.center_lon(col), self.center_lat(row))
    }

    /// Pixel containing `(lon, lat)`, which is also the pixel with the nearest center.
    /// Points on the east or south edge of the grid belong to the last column/row.
    pub fn pixel_at(&self, lon: f64, lat: f64) -> Option<(u32, u32)> {
        let fx = (lon - self.origin_lon) / self.pixel_size;
        let fy = (self.origin_lat - lat) / self.pixel_size;
        if !(fx.is_finite() && fy.is_finite()) {
            return None;
        }
        if fx < 0.0 || fy < 0.0 || fx > self.width as f64 || fy > self.height as f64 {
            return None;
        }
        let col = (fx.floor() as u32).min(self.width - 1);
        let row = (fy.floor() as u32).min(self.height - 1);
        Some((col, row))
    }

    /// Sub-grid of columns `col0..col0+width` and rows `row0..row0+height`.
    pub fn subgrid(&self, col0: u32, row0: u32, width: u32, height: u32) -> GridSpec {
        GridSpec {
            origin_lon: self.origin_lon + col0 as f64 * self.pixel_size,
            origin_lat: self.origin_lat - row0 as f64 * self.pixel_size,
            pixel_size: self.pixel_size,
            width,
            height,
        }
    }
}
