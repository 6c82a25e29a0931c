//! Web-Mercator XYZ tile addressing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BoundingBox, RasterError, MAX_MERCATOR_LAT};

pub const MAX_ZOOM: u8 = 22;
pub const TILE_SIZE: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileKey {
    pub z: u8,
    pub x: u32,
    pub y: u32,
}

impl TileKey {
    pub fn new(z: u8, x: u32, y: u32) -> Result<Self, RasterError> {
        if z > MAX_ZOOM {
            return Err(RasterError::OutOfRange(format!("zoom {z} exceeds {MAX_ZOOM}")));
        }
        let n = 1u64 << z;
        if x as u64 >= n || y as u64 >= n {
            return Err(RasterError::OutOfRange(format!("tile ({x}, {y}) outside 0..{n} at zoom {z}")));
        }
        Ok(Self { z, x, y })
    }

    pub fn tiles_per_side(&self) -> u32 {
        1u32 << self.z
    }

    pub fn children(&self) -> [TileKey; 4] {
        let (z, x, y) = (self.z + 1, self.x * 2, self.y * 2);
        [TileKey { z, x, y }, TileKey { z, x: x + 1, y }, TileKey { z, x, y: y + 1 }, TileKey { z, x: x + 1, y: y + 1 }]
    }
}

impl std::fmt::Display for TileKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.z, self.x, self.y)
    }
}

/// Latitude of a fractional Mercator row `t ∈ [0, 1]` (0 = north edge of the world).
pub fn mercator_row_to_lat(t: f64) -> f64 {
    (PI * (1.0 - 2.0 * t)).sinh().atan().to_degrees()
}

/// Fractional Mercator row of a latitude, inverse of [`mercator_row_to_lat`].
pub fn lat_to_mercator_row(lat: f64) -> f64 {
    let phi = lat.to_radians();
    (1.0 - (phi.tan() + 1.0 / phi.cos()).ln() / PI) / 2.0
}

pub fn lonlat_to_tile(lon: f64, lat: f64, z: u8) -> Result<TileKey, RasterError> {
    if z > MAX_ZOOM {
        return Err(RasterError::OutOfRange(format!("zoom {z} exceeds {MAX_ZOOM}")));
    }
    if !(-180.0..180.0).contains(&lon) {
        return Err(RasterError::OutOfRange(format!("longitude {lon} outside [-180, 180)")));
    }
    if lat.is_nan() || lat.abs() >= MAX_MERCATOR_LAT {
        return Err(RasterError::OutOfRange(format!(
            "latitude {lat} outside (-{MAX_MERCATOR_LAT}, {MAX_MERCATOR_LAT})"
        )));
    }
    let n = (1u64 << z) as f64;
    let max = (1u64 << z) - 1;
    let x = ((lon + 180.0) / 360.0 * n).floor().clamp(0.0, max as f64) as u32;
    let y = (lat_to_mercator_row(lat) * n).floor().clamp(0.0, max as f64) as u32;
    Ok(TileKey { z, x, y })
}

pub fn tile_bounds(key: TileKey) -> BoundingBox {
    let n = (1u64 << key.z) as f64;
    BoundingBox {
        west: key.x as f64 / n * 360.0 - 180.0,
        east: (key.x + 1) as f64 / n * 360.0 - 180.0,
        north: mercator_row_to_lat(key.y as f64 / n),
        south: mercator_row_to_lat((key.y + 1) as f64 / n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_tile() {
        assert_eq!(lonlat_to_tile(0.0, 0.0, 0).unwrap(), TileKey { z: 0, x: 0, y: 0 });
        let b = tile_bounds(TileKey::new(0, 0, 0).unwrap());
        assert_eq!((b.west, b.east), (-180.0, 180.0));
        assert!((b.north - MAX_MERCATOR_LAT).abs() < 1e-9);
        assert!((b.south + MAX_MERCATOR_LAT).abs() < 1e-9);
    }

    #[test]
    fn origin_lands_in_south_east_quadrant() {
        assert_eq!(lonlat_to_tile(0.0, 0.0, 1).unwrap(), TileKey { z: 1, x: 1, y: 1 });
    }

    #[test]
    fn north_west_quadrant_bounds() {
        let b = tile_bounds(TileKey::new(1, 0, 0).unwrap());
        assert_eq!(b.west, -180.0);
        assert_eq!(b.east, 0.0);
        assert!(b.south.abs() < 1e-12);
        assert!((b.north - 85.0511).abs() < 1e-4);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(lonlat_to_tile(180.0, 0.0, 3).is_err());
        assert!(lonlat_to_tile(0.0, 85.06, 3).is_err());
        assert!(lonlat_to_tile(0.0, f64::NAN, 3).is_err());
        assert!(lonlat_to_tile(0.0, 0.0, 23).is_err());
        assert!(TileKey::new(2, 4, 0).is_err());
        assert!(TileKey::new(2, 3, 3).is_ok());
    }

    #[test]
    fn mercator_row_round_trip() {
        for lat in [-85.0, -45.5, -1e-6, 0.0, 12.25, 60.0, 85.0] {
            let back = mercator_row_to_lat(lat_to_mercator_row(lat));
            assert!((back - lat).abs() < 1e-9, "{lat} -> {back}");
        }
    }

    #[test]
    fn children_tile_their_parent() {
        let parent = TileKey::new(3, 5, 2).unwrap();
        let pb = tile_bounds(parent);
        let kids = parent.children();
        let union = kids.iter().map(|k| tile_bounds(*k)).reduce(|a, b| a.union(&b)).unwrap();
        assert_eq!(union.west, pb.west);
        assert_eq!(union.east, pb.east);
        assert!((union.north - pb.north).abs() < 1e-12);
        assert!((union.south - pb.south).abs() < 1e-12);
    }
}
