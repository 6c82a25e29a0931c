use serde::{Deserialize, Serialize};

use super::{BoundingBox, GridSpec, Mask, RasterError};

/// Polygon in lon/lat degrees. Rings are implicitly closed; fill is even-odd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoPolygon {
    pub exterior: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interiors: Vec<Vec<(f64, f64)>>,
}

impl GeoPolygon {
    pub fn new(exterior: Vec<(f64, f64)>) -> Self {
        Self { exterior, interiors: Vec::new() }
    }

    pub fn with_interiors(exterior: Vec<(f64, f64)>, interiors: Vec<Vec<(f64, f64)>>) -> Self {
        Self { exterior, interiors }
    }

    /// First ring is the exterior, the rest are holes.
    pub fn from_rings(mut rings: Vec<Vec<(f64, f64)>>) -> Result<Self, RasterError> {
        if rings.is_empty() {
            return Err(RasterError::DegeneratePolygon("no rings".into()));
        }
        let exterior = rings.remove(0);
        Ok(Self { exterior, interiors: rings })
    }

    /// Reads `[[lon, lat], ...]` rings from any of: a bare ring list, a GeoJSON
    /// `Polygon` geometry or `Feature`, or `{"exterior": ..., "interiors": ...}`.
    pub fn from_json_value(value: &serde_json::Value) -> Result<Self, RasterError> {
        use serde_json::Value;
        let bad = |msg: &str| RasterError::DegeneratePolygon(msg.into());
        let rings = |v: &Value| {
            serde_json::from_value::<Vec<Vec<(f64, f64)>>>(v.clone())
                .map_err(|e| bad(&format!("rings must be arrays of [lon, lat] pairs: {e}")))
        };
        match value {
            Value::Array(_) => Self::from_rings(rings(value)?),
            Value::Object(obj) => {
                if let Some(geom) = obj.get("geometry") {
                    return Self::from_json_value(geom);
                }
                if let Some(coords) = obj.get("coordinates") {
                    if obj.get("type").and_then(Value::as_str).is_some_and(|t| t != "Polygon") {
                        return Err(bad("only Polygon geometries are supported"));
                    }
                    return Self::from_rings(rings(coords)?);
                }
                serde_json::from_value(value.clone()).map_err(|e| bad(&e.to_string()))
            }
            _ => Err(bad("expected a ring list or polygon object")),
        }
    }

    /// Axis-aligned rectangle polygon.
    pub fn rect(bbox: &BoundingBox) -> Self {
        Self::new(vec![
            (bbox.west, bbox.north),
            (bbox.east, bbox.north),
            (bbox.east, bbox.south),
            (bbox.west, bbox.south),
        ])
    }

    /// Ring closure points (last == first) are dropped.
    fn rings(&self) -> impl Iterator<Item = &[(f64, f64)]> {
        std::iter::once(self.exterior.as_slice()).chain(self.interiors.iter().map(Vec::as_slice)).map(|ring| {
            match (ring.first(), ring.last()) {
                (Some(a), Some(b)) if ring.len() > 1 && a == b => &ring[..ring.len() - 1],
                _ => ring,
            }
        })
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        for (i, ring) in self.rings().enumerate() {
            if ring.len() < 3 {
                return Err(RasterError::DegeneratePolygon(format!(
                    "ring {i} has {} distinct vertices, need at least 3",
                    ring.len()
                )));
            }
            for &(lon, lat) in ring {
                if !(lon.is_finite() && lat.is_finite()) {
                    return Err(RasterError::DegeneratePolygon(format!("ring {i} has a non-finite vertex")));
                }
                if !(-180.0..=180.0).contains(&lon) {
                    return Err(RasterError::UnsupportedExtent(format!("vertex longitude {lon} outside [-180, 180]")));
                }
            }
        }
        Ok(())
    }

    pub fn bbox(&self) -> Option<BoundingBox> {
        let mut it = self.exterior.iter();
        let &(lon, lat) = it.next()?;
        let init = BoundingBox { west: lon, south: lat, east: lon, north: lat };
        Some(it.fold(init, |b, &(lon, lat)| BoundingBox {
            west: b.west.min(lon),
            south: b.south.min(lat),
            east: b.east.max(lon),
            north: b.north.max(lat),
        }))
    }

    /// Even-odd area from the shoelace formula, in square degrees.
    pub fn area(&self) -> f64 {
        fn ring_area(ring: &[(f64, f64)]) -> f64 {
            let n = ring.len();
            (0..n)
                .map(|i| {
                    let (x0, y0) = ring[i];
                    let (x1, y1) = ring[(i + 1) % n];
                    x0 * y1 - x1 * y0
                })
                .sum::<f64>()
                .abs()
                / 2.0
        }
        let mut rings = self.rings();
        let outer = rings.next().map(ring_area).unwrap_or(0.0);
        outer - rings.map(ring_area).sum::<f64>()
    }

    fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.rings().flat_map(|ring| {
            let n = ring.len();
            (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
        })
    }
}

/// Marks every pixel whose center lies inside `poly` under the even-odd rule.
///
/// Each row is scanned once: an edge `(a, b)` crosses the row-center latitude `y`
/// when exactly one endpoint lies strictly above `y`, and a pixel center is inside
/// when an odd number of crossings lie strictly east of it.
pub fn rasterize_polygon(poly: &GeoPolygon, grid: &GridSpec) -> Result<Mask, RasterError> {
    poly.validate()?;
    grid.validate()?;
    let mut mask = Mask::empty(*grid);
    let edges: Vec<_> = poly.edges().collect();
    let (south, north) =
        edges.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &((_, y), _)| (lo.min(y), hi.max(y)));
    let width = grid.width as usize;
    let mut crossings: Vec<f64> = Vec::with_capacity(edges.len());

    for row in 0..grid.height {
        let y = grid.center_lat(row);
        if y < south || y > north {
            continue;
        }
        crossings.clear();
        for &((xi, yi), (xj, yj)) in &edges {
            if (yi > y) != (yj > y) {
                crossings.push((xj - xi) * (y - yi) / (yj - yi) + xi);
            }
        }
        if crossings.is_empty() {
            continue;
        }
        crossings.sort_by(f64::total_cmp);
        let line = &mut mask.bits[row as usize * width..(row as usize + 1) * width];
        // Number of crossings <= x; parity of the remainder decides membership.
        let mut passed = 0usize;
        for (col, cell) in line.iter_mut().enumerate() {
            let x = grid.center_lon(col as u32);
            while passed < crossings.len() && crossings[passed] <= x {
                passed += 1;
            }
            *cell = (crossings.len() - passed) % 2 == 1;
        }
    }
    Ok(mask)
}
