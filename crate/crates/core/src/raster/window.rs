use super::{mercator_row_to_lat, tile_bounds, Band, BoundingBox, GridSpec, Raster, RasterError, TileKey};

/// Column/row span of the pixels whose centers fall inside `bbox` (closed).
fn center_span(grid: &GridSpec, bbox: &BoundingBox) -> Option<(u32, u32, u32, u32)> {
    let ps = grid.pixel_size;
    let col_lo = ((bbox.west - grid.origin_lon) / ps - 0.5).ceil().max(0.0);
    let col_hi = ((bbox.east - grid.origin_lon) / ps - 0.5).floor().min(grid.width as f64 - 1.0);
    let row_lo = ((grid.origin_lat - bbox.north) / ps - 0.5).ceil().max(0.0);
    let row_hi = ((grid.origin_lat - bbox.south) / ps - 0.5).floor().min(grid.height as f64 - 1.0);
    if !(col_lo <= col_hi && row_lo <= row_hi) {
        return None;
    }
    Some((col_lo as u32, row_lo as u32, col_hi as u32, row_hi as u32))
}

/// Sub-grid of the pixels whose centers lie inside `bbox`, with its column/row offset.
pub fn window_grid(grid: &GridSpec, bbox: &BoundingBox) -> Result<(GridSpec, u32, u32), RasterError> {
    bbox.validate()?;
    let (c0, r0, c1, r1) = center_span(grid, bbox).ok_or(RasterError::EmptyIntersection)?;
    Ok((grid.subgrid(c0, r0, c1 - c0 + 1, r1 - r0 + 1), c0, r0))
}

/// Copies out the pixels whose centers fall inside `bbox`. No resampling.
pub fn read_window(raster: &Raster, bbox: &BoundingBox) -> Result<Raster, RasterError> {
    let src = raster.grid();
    let (sub, c0, r0) = window_grid(src, bbox)?;
    if sub == *src {
        return Ok(raster.clone());
    }
    let (w, h) = (sub.width as usize, sub.height as usize);
    let copy_rows = |plane: &[f32]| {
        let mut out = Vec::with_capacity(w * h);
        for r in 0..h {
            let start = src.index(c0, r0 + r as u32);
            out.extend_from_slice(&plane[start..start + w]);
        }
        out
    };
    let bands = raster.bands().iter().map(|b| Band { name: b.name.clone(), values: copy_rows(&b.values) }).collect();
    let mut valid = Vec::with_capacity(w * h);
    for r in 0..h {
        let start = src.index(c0, r0 + r as u32);
        valid.extend_from_slice(&raster.valid()[start..start + w]);
    }
    Raster::new(sub, bands, valid)
}

/// Nearest-neighbour resampling into the `size`×`size` Mercator grid of `key`.
///
/// The output grid records the tile's lon/lat extent for reference only: rows are
/// uniform in Mercator y, not in latitude. Output pixels whose centers fall
/// outside the source grid, or on masked source pixels, are masked.
pub fn resample_to_tile(raster: &Raster, key: TileKey, size: u32) -> Result<Raster, RasterError> {
    if size == 0 {
        return Err(RasterError::OutOfRange("tile size must be positive".into()));
    }
    let tb = tile_bounds(key);
    let src = raster.grid();
    if !tb.intersects(&src.bbox()) {
        return Err(RasterError::EmptyIntersection);
    }
    let n = (1u64 << key.z) as f64;
    let lookup = tile_lookup(src, key, size, n, &tb);

    let bands = raster
        .bands()
        .iter()
        .map(|b| Band {
            name: b.name.clone(),
            values: lookup.iter().map(|idx| idx.map_or(0.0, |i| b.values[i])).collect(),
        })
        .collect();
    let valid = lookup.iter().map(|idx| idx.is_some_and(|i| raster.valid()[i])).collect();
    let grid = GridSpec {
        origin_lon: tb.west,
        origin_lat: tb.north,
        pixel_size: tb.width() / size as f64,
        width: size,
        height: size,
    };
    Raster::new(grid, bands, valid)
}

/// Source pixel index feeding each tile pixel, row-major.
fn tile_lookup(src: &GridSpec, key: TileKey, size: u32, n: f64, tb: &BoundingBox) -> Vec<Option<usize>> {
    let cols: Vec<Option<u32>> = (0..size)
        .map(|i| {
            let lon = tb.west + (i as f64 + 0.5) / size as f64 * tb.width();
            src_col(src, lon)
        })
        .collect();
    let mut out = Vec::with_capacity(size as usize * size as usize);
    for j in 0..size {
        let t = (key.y as f64 + (j as f64 + 0.5) / size as f64) / n;
        let row = src_row(src, mercator_row_to_lat(t));
        out.extend(cols.iter().map(|col| match (row, col) {
            (Some(r), Some(c)) => Some(src.index(*c, r)),
            _ => None,
        }));
    }
    out
}

fn src_col(src: &GridSpec, lon: f64) -> Option<u32> {
    let f = (lon - src.origin_lon) / src.pixel_size;
    (f >= 0.0 && f < src.width as f64).then(|| f.floor() as u32)
}

fn src_row(src: &GridSpec, lat: f64) -> Option<u32> {
    let f = (src.origin_lat - lat) / src.pixel_size;
    (f >= 0.0 && f < src.height as f64).then(|| f.floor() as u32)
}
