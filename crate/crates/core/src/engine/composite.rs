//! Per-pixel temporal median composites.

use rayon::prelude::*;

use super::EngineError;
use crate::catalog::{Catalog, DateWindow, Sensor, CLOUD_BAND, OPTICAL_BANDS, SAR_BAND};
use crate::raster::{window_grid, Band, BoundingBox, GridSpec, Raster};

/// Median of `values`, reordering them. Even counts take the midpoint of the two
/// middle values. Returns `None` for an empty slice.
pub fn median_in_place(values: &mut [f32]) -> Option<f32> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    values.sort_unstable_by(f32::total_cmp);
    if n % 2 == 1 {
        Some(values[n / 2])
    } else {
        let (a, b) = (values[n / 2 - 1] as f64, values[n / 2] as f64);
        Some(((a + b) / 2.0) as f32)
    }
}

fn output_bands(sensor: Sensor) -> &'static [&'static str] {
    match sensor {
        Sensor::Sar => &[SAR_BAND],
        Sensor::Optical => &OPTICAL_BANDS,
    }
}

/// Index of the source pixel under each target pixel center, or `None` off-grid.
fn pixel_lookup(src: &GridSpec, dst: &GridSpec) -> Vec<Option<usize>> {
    if src == dst {
        return (0..dst.len()).map(Some).collect();
    }
    let mut out = Vec::with_capacity(dst.len());
    for row in 0..dst.height {
        for col in 0..dst.width {
            let (lon, lat) = dst.pixel_center(col, row);
            out.push(src.pixel_at(lon, lat).map(|(c, r)| src.index(c, r)));
        }
    }
    out
}

/// Median composite of `scenes` on `grid`.
///
/// An observation is a scene pixel (nearest to the target pixel center) that is
/// valid and, for optical scenes, not flagged in the `cloud` band. Target pixels
/// with no observations are nodata. Input order does not matter.
pub fn composite_scenes(scenes: &[&Raster], sensor: Sensor, grid: &GridSpec) -> Result<Raster, EngineError> {
    let names = output_bands(sensor);
    struct Source<'a> {
        lookup: Vec<Option<usize>>,
        valid: &'a [bool],
        cloud: Option<&'a [f32]>,
        bands: Vec<&'a [f32]>,
    }
    let sources = scenes
        .iter()
        .map(|r| {
            let bands = names.iter().map(|n| r.band(n)).collect::<Result<Vec<_>, _>>()?;
            let cloud = match sensor {
                Sensor::Optical => Some(r.band(CLOUD_BAND)?),
                Sensor::Sar => None,
            };
            Ok(Source { lookup: pixel_lookup(r.grid(), grid), valid: r.valid(), cloud, bands })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;

    let w = grid.width as usize;
    let nb = names.len();
    // Row-parallel; each row is computed independently so output is order-free.
    let rows: Vec<(Vec<Vec<f32>>, Vec<bool>)> = (0..grid.height as usize)
        .into_par_iter()
        .map(|row| {
            let mut vals = vec![vec![0f32; w]; nb];
            let mut valid = vec![false; w];
            let mut obs: Vec<usize> = Vec::with_capacity(sources.len());
            let mut stack: Vec<f32> = Vec::with_capacity(sources.len());
            for col in 0..w {
                let t = row * w + col;
                obs.clear();
                for (s, src) in sources.iter().enumerate() {
                    if let Some(i) = src.lookup[t] {
                        let clear = src.cloud.is_none_or(|c| c[i] == 0.0);
                        if src.valid[i] && clear {
                            obs.push(s);
                        }
                    }
                }
                if obs.is_empty() {
                    continue;
                }
                valid[col] = true;
                for (b, out) in vals.iter_mut().enumerate() {
                    stack.clear();
                    stack.extend(obs.iter().map(|&s| {
                        let src = &sources[s];
                        src.bands[b][src.lookup[t].expect("observed")]
                    }));
                    out[col] = median_in_place(&mut stack).expect("non-empty");
                }
            }
            (vals, valid)
        })
        .collect();

    let mut bands: Vec<Band> =
        names.iter().map(|n| Band { name: (*n).to_owned(), values: Vec::with_capacity(grid.len()) }).collect();
    let mut valid = Vec::with_capacity(grid.len());
    for (vals, v) in rows {
        for (band, row_vals) in bands.iter_mut().zip(vals) {
            band.values.extend(row_vals);
        }
        valid.extend(v);
    }
    Ok(Raster::new(*grid, bands, valid)?)
}

/// Composite of every `sensor` scene in `window` intersecting `bbox`, on `grid`.
pub fn composite_on_grid(
    catalog: &Catalog,
    sensor: Sensor,
    window: &DateWindow,
    bbox: &BoundingBox,
    grid: &GridSpec,
) -> Result<Raster, EngineError> {
    let entries = catalog.query(sensor, window, bbox);
    if entries.is_empty() {
        return Err(EngineError::NoScenesInWindow { sensor, window: *window });
    }
    let scenes = entries.into_iter().map(|e| catalog.load(e).map(|s| s.raster)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Raster> = scenes.iter().collect();
    composite_scenes(&refs, sensor, grid)
}

/// Grid for an analysis over `bbox`: the earliest matching scene's pixels whose
/// centers fall inside `bbox`.
pub(crate) fn analysis_grid(
    catalog: &Catalog,
    sensor: Sensor,
    window: &DateWindow,
    bbox: &BoundingBox,
) -> Result<GridSpec, EngineError> {
    let entries = catalog.query(sensor, window, bbox);
    let first = entries.first().ok_or(EngineError::NoScenesInWindow { sensor, window: *window })?;
    let scene = catalog.load(first)?;
    Ok(window_grid(scene.raster.grid(), bbox)?.0)
}

/// Cloud-masked temporal median over `window`, clipped to `bbox`.
///
/// The output grid is taken from the earliest scene in the window; optical
/// composites carry `red`, `green`, `blue`, `nir`, SAR composites carry `vv`.
pub fn temporal_composite(
    catalog: &Catalog,
    sensor: Sensor,
    window: &DateWindow,
    bbox: &BoundingBox,
) -> Result<Raster, EngineError> {
    let grid = analysis_grid(catalog, sensor, window, bbox)?;
    composite_on_grid(catalog, sensor, window, bbox, &grid)
}
