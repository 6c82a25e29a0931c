use grasp_core::raster::{resample_to_tile, TILE_SIZE};
use grasp_core::{RasterError, TileKey};
use serde::Serialize;

use crate::error::ApiError;
use crate::layer::{Layer, Paint, PUMICE_BAND};

/// Overlay colours (RGBA) and the default optical stretch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenderStyle {
    pub blue: [u8; 4],
    pub red: [u8; 4],
    pub pumice: [u8; 4],
    pub rgb_stretch: (f64, f64),
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self { blue: [0, 0, 255, 180], red: [255, 0, 0, 180], pumice: [255, 0, 0, 200], rgb_stretch: (0.0, 0.3) }
    }
}

const TRANSPARENT: [u8; 4] = [0; 4];

fn stretch(v: f32, lo: f64, hi: f64) -> u8 {
    let t = ((v as f64 - lo) / (hi - lo)).clamp(0.0, 1.0);
    (t * 255.0).round() as u8
}

/// RGBA pixels (row-major, 4 bytes each) of `layer` over tile `key`.
pub fn render_rgba(layer: &Layer, key: TileKey, style: &RenderStyle) -> Result<Vec<u8>, ApiError> {
    let n = (TILE_SIZE * TILE_SIZE) as usize;
    let tile = match resample_to_tile(&layer.raster, key, TILE_SIZE) {
        Ok(t) => t,
        Err(RasterError::EmptyIntersection) => return Ok(vec![0; n * 4]),
        Err(e) => return Err(ApiError::internal(e.to_string())),
    };
    let band = |name: &str| tile.band(name).map_err(|e| ApiError::internal(e.to_string()));
    let valid = tile.valid();
    let mut out = Vec::with_capacity(n * 4);
    match layer.paint {
        Paint::Change => {
            let (b, r) = (band("blue")?, band("red")?);
            for i in 0..n {
                let px = if !valid[i] {
                    TRANSPARENT
                } else if b[i] != 0.0 {
                    style.blue
                } else if r[i] != 0.0 {
                    style.red
                } else {
                    TRANSPARENT
                };
                out.extend_from_slice(&px);
            }
        }
        Paint::Pumice => {
            let p = band(PUMICE_BAND)?;
            for i in 0..n {
                out.extend_from_slice(if valid[i] && p[i] != 0.0 { &style.pumice } else { &TRANSPARENT });
            }
        }
        Paint::Rgb(lo, hi) => {
            let (r, g, b) = (band("red")?, band("green")?, band("blue")?);
            for i in 0..n {
                if valid[i] {
                    out.extend_from_slice(&[stretch(r[i], lo, hi), stretch(g[i], lo, hi), stretch(b[i], lo, hi), 255]);
                } else {
                    out.extend_from_slice(&TRANSPARENT);
                }
            }
        }
        Paint::Gray(lo, hi) => {
            let v = band("vv")?;
            for i in 0..n {
                if valid[i] {
                    let g = stretch(v[i], lo, hi);
                    out.extend_from_slice(&[g, g, g, 255]);
                } else {
                    out.extend_from_slice(&TRANSPARENT);
                }
            }
        }
    }
    Ok(out)
}

pub fn encode_png(rgba: &[u8], size: u32) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, size, size);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("in-memory png header");
        w.write_image_data(rgba).expect("in-memory png data");
    }
    buf
}

pub fn render_tile(layer: &Layer, key: TileKey, style: &RenderStyle) -> Result<Vec<u8>, ApiError> {
    Ok(encode_png(&render_rgba(layer, key, style)?, TILE_SIZE))
}
