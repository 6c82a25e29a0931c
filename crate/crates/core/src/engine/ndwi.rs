use super::EngineError;
use crate::raster::{BandView, Raster};

pub const NDWI_BAND: &str = "ndwi";

/// Normalized difference water index `(green − nir) / (green + nir)`.
///
/// Pixels are masked where either input is masked or `green + nir = 0`.
/// Computed in `f64`, so non-negative inputs always land in `[-1, 1]`.
pub fn ndwi(green: BandView<'_>, nir: BandView<'_>) -> Result<Raster, EngineError> {
    if green.grid != nir.grid {
        return Err(EngineError::GridMismatch("green and nir bands differ in grid".into()));
    }
    let n = green.values.len();
    let mut values = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for i in 0..n {
        let (g, r) = (green.values[i] as f64, nir.values[i] as f64);
        let sum = g + r;
        let ok = green.valid[i] && nir.valid[i] && sum != 0.0;
        values.push(if ok { ((g - r) / sum) as f32 } else { 0.0 });
        valid.push(ok);
    }
    let bands = vec![crate::raster::Band { name: NDWI_BAND.into(), values }];
    Ok(Raster::new(*green.grid, bands, valid)?)
}
