use super::{GridSpec, RasterError};

/// One named `f32` plane, row-major over the owning raster's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub name: String,
    pub values: Vec<f32>,
}

/// Georeferenced multi-band raster with a shared validity plane.
///
/// Nodata is carried only in `valid`; band values under invalid pixels are
/// unspecified and never read by statistics.
#[derive(Debug, Clone)]
pub struct Raster {
    grid: GridSpec,
    bands: Vec<Band>,
    valid: Vec<bool>,
}

/// Borrowed view of a single band together with its grid and validity plane.
#[derive(Debug, Clone, Copy)]
pub struct BandView<'a> {
    pub grid: &'a GridSpec,
    pub values: &'a [f32],
    pub valid: &'a [bool],
}

impl Raster {
    pub fn new(grid: GridSpec, bands: Vec<Band>, valid: Vec<bool>) -> Result<Self, RasterError> {
        grid.validate()?;
        let n = grid.len();
        if valid.len() != n {
            return Err(RasterError::ShapeMismatch { what: "validity plane".into(), expected: n, actual: valid.len() });
        }
        for (i, band) in bands.iter().enumerate() {
            if band.values.len() != n {
                return Err(RasterError::ShapeMismatch {
                    what: format!("band '{}'", band.name),
                    expected: n,
                    actual: band.values.len(),
                });
            }
            if bands[..i].iter().any(|b| b.name == band.name) {
                return Err(RasterError::DuplicateBand(band.name.clone()));
            }
        }
        Ok(Self { grid, bands, valid })
    }

    /// Raster whose every pixel is valid.
    pub fn from_bands<I, S>(grid: GridSpec, bands: I) -> Result<Self, RasterError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let bands = bands.into_iter().map(|(name, values)| Band { name: name.into(), values }).collect();
        Self::new(grid, bands, vec![true; grid.len()])
    }

    pub fn filled(grid: GridSpec, names: &[&str], value: f32) -> Result<Self, RasterError> {
        Self::from_bands(grid, names.iter().map(|n| (*n, vec![value; grid.len()])))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_mut(&mut self) -> &mut [bool] {
        &mut self.valid
    }

    pub fn band_names(&self) -> impl Iterator<Item = &str> {
        self.bands.iter().map(|b| b.name.as_str())
    }

    pub fn has_band(&self, name: &str) -> bool {
        self.bands.iter().any(|b| b.name == name)
    }

    pub fn band(&self, name: &str) -> Result<&[f32], RasterError> {
        self.bands
            .iter()
            .find(|b| b.name == name)
            .map(|b| b.values.as_slice())
            .ok_or_else(|| RasterError::MissingBand(name.to_owned()))
    }

    pub fn band_mut(&mut self, name: &str) -> Result<&mut [f32], RasterError> {
        self.bands
            .iter_mut()
            .find(|b| b.name == name)
            .map(|b| b.values.as_mut_slice())
            .ok_or_else(|| RasterError::MissingBand(name.to_owned()))
    }

    pub fn view(&self, name: &str) -> Result<BandView<'_>, RasterError> {
        Ok(BandView { grid: &self.grid, values: self.band(name)?, valid: &self.valid })
    }

    pub fn push_band(&mut self, name: impl Into<String>, values: Vec<f32>) -> Result<(), RasterError> {
        let name = name.into();
        if values.len() != self.grid.len() {
            return Err(RasterError::ShapeMismatch {
                what: format!("band '{name}'"),
                expected: self.grid.len(),
                actual: values.len(),
            });
        }
        if self.has_band(&name) {
            return Err(RasterError::DuplicateBand(name));
        }
        self.bands.push(Band { name, values });
        Ok(())
    }

    /// Drops a band, returning its values.
    pub fn remove_band(&mut self, name: &str) -> Option<Vec<f32>> {
        let pos = self.bands.iter().position(|b| b.name == name)?;
        Some(self.bands.remove(pos).values)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Bitwise equality: grid, band names and order, raw band bits, and mask.
    pub fn bit_eq(&self, other: &Raster) -> bool {
        self.grid == other.grid
            && self.valid == other.valid
            && self.bands.len() == other.bands.len()
            && self.bands.iter().zip(&other.bands).all(|(a, b)| {
                a.name == b.name
                    && a.values.len() == b.values.len()
                    && a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }

    pub fn into_parts(self) -> (GridSpec, Vec<Band>, Vec<bool>) {
        (self.grid, self.bands, self.valid)
    }
}

/// Boolean plane over a grid, e.g. a change or detection mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub grid: GridSpec,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn new(grid: GridSpec, bits: Vec<bool>) -> Result<Self, RasterError> {
        if bits.len() != grid.len() {
            return Err(RasterError::ShapeMismatch { what: "mask".into(), expected: grid.len(), actual: bits.len() });
        }
        Ok(Self { grid, bits })
    }

    pub fn empty(grid: GridSpec) -> Self {
        Self { grid, bits: vec![false; grid.len()] }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// 0/1 float band, the on-disk representation of masks.
    pub fn to_f32(&self) -> Vec<f32> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}
