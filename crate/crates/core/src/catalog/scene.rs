use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{CatalogError, SceneEntry};
use crate::raster::Raster;

pub const SAR_BAND: &str = "vv";
pub const CLOUD_BAND: &str = "cloud";
pub const LAND_BAND: &str = "land";
pub const OPTICAL_BANDS: [&str; 4] = ["red", "green", "blue", "nir"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sensor {
    #[serde(rename = "SAR", alias = "sar")]
    Sar,
    #[serde(rename = "OPTICAL", alias = "optical")]
    Optical,
}

impl Sensor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sensor::Sar => "SAR",
            Sensor::Optical => "OPTICAL",
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sensor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SAR" => Ok(Sensor::Sar),
            "OPTICAL" => Ok(Sensor::Optical),
            _ => Err(format!("unknown sensor '{s}', expected SAR or OPTICAL")),
        }
    }
}

/// Scene identifier: ASCII letters, digits, `-`, `_` and `.`, not starting with `.`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SceneId(String);

impl SceneId {
    pub fn parse(s: &str) -> Result<Self, CatalogError> {
        let ok = !s.is_empty()
            && s.len() <= 128
            && !s.starts_with('.')
            && s.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.'));
        if ok {
            Ok(Self(s.to_owned()))
        } else {
            Err(CatalogError::InvalidId(s.to_owned()))
        }
    }

    pub(crate) fn derive(sensor: Sensor, ts: &DateTime<Utc>, checksum: &str) -> Self {
        Self(format!("{}-{}-{}", sensor.as_str().to_ascii_lowercase(), ts.format("%Y%m%dT%H%M%SZ"), &checksum[..12]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SceneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A loaded acquisition.
#[derive(Debug, Clone)]
pub struct Scene {
    pub entry: SceneEntry,
    pub raster: Raster,
}

/// SAR scenes carry `vv` and no cloud band; optical scenes carry the four
/// reflectance bands plus `cloud`.
pub fn check_roles(sensor: Sensor, raster: &Raster) -> Result<(), CatalogError> {
    let required: &[&str] = match sensor {
        Sensor::Sar => &[SAR_BAND],
        Sensor::Optical => &["red", "green", "blue", "nir", CLOUD_BAND],
    };
    if let Some(missing) = required.iter().find(|b| !raster.has_band(b)) {
        return Err(CatalogError::MissingBand((*missing).to_owned()));
    }
    if sensor == Sensor::Sar && raster.has_band(CLOUD_BAND) {
        return Err(CatalogError::UnexpectedBand(CLOUD_BAND.into()));
    }
    Ok(())
}
