use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{CatalogError, SceneId, Sensor};
use crate::raster::BoundingBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub id: SceneId,
    pub sensor: Sensor,
    pub timestamp: DateTime<Utc>,
    pub bbox: BoundingBox,
    /// Relative to the catalog root.
    pub path: String,
    /// SHA-256 of the container bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticLayers {
    #[serde(default)]
    pub land_mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogManifest {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub scenes: Vec<SceneEntry>,
    #[serde(default, rename = "static")]
    pub static_layers: StaticLayers,
}

fn default_version() -> u32 {
    1
}

impl Default for CatalogManifest {
    fn default() -> Self {
        Self { version: 1, scenes: Vec::new(), static_layers: StaticLayers::default() }
    }
}

impl CatalogManifest {
    pub(crate) fn validate(&self) -> Result<(), CatalogError> {
        if self.version != 1 {
            return Err(CatalogError::Manifest(format!("unsupported manifest version {}", self.version)));
        }
        let mut seen = HashSet::new();
        for e in &self.scenes {
            if !seen.insert(e.id.as_str()) {
                return Err(CatalogError::DuplicateId(e.id.to_string()));
            }
            SceneId::parse(e.id.as_str())?;
            e.bbox.validate().map_err(|err| CatalogError::Manifest(format!("scene {}: {err}", e.id)))?;
            if e.path.split(['/', '\\']).any(|c| c == "..") || e.path.starts_with('/') {
                return Err(CatalogError::Manifest(format!("scene {}: path escapes the catalog", e.id)));
            }
        }
        Ok(())
    }

    pub(crate) fn sort(&mut self) {
        self.scenes.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}
