//! Persistent store of timestamped scenes.
//!
//! On-disk layout:
//!
//! ```text
//! catalog_root/
//!   manifest.json
//!   scenes/<id>.grsp
//!   static/land_mask.grsp
//! ```
//!
//! A [`Catalog`] is an immutable snapshot. Ingesting builds a new snapshot;
//! [`CatalogHandle`] swaps it in atomically so readers never block on writers.

mod manifest;
mod scene;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, NaiveDate, Utc};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::container::{self, ContainerError};
use crate::raster::{BoundingBox, GridSpec, Raster};

pub use manifest::{CatalogManifest, SceneEntry, StaticLayers};
pub use scene::{check_roles, Scene, SceneId, Sensor, CLOUD_BAND, LAND_BAND, OPTICAL_BANDS, SAR_BAND};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCENES_DIR: &str = "scenes";
pub const STATIC_DIR: &str = "static";
pub const LAND_MASK_FILE: &str = "static/land_mask.grsp";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("container {path}: {source}")]
    Container { path: PathBuf, source: ContainerError },
    #[error("manifest is malformed: {0}")]
    Manifest(String),
    #[error("scene is missing band role '{0}'")]
    MissingBand(String),
    #[error("scene carries band '{0}' not allowed for its sensor")]
    UnexpectedBand(String),
    #[error("scene id '{0}' already exists with different content")]
    DuplicateId(String),
    #[error("invalid scene id '{0}'")]
    InvalidId(String),
    #[error("manifest path does not resolve: {0}")]
    UnresolvedPath(PathBuf),
    #[error("unknown scene '{0}'")]
    UnknownScene(String),
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::Io { .. } => "IoFailure",
            CatalogError::Container { source, .. } => source.code(),
            CatalogError::Manifest(_) => "MalformedManifest",
            CatalogError::MissingBand(_) => "MissingBand",
            CatalogError::UnexpectedBand(_) => "UnexpectedBand",
            CatalogError::DuplicateId(_) => "DuplicateId",
            CatalogError::InvalidId(_) => "InvalidId",
            CatalogError::UnresolvedPath(_) => "UnresolvedPath",
            CatalogError::UnknownScene(_) => "UnknownScene",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io { path: path.to_owned(), source }
}

/// Inclusive date window `[center − before, center + after]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DateWindow {
    pub center: NaiveDate,
    pub before: u32,
    pub after: u32,
}

impl DateWindow {
    /// Default optical compositing span: two weeks either side.
    pub const OPTICAL_DAYS: u32 = 14;
    /// Default SAR compositing span, covering one Sentinel-1 revisit cycle either side.
    pub const SAR_DAYS: u32 = 12;

    pub fn new(center: NaiveDate, before: u32, after: u32) -> Self {
        Self { center, before, after }
    }

    pub fn symmetric(center: NaiveDate, days: u32) -> Self {
        Self::new(center, days, days)
    }

    pub fn default_for(sensor: Sensor, center: NaiveDate) -> Self {
        match sensor {
            Sensor::Sar => Self::symmetric(center, Self::SAR_DAYS),
            Sensor::Optical => Self::symmetric(center, Self::OPTICAL_DAYS),
        }
    }

    pub fn start(&self) -> NaiveDate {
        self.center - chrono::Days::new(self.before as u64)
    }

    pub fn end(&self) -> NaiveDate {
        self.center + chrono::Days::new(self.after as u64)
    }

    /// A timestamp matches when its UTC calendar date falls inside the window.
    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        let d = ts.date_naive();
        d >= self.start() && d <= self.end()
    }
}

/// What to ingest. Without an explicit id one is derived from sensor, timestamp
/// and content hash, which makes re-ingesting the same file a no-op.
#[derive(Debug, Clone)]
pub struct IngestRequest {
    pub path: PathBuf,
    pub sensor: Sensor,
    pub timestamp: DateTime<Utc>,
    pub id: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    root: PathBuf,
    manifest: CatalogManifest,
    version: String,
}

impl Catalog {
    /// Creates an empty catalog directory (or reopens an existing one).
    pub fn create(root: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let root = root.as_ref();
        fs::create_dir_all(root.join(SCENES_DIR)).map_err(io_err(root))?;
        fs::create_dir_all(root.join(STATIC_DIR)).map_err(io_err(root))?;
        if root.join(MANIFEST_FILE).exists() {
            return Self::open(root);
        }
        let cat = Self::from_manifest(root.to_owned(), CatalogManifest::default())?;
        cat.write_manifest()?;
        Ok(cat)
    }

    /// Loads a catalog. A directory without `manifest.json` is an empty catalog.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let root = root.as_ref();
        let meta = fs::metadata(root).map_err(io_err(root))?;
        if !meta.is_dir() {
            return Err(CatalogError::UnresolvedPath(root.to_owned()));
        }
        let manifest_path = root.join(MANIFEST_FILE);
        let manifest = if manifest_path.exists() {
            let bytes = fs::read(&manifest_path).map_err(io_err(&manifest_path))?;
            serde_json::from_slice(&bytes).map_err(|e| CatalogError::Manifest(e.to_string()))?
        } else {
            CatalogManifest::default()
        };
        Self::from_manifest(root.to_owned(), manifest)
    }

    fn from_manifest(root: PathBuf, mut manifest: CatalogManifest) -> Result<Self, CatalogError> {
        manifest.validate()?;
        for entry in &manifest.scenes {
            let p = root.join(&entry.path);
            if !p.is_file() {
                return Err(CatalogError::UnresolvedPath(p));
            }
        }
        if let Some(land) = &manifest.static_layers.land_mask {
            let p = root.join(land);
            if !p.is_file() {
                return Err(CatalogError::UnresolvedPath(p));
            }
        }
        manifest.sort();
        let version = hex_digest(&manifest.to_json());
        Ok(Self { root, manifest, version })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &CatalogManifest {
        &self.manifest
    }

    /// Content hash of the manifest; changes whenever the catalog does.
    pub fn version(&self) -> &str {
        &self.version
    }

    /// All scenes ascending by timestamp.
    pub fn entries(&self) -> &[SceneEntry] {
        &self.manifest.scenes
    }

    pub fn len(&self) -> usize {
        self.manifest.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.scenes.is_empty()
    }

    pub fn entry(&self, id: &str) -> Option<&SceneEntry> {
        self.manifest.scenes.iter().find(|e| e.id.as_str() == id)
    }

    /// Union of every scene's bounding box.
    pub fn extent(&self) -> Option<BoundingBox> {
        self.manifest.scenes.iter().map(|e| e.bbox).reduce(|a, b| a.union(&b))
    }

    pub fn sensor_extent(&self, sensor: Sensor) -> Option<BoundingBox> {
        self.manifest.scenes.iter().filter(|e| e.sensor == sensor).map(|e| e.bbox).reduce(|a, b| a.union(&b))
    }

    /// Scenes of `sensor` inside `window` whose extent intersects `bbox`, ascending by timestamp.
    pub fn query(&self, sensor: Sensor, window: &DateWindow, bbox: &BoundingBox) -> Vec<&SceneEntry> {
        self.manifest
            .scenes
            .iter()
            .filter(|e| e.sensor == sensor && window.contains(&e.timestamp) && e.bbox.intersects(bbox))
            .collect()
    }

    pub fn load(&self, entry: &SceneEntry) -> Result<Scene, CatalogError> {
        let path = self.root.join(&entry.path);
        let raster = container::read_container(&path)
            .map_err(|source| CatalogError::Container { path: path.clone(), source })?;
        check_roles(entry.sensor, &raster)?;
        Ok(Scene { entry: entry.clone(), raster })
    }

    pub fn load_id(&self, id: &str) -> Result<Scene, CatalogError> {
        let entry = self.entry(id).ok_or_else(|| CatalogError::UnknownScene(id.to_owned()))?;
        self.load(entry)
    }

    pub fn land_mask(&self) -> Result<Option<Raster>, CatalogError> {
        let Some(rel) = &self.manifest.static_layers.land_mask else {
            return Ok(None);
        };
        let path = self.root.join(rel);
        let raster = container::read_container(&path)
            .map_err(|source| CatalogError::Container { path: path.clone(), source })?;
        if !raster.has_band(LAND_BAND) {
            return Err(CatalogError::MissingBand(LAND_BAND.into()));
        }
        Ok(Some(raster))
    }

    /// Land mask resampled (nearest pixel) onto `grid`.
    ///
    /// Pixels outside the stored mask are sea; nodata pixels of the mask count as land.
    pub fn land_mask_on(&self, grid: &GridSpec) -> Result<Option<Vec<bool>>, CatalogError> {
        let Some(mask) = self.land_mask()? else {
            return Ok(None);
        };
        let src = mask.grid();
        let land = mask.band(LAND_BAND).expect("checked in land_mask");
        let mut out = Vec::with_capacity(grid.len());
        for row in 0..grid.height {
            for col in 0..grid.width {
                let (lon, lat) = grid.pixel_center(col, row);
                out.push(match src.pixel_at(lon, lat) {
                    Some((c, r)) => {
                        let i = src.index(c, r);
                        !mask.valid()[i] || land[i] != 0.0
                    }
                    None => false,
                });
            }
        }
        Ok(Some(out))
    }

    /// Registers a scene, copying its container under `scenes/`, and returns the new snapshot.
    pub fn ingest(&self, req: &IngestRequest) -> Result<(Catalog, SceneId), CatalogError> {
        let bytes = fs::read(&req.path).map_err(io_err(&req.path))?;
        let raster =
            container::decode(&bytes).map_err(|source| CatalogError::Container { path: req.path.clone(), source })?;
        check_roles(req.sensor, &raster)?;
        let checksum = hex_digest(&bytes);
        let id = match &req.id {
            Some(id) => SceneId::parse(id)?,
            None => SceneId::derive(req.sensor, &req.timestamp, &checksum),
        };

        if let Some(existing) = self.entry(id.as_str()) {
            if existing.sensor == req.sensor
                && existing.timestamp == req.timestamp
                && existing.checksum.as_deref() == Some(checksum.as_str())
            {
                return Ok((self.clone(), id));
            }
            return Err(CatalogError::DuplicateId(id.to_string()));
        }

        let rel = format!("{SCENES_DIR}/{id}.grsp");
        let dest = self.root.join(&rel);
        let same_file = match (fs::canonicalize(&req.path), fs::canonicalize(&dest)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        if !same_file {
            write_atomic(&dest, &bytes)?;
        }

        let mut manifest = self.manifest.clone();
        manifest.scenes.push(SceneEntry {
            id: id.clone(),
            sensor: req.sensor,
            timestamp: req.timestamp,
            bbox: raster.grid().bbox(),
            path: rel,
            checksum: Some(checksum),
        });
        let next = Self::from_manifest(self.root.clone(), manifest)?;
        next.write_manifest()?;
        Ok((next, id))
    }

    /// Stores the static land mask (band `land`, 1 = land) and returns the new snapshot.
    pub fn with_land_mask(&self, mask: &Raster) -> Result<Catalog, CatalogError> {
        if !mask.has_band(LAND_BAND) {
            return Err(CatalogError::MissingBand(LAND_BAND.into()));
        }
        let dest = self.root.join(LAND_MASK_FILE);
        fs::create_dir_all(self.root.join(STATIC_DIR)).map_err(io_err(&self.root))?;
        write_atomic(&dest, &container::to_bytes(mask))?;
        let mut manifest = self.manifest.clone();
        manifest.static_layers.land_mask = Some(LAND_MASK_FILE.into());
        let next = Self::from_manifest(self.root.clone(), manifest)?;
        next.write_manifest()?;
        Ok(next)
    }

    fn write_manifest(&self) -> Result<(), CatalogError> {
        write_atomic(&self.root.join(MANIFEST_FILE), &self.manifest.to_json())
    }
}

/// Shared, swappable catalog snapshot.
#[derive(Debug)]
pub struct CatalogHandle {
    current: RwLock<Arc<Catalog>>,
}

impl CatalogHandle {
    pub fn new(catalog: Catalog) -> Self {
        Self { current: RwLock::new(Arc::new(catalog)) }
    }

    pub fn snapshot(&self) -> Arc<Catalog> {
        self.current.read().expect("catalog lock poisoned").clone()
    }

    /// Ingests against the latest snapshot and publishes the result.
    pub fn ingest(&self, req: &IngestRequest) -> Result<SceneId, CatalogError> {
        let mut guard = self.current.write().expect("catalog lock poisoned");
        let (next, id) = guard.ingest(req)?;
        *guard = Arc::new(next);
        Ok(id)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CatalogError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}
