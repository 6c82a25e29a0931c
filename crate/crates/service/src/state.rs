use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use grasp_core::catalog::CatalogHandle;
use grasp_core::Catalog;
use lru::LruCache;

use crate::error::ApiError;
use crate::layer::{Layer, LayerSpec};
use crate::render::RenderStyle;

pub const DEFAULT_CACHE_LAYERS: usize = 64;

/// Shared server state: the catalog (or why it failed to load), the layer cache
/// and the specs of every layer handed out so far.
pub struct AppState {
    root: PathBuf,
    catalog: Result<CatalogHandle, String>,
    layers: Mutex<LruCache<String, Arc<Layer>>>,
    specs: Mutex<HashMap<String, LayerSpec>>,
    pub style: RenderStyle,
}

impl AppState {
    /// Opens the catalog at `root`. A load failure is kept and reported as 503.
    pub fn open(root: impl AsRef<Path>, cache_layers: NonZeroUsize) -> Self {
        let root = root.as_ref().to_owned();
        let catalog = Catalog::open(&root).map(CatalogHandle::new).map_err(|e| e.to_string());
        if let Err(e) = &catalog {
            tracing::warn!(root = %root.display(), error = %e, "catalog failed to load");
        }
        Self {
            root,
            catalog,
            layers: Mutex::new(LruCache::new(cache_layers)),
            specs: Mutex::new(HashMap::new()),
            style: RenderStyle::default(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn catalog(&self) -> Result<Arc<Catalog>, ApiError> {
        match &self.catalog {
            Ok(h) => Ok(h.snapshot()),
            Err(e) => Err(ApiError::unavailable(e.clone())),
        }
    }

    pub fn handle(&self) -> Result<&CatalogHandle, ApiError> {
        self.catalog.as_ref().map_err(|e| ApiError::unavailable(e.clone()))
    }

    pub fn cached_layers(&self) -> usize {
        self.layers.lock().expect("layer cache lock").len()
    }

    /// Returns the layer for `spec`, computing and caching it if needed.
    pub fn create_layer(&self, spec: LayerSpec) -> Result<Arc<Layer>, ApiError> {
        let catalog = self.catalog()?;
        let id = spec.layer_id(catalog.version());
        if let Some(layer) = self.layers.lock().expect("layer cache lock").get(&id) {
            return Ok(layer.clone());
        }
        let layer = Arc::new(Layer::compute(&catalog, id.clone(), spec.clone())?);
        self.specs.lock().expect("spec lock").insert(id.clone(), spec);
        let mut cache = self.layers.lock().expect("layer cache lock");
        Ok(cache.get_or_insert(id, || layer).clone())
    }

    /// Cached layer by id. Evicted layers are recomputed from their spec; ids
    /// never handed out are `None`.
    pub fn layer(&self, id: &str) -> Result<Option<Arc<Layer>>, ApiError> {
        if let Some(layer) = self.layers.lock().expect("layer cache lock").get(id) {
            return Ok(Some(layer.clone()));
        }
        let spec = self.specs.lock().expect("spec lock").get(id).cloned();
        match spec {
            Some(spec) => self.create_layer(spec).map(Some),
            None => Ok(None),
        }
    }
}
