//! HTTP tile and analysis service over a scene catalog.
//!
//! | Route | |
//! |---|---|
//! | `GET /catalog` | scene list, per-sensor date extents and bounding boxes |
//! | `GET /config` | tile size, render style and defaults for the viewer |
//! | `POST /layers` | compute a layer from a spec, returns its id |
//! | `GET /layers/{id}` | layer metadata (thresholds, scene) |
//! | `GET /tiles/{id}/{z}/{x}/{y}.png` | 256×256 RGBA tile |
//! | `POST /analysis/timeseries` | zonal mean per scene under a polygon |
//! | `POST /analysis/pumice` | pumice layer plus its threshold |

mod error;
mod layer;
mod render;
mod routes;
mod state;

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::Arc;

pub use error::ApiError;
pub use layer::{Layer, LayerInfo, LayerSpec, Paint, CALIBRATION_DIR, PUMICE_BAND};
pub use render::{encode_png, render_rgba, render_tile, RenderStyle};
pub use routes::{router, tile_etag};
pub use state::{AppState, DEFAULT_CACHE_LAYERS};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub catalog: PathBuf,
    pub bind: IpAddr,
    pub port: u16,
    pub cache_layers: NonZeroUsize,
}

impl ServiceConfig {
    pub fn new(catalog: impl Into<PathBuf>) -> Self {
        Self {
            catalog: catalog.into(),
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            cache_layers: NonZeroUsize::new(DEFAULT_CACHE_LAYERS).expect("non-zero"),
        }
    }
}

/// Serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::open(&config.catalog, config.cache_layers));
    let addr = SocketAddr::new(config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, catalog = %config.catalog.display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
