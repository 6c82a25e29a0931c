use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use grasp_core::catalog::{DateWindow, SAR_BAND};
use grasp_core::engine::{zonal_timeseries, DateRange};
use grasp_core::raster::{MAX_ZOOM, TILE_SIZE};
use grasp_core::{BoundingBox, GeoPolygon, Sensor, TileKey};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::cors::CorsLayer;

use crate::error::ApiError;
use crate::layer::{parse_bbox, parse_date, Layer, LayerSpec};
use crate::render::render_tile;
use crate::state::AppState;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/catalog", get(catalog_summary))
        .route("/config", get(config))
        .route("/layers", post(create_layer))
        .route("/layers/{layer_id}", get(layer_info))
        .route("/tiles/{layer_id}/{z}/{x}/{y}", get(tile))
        .route("/analysis/timeseries", post(timeseries))
        .route("/analysis/pumice", post(pumice))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

fn parse_json(body: &Bytes) -> Result<Value, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("InvalidJson", e.to_string()))
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

#[derive(Serialize)]
struct SensorSummary {
    scenes: usize,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    bbox: BoundingBox,
}

async fn catalog_summary(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let cat = state.catalog()?;
    let mut sensors = serde_json::Map::new();
    for sensor in [Sensor::Sar, Sensor::Optical] {
        let entries: Vec<_> = cat.entries().iter().filter(|e| e.sensor == sensor).collect();
        if let (Some(first), Some(last), Some(bbox)) = (entries.first(), entries.last(), cat.sensor_extent(sensor)) {
            let s = SensorSummary { scenes: entries.len(), start: first.timestamp, end: last.timestamp, bbox };
            sensors.insert(sensor.as_str().into(), json!(s));
        }
    }
    let extent = match (cat.entries().first(), cat.entries().last()) {
        (Some(a), Some(b)) => json!({ "start": a.timestamp, "end": b.timestamp }),
        _ => Value::Null,
    };
    let scenes: Vec<Value> = cat
        .entries()
        .iter()
        .map(|e| json!({ "id": e.id, "sensor": e.sensor, "timestamp": e.timestamp, "bbox": e.bbox }))
        .collect();
    Ok(Json(json!({
        "version": cat.version(),
        "scenes": scenes,
        "sensors": sensors,
        "extent": extent,
        "bbox": cat.extent(),
        "land_mask": cat.manifest().static_layers.land_mask.is_some(),
    })))
}

async fn config(State(state): State<Arc<AppState>>) -> Json<Value> {
    let catalog = state.catalog().ok().map(|c| {
        json!({
            "bbox": c.extent(),
            "start": c.entries().first().map(|e| e.timestamp),
            "end": c.entries().last().map(|e| e.timestamp),
        })
    });
    Json(json!({
        "api_version": 1,
        "tile_size": TILE_SIZE,
        "max_zoom": MAX_ZOOM,
        "tile_url": "/tiles/{layer_id}/{z}/{x}/{y}.png",
        "layer_kinds": ["rgb_composite", "sar_change", "pumice", "sar_intensity"],
        "style": state.style,
        "defaults": {
            "sar_window_days": DateWindow::SAR_DAYS,
            "optical_window_days": DateWindow::OPTICAL_DAYS,
            "pumice_search_days": DateWindow::OPTICAL_DAYS,
            "sar_range_db": crate::layer::DEFAULT_RANGE_DB,
            "rgb_stretch": crate::layer::DEFAULT_STRETCH,
        },
        "catalog": catalog,
        "catalog_error": state.catalog().err().map(|e| e.message),
    }))
}

fn layer_body(layer: &Layer) -> Value {
    let mut body = json!({
        "layer_id": layer.id,
        "kind": layer.spec,
        "bbox": layer.raster.grid().bbox(),
    });
    if let Value::Object(info) = json!(layer.info) {
        body.as_object_mut().expect("object").extend(info);
    }
    body
}

async fn create_layer(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let value = parse_json(&body)?;
    let spec = LayerSpec::parse(&value, state.root())?;
    let layer = blocking(move || state.create_layer(spec)).await?;
    Ok(Json(layer_body(&layer)))
}

async fn layer_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let layer = blocking(move || state.layer(&id)?.ok_or_else(|| unknown_layer(&id))).await?;
    Ok(Json(layer_body(&layer)))
}

fn unknown_layer(id: &str) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "UnknownLayer", format!("no layer '{id}'"))
}

fn tile_key(z: &str, x: &str, y: &str) -> Result<TileKey, ApiError> {
    let y = y.strip_suffix(".png").unwrap_or(y);
    let bad = || ApiError::bad_request("InvalidTile", format!("invalid tile {z}/{x}/{y}"));
    let z: u8 = z.parse().map_err(|_| bad())?;
    let x: u32 = x.parse().map_err(|_| bad())?;
    let y: u32 = y.parse().map_err(|_| bad())?;
    TileKey::new(z, x, y).map_err(|e| ApiError::bad_request("InvalidTile", e.to_string()))
}

pub fn tile_etag(layer_id: &str, key: TileKey, catalog_version: &str) -> String {
    let digest = Sha256::digest(format!("{layer_id}/{key}/{catalog_version}"));
    let hex: String = digest[..12].iter().map(|b| format!("{b:02x}")).collect();
    format!("\"{hex}\"")
}

async fn tile(
    State(state): State<Arc<AppState>>,
    Path((id, z, x, y)): Path<(String, String, String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    if !y.ends_with(".png") {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "NotFound", "tiles are served as .png"));
    }
    let key = tile_key(&z, &x, &y)?;
    let version = state.catalog()?.version().to_owned();
    let etag = tile_etag(&id, key, &version);
    let not_modified = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"));
    let png = blocking(move || {
        let layer = state.layer(&id)?.ok_or_else(|| unknown_layer(&id))?;
        if not_modified {
            return Ok(None);
        }
        render_tile(&layer, key, &state.style).map(Some)
    })
    .await?;
    let etag = HeaderValue::from_str(&etag).expect("hex etag");
    let cache = HeaderValue::from_static("public, max-age=3600");
    Ok(match png {
        None => (StatusCode::NOT_MODIFIED, [(header::ETAG, etag), (header::CACHE_CONTROL, cache)]).into_response(),
        Some(bytes) => (
            [
                (header::CONTENT_TYPE, HeaderValue::from_static("image/png")),
                (header::ETAG, etag),
                (header::CACHE_CONTROL, cache),
            ],
            bytes,
        )
            .into_response(),
    })
}

async fn timeseries(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let value = parse_json(&body)?;
    let obj = value.as_object().ok_or_else(|| ApiError::invalid("polygon", "expected a JSON object"))?;
    let poly_value = obj
        .get("polygon")
        .filter(|v| !v.is_null())
        .ok_or_else(|| ApiError::invalid("polygon", "missing field 'polygon'"))?;
    let poly = GeoPolygon::from_json_value(poly_value).map_err(|e| ApiError::invalid("polygon", e.to_string()))?;
    poly.validate().map_err(|e| ApiError::invalid("polygon", e.to_string()))?;
    let sensor = match obj.get("sensor").and_then(Value::as_str) {
        None => Sensor::Sar,
        Some(s) => s.parse().map_err(|e: String| ApiError::invalid("sensor", e))?,
    };
    let band = match obj.get("band") {
        None | Some(Value::Null) => SAR_BAND.to_owned(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ApiError::invalid("band", "expected a band name")),
    };
    let mut range = DateRange::default();
    if let Some(r) = obj.get("date_range").filter(|v| !v.is_null()) {
        let r = r.as_object().ok_or_else(|| ApiError::invalid("date_range", "expected {start, end}"))?;
        if let Some(v) = r.get("start").filter(|v| !v.is_null()) {
            range.start = Some(parse_date(v, "date_range.start")?);
        }
        if let Some(v) = r.get("end").filter(|v| !v.is_null()) {
            range.end = Some(parse_date(v, "date_range.end")?);
        }
    }
    let series = blocking(move || {
        let cat = state.catalog()?;
        Ok(zonal_timeseries(&cat, &poly, sensor, &band, &range)?)
    })
    .await?;
    Ok(Json(json!(series)))
}

async fn pumice(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let mut value = parse_json(&body)?;
    let obj = value.as_object_mut().ok_or_else(|| ApiError::invalid("date", "expected a JSON object"))?;
    obj.insert("kind".into(), json!("pumice"));
    if let Some(bbox) = parse_bbox(obj, "bbox")? {
        obj.insert("bbox".into(), json!(bbox));
    }
    let spec = LayerSpec::parse(&value, state.root())?;
    let layer = blocking(move || state.create_layer(spec)).await?;
    Ok(Json(json!({
        "layer_id": layer.id,
        "threshold": layer.info.threshold,
        "scene": layer.info.scene,
        "detected_pixels": layer.info.detected_pixels,
    })))
}
