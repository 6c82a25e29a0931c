mod common;

use chrono::NaiveDate;
use common::{app, decode_png, get, post};
use grasp_core::raster::{lonlat_to_tile, tile_bounds};
use grasp_core::synth::{generate, score_masks, EventKind, GroundTruth, PixelRect, SynthConfig};
use grasp_core::{GridSpec, Sensor};
use serde_json::{json, Value};

/// 128×128 scenario on a 0.001° grid with a 40×40 construct event.
fn small_config(seed: u64, speckle: f64) -> SynthConfig {
    let mut c = SynthConfig::example(seed);
    c.grid = GridSpec::new(139.0, 36.0, 0.001, 128, 128).unwrap();
    c.land = vec![PixelRect::new(0, 112, 128, 16)];
    for (e, r) in c.events.iter_mut().zip([(8, 8, 40, 40), (64, 8, 40, 40), (16, 60, 48, 32)]) {
        e.rect = PixelRect::new(r.0, r.1, r.2, r.3);
    }
    c.sar.as_mut().unwrap().speckle_sigma_db = speckle;
    c
}

fn fixture(speckle: f64) -> (tempfile::TempDir, GroundTruth) {
    let dir = tempfile::tempdir().unwrap();
    let (_, truth) = generate(&small_config(21, speckle), dir.path()).unwrap();
    (dir, truth)
}

fn change_spec(truth: &GroundTruth, date1: &str, date2: &str) -> Value {
    let mut calib = json!(truth.change_calibration(100, 5));
    calib["reference_dates"] = json!({"date1": "2021-01-13", "date2": "2021-02-24"});
    json!({"kind": "sar_change", "date1": date1, "date2": date2, "calibration": calib})
}

#[tokio::test]
async fn empty_catalog_lists_no_scenes() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), 4);
    let r = get(&app, "/catalog").await;
    assert_eq!(r.status, 200);
    assert_eq!(r.json()["scenes"], json!([]));
}

#[tokio::test]
async fn malformed_catalog_is_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("manifest.json"), b"{ not json").unwrap();
    let app = app(dir.path(), 4);
    let r = get(&app, "/catalog").await;
    assert_eq!(r.status, 503);
    assert_eq!(r.json()["error"], "CatalogUnavailable");
    let r = get(&app, "/config").await;
    assert_eq!(r.status, 200);
    assert!(r.json()["catalog_error"].is_string());
}

#[tokio::test]
async fn catalog_extent_spans_all_scenes() {
    let (dir, truth) = fixture(1.0);
    let app = app(dir.path(), 4);
    let body = get(&app, "/catalog").await.json();
    let scenes = body["scenes"].as_array().unwrap();
    assert_eq!(scenes.len(), truth.scenes.len());
    let min = truth.scenes.iter().map(|s| s.timestamp).min().unwrap();
    let max = truth.scenes.iter().map(|s| s.timestamp).max().unwrap();
    assert_eq!(body["extent"]["start"], json!(min));
    assert_eq!(body["extent"]["end"], json!(max));
    assert_eq!(body["sensors"]["SAR"]["scenes"], 12);
    assert_eq!(body["sensors"]["OPTICAL"]["scenes"], 5);
}

#[tokio::test]
async fn thirty_scene_catalog_extent() {
    let mut cfg = small_config(4, 1.0);
    cfg.optical = None;
    let sar = cfg.sar.as_mut().unwrap();
    sar.schedule.start = NaiveDate::from_ymd_opt(2021, 6, 1).unwrap();
    sar.schedule.end = NaiveDate::from_ymd_opt(2021, 6, 30).unwrap();
    sar.schedule.cadence_days = 1;
    cfg.events.retain(|e| e.kind != EventKind::PumiceRaft);
    let dir = tempfile::tempdir().unwrap();
    generate(&cfg, dir.path()).unwrap();
    let body = get(&app(dir.path(), 2), "/catalog").await.json();
    let scenes = body["scenes"].as_array().unwrap();
    assert_eq!(scenes.len(), 30);
    let stamps: Vec<chrono::DateTime<chrono::Utc>> =
        scenes.iter().map(|s| serde_json::from_value(s["timestamp"].clone()).unwrap()).collect();
    let (min, max) = (stamps.iter().min().unwrap(), stamps.iter().max().unwrap());
    assert_eq!(min.date_naive(), NaiveDate::from_ymd_opt(2021, 6, 1).unwrap());
    assert_eq!(max.date_naive(), NaiveDate::from_ymd_opt(2021, 6, 30).unwrap());
    assert_eq!(body["extent"]["start"], json!(min));
    assert_eq!(body["extent"]["end"], json!(max));
}

#[tokio::test]
async fn config_exposes_style() {
    let (dir, _) = fixture(1.0);
    let body = get(&app(dir.path(), 4), "/config").await.json();
    assert_eq!(body["tile_size"], 256);
    assert_eq!(body["style"]["blue"], json!([0, 0, 255, 180]));
    assert_eq!(body["style"]["red"], json!([255, 0, 0, 180]));
    assert_eq!(body["style"]["pumice"], json!([255, 0, 0, 200]));
    assert_eq!(body["style"]["rgb_stretch"], json!([0.0, 0.3]));
}

#[tokio::test]
async fn layer_spec_validation() {
    let (dir, truth) = fixture(1.0);
    let app = app(dir.path(), 4);
    let mut spec = change_spec(&truth, "2021-01-13", "2021-02-24");
    spec.as_object_mut().unwrap().remove("date2");
    let r = post(&app, "/layers", spec).await;
    assert_eq!(r.status, 422);
    assert_eq!(r.json()["field"], "date2");
    assert!(r.json()["message"].as_str().unwrap().contains("date2"));

    let r = common::send(&app, axum::http::Method::POST, "/layers", None).await;
    assert_eq!(r.status, 400);

    let spec = json!({"kind": "sar_intensity", "date": "2019-01-01", "window_days": 3});
    let r = post(&app, "/layers", spec).await;
    assert_eq!(r.status, 404);
    assert_eq!(r.json()["error"], "NoScenesInWindow");
}

#[tokio::test]
async fn inverted_calibration_conflicts() {
    let (dir, truth) = fixture(1.0);
    let app = app(dir.path(), 4);
    let mut spec = change_spec(&truth, "2021-01-13", "2021-02-24");
    let c = spec["calibration"]["constructed"].clone();
    spec["calibration"]["constructed"] = spec["calibration"]["destructed"].clone();
    spec["calibration"]["destructed"] = c;
    let r = post(&app, "/layers", spec).await;
    assert_eq!(r.status, 409);
    assert_eq!(r.json()["error"], "CalibrationInconsistent");
}

#[tokio::test]
async fn null_change_layer_is_empty_and_idempotent() {
    let (dir, truth) = fixture(0.0);
    let app = app(dir.path(), 4);
    let spec = change_spec(&truth, "2021-02-24", "2021-02-24");
    let a = post(&app, "/layers", spec.clone()).await;
    assert_eq!(a.status, 200, "{:?}", a.json());
    let b = post(&app, "/layers", spec).await;
    assert_eq!(a.json()["layer_id"], b.json()["layer_id"]);
    assert_eq!(a.json()["detected_pixels"], 0);
    let t = a.json()["thresholds"].clone();
    assert!(t["blue"].as_f64().unwrap() > 0.0 && t["red"].as_f64().unwrap() < 0.0);
}

#[tokio::test]
async fn tiles_render_change_and_validate_indices() {
    let (dir, truth) = fixture(0.0);
    let app = app(dir.path(), 2);
    let spec = change_spec(&truth, "2021-01-13", "2021-02-24");
    let created = post(&app, "/layers", spec).await.json();
    let id = created["layer_id"].as_str().unwrap().to_owned();

    // A tile well inside the construct rectangle is solid blue.
    let ev = truth.events_of(EventKind::Construct).next().unwrap();
    let b = ev.rect.bbox(&truth.grid);
    let key = lonlat_to_tile((b.west + b.east) / 2.0, (b.south + b.north) / 2.0, 14).unwrap();
    let tb = tile_bounds(key);
    assert!(tb.west >= b.west && tb.east <= b.east && tb.south >= b.south && tb.north <= b.north);
    let r = get(&app, &format!("/tiles/{id}/{}/{}/{}.png", key.z, key.x, key.y)).await;
    assert_eq!(r.status, 200);
    assert_eq!(r.headers["content-type"], "image/png");
    let blue_tile = r.body.clone();
    let (w, h, px) = decode_png(&r.body);
    assert_eq!((w, h), (256, 256));
    assert!(px.chunks(4).all(|p| p == [0, 0, 255, 180]));

    // Conditional request.
    let etag = r.headers["etag"].to_str().unwrap().to_owned();
    let req = axum::http::Request::builder()
        .uri(format!("/tiles/{id}/{}/{}/{}.png", key.z, key.x, key.y))
        .header("if-none-match", &etag)
        .body(axum::body::Body::empty())
        .unwrap();
    let resp = tower::ServiceExt::oneshot(app.clone(), req).await.unwrap();
    assert_eq!(resp.status(), 304);

    // Far away: fully transparent.
    let r = get(&app, &format!("/tiles/{id}/10/0/0.png")).await;
    assert_eq!(r.status, 200);
    assert!(decode_png(&r.body).2.iter().all(|b| *b == 0));

    assert_eq!(get(&app, &format!("/tiles/{id}/3/8/0.png")).await.status, 400);
    assert_eq!(get(&app, &format!("/tiles/{id}/3/0/8.png")).await.status, 400);
    assert_eq!(get(&app, &format!("/tiles/{id}/23/0/0.png")).await.status, 400);
    assert_eq!(get(&app, &format!("/tiles/{id}/a/0/0.png")).await.status, 400);
    assert_eq!(get(&app, "/tiles/0123456789abcdef/3/0/0.png").await.status, 404);

    // Evicted layers come back from their spec.
    for date in ["2021-01-07", "2021-01-13"] {
        post(&app, "/layers", json!({"kind": "sar_intensity", "date": date})).await;
    }
    let again = get(&app, &format!("/tiles/{id}/{}/{}/{}.png", key.z, key.x, key.y)).await;
    assert_eq!(again.status, 200);
    assert_eq!(again.body, blue_tile);
}

#[tokio::test]
async fn rgb_and_intensity_layers_render() {
    let (dir, truth) = fixture(0.0);
    let app = app(dir.path(), 4);
    let (lon, lat) = truth.grid.pixel_center(100, 100);
    let key = lonlat_to_tile(lon, lat, 15).unwrap();
    for spec in
        [json!({"kind": "rgb_composite", "date": "2021-01-14"}), json!({"kind": "sar_intensity", "date": "2021-01-13"})]
    {
        let r = post(&app, "/layers", spec).await;
        assert_eq!(r.status, 200, "{:?}", r.json());
        let id = r.json()["layer_id"].as_str().unwrap().to_owned();
        let tile = get(&app, &format!("/tiles/{id}/{}/{}/{}.png", key.z, key.x, key.y)).await;
        let (_, _, px) = decode_png(&tile.body);
        assert!(px.chunks(4).any(|p| p[3] == 255));
    }
}

#[tokio::test]
async fn timeseries_endpoint() {
    let (dir, truth) = fixture(1.0);
    let app = app(dir.path(), 4);
    // One pixel.
    let g = &truth.grid;
    let (lon, lat) = g.pixel_center(20, 20);
    let h = g.pixel_size * 0.25;
    let ring = json!([[lon - h, lat - h], [lon + h, lat - h], [lon + h, lat + h], [lon - h, lat + h]]);
    let r = post(&app, "/analysis/timeseries", json!({"polygon": [ring]})).await;
    assert_eq!(r.status, 200);
    let samples = r.json()["samples"].as_array().unwrap().clone();
    assert_eq!(samples.len(), 12);
    let cat = grasp_core::Catalog::open(dir.path()).unwrap();
    for s in &samples {
        assert_eq!(s["valid_pixels"], 1);
        let scene = cat.load_id(s["scene"].as_str().unwrap()).unwrap();
        let v = scene.raster.band("vv").unwrap()[g.index(20, 20)] as f64;
        assert_eq!(s["mean"].as_f64().unwrap(), v);
    }

    // Construct rectangle: step at onset.
    let ev = truth.events_of(EventKind::Construct).next().unwrap();
    let b = ev.rect.bbox(g);
    let poly = json!({"type": "Polygon", "coordinates": [[[b.west, b.south], [b.east, b.south], [b.east, b.north], [b.west, b.north], [b.west, b.south]]]});
    let r = post(&app, "/analysis/timeseries", json!({"polygon": poly, "sensor": "SAR", "band": "vv"})).await;
    let samples = r.json()["samples"].as_array().unwrap().clone();
    for s in samples {
        let date = NaiveDate::parse_from_str(&s["timestamp"].as_str().unwrap()[..10], "%Y-%m-%d").unwrap();
        let m = s["mean"].as_f64().unwrap();
        let expected = if date >= ev.onset { -6.0 } else { -12.0 };
        assert!((m - expected).abs() < 0.5, "{date}: {m}");
    }

    let r = post(&app, "/analysis/timeseries", json!({"polygon": [[[0, 0], [1, 1]]]})).await;
    assert_eq!(r.status, 422);
    assert_eq!(r.json()["field"], "polygon");
    let r = post(&app, "/analysis/timeseries", json!({})).await;
    assert_eq!(r.status, 422);
    let range = json!({"start": "2021-02-01", "end": "2021-02-28"});
    let r = post(&app, "/analysis/timeseries", json!({"polygon": [ring], "date_range": range})).await;
    assert_eq!(r.json()["samples"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn pumice_endpoint() {
    let (dir, truth) = fixture(1.0);
    let app = app(dir.path(), 4);
    let scene = truth.scenes.iter().find(|s| s.sensor == Sensor::Optical).unwrap();
    let calib = truth.pumice_calibration(scene, 100, 3);
    let date = scene.date().to_string();
    let r = post(&app, "/analysis/pumice", json!({"date": date, "calibration": calib})).await;
    assert_eq!(r.status, 200, "{:?}", r.json());
    let body = r.json();
    assert_eq!(body["scene"], scene.id.as_str());
    let t = body["threshold"].as_f64().unwrap();
    assert!(t > -0.2 && t < 0.6, "{t}");
    let info = get(&app, &format!("/layers/{}", body["layer_id"].as_str().unwrap())).await.json();
    assert_eq!(info["threshold"], body["threshold"]);

    let cat = grasp_core::Catalog::open(dir.path()).unwrap();
    let req = grasp_core::engine::PumiceRequest::new(scene.date(), calib.clone());
    let res = grasp_core::engine::detect_pumice(&cat, &req).unwrap();
    let s = score_masks(&res.mask.bits, &truth.visible_pumice(scene)).unwrap();
    assert!(s.precision >= 0.95 && s.recall >= 0.95, "{s:?}");

    let same = vec![calib.pumice[0]; 3];
    let degenerate = json!({"pumice": same, "non_pumice": same});
    let r = post(&app, "/analysis/pumice", json!({"date": date, "calibration": degenerate})).await;
    assert_eq!(r.status, 409);
    assert_eq!(r.json()["error"], "DegenerateSamples");

    let r = post(&app, "/analysis/pumice", json!({"date": "2020-06-01", "calibration": calib})).await;
    assert_eq!(r.status, 404);
    assert_eq!(r.json()["error"], "NoScenesInWindow");
}
