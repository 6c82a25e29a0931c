//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#![allow(clippy::needless_range_loop)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::{NaiveDate, TimeZone, Utc};
use grasp_core::catalog::IngestRequest;
use grasp_core::container::{decode, read_container, to_bytes, write_container, ContainerError};
use grasp_core::engine::{
    detect_pumice, ndwi, otsu_fit, sar_change, temporal_composite, zonal_timeseries, ChangeRequest, DateRange,
    PumiceRequest, NDWI_BAND,
};
use grasp_core::raster::{lonlat_to_tile, rasterize_polygon, tile_bounds};
use grasp_core::synth::{generate, score_masks, EventKind, GroundTruth, SynthConfig, SynthRng};
use grasp_core::{BoundingBox, Catalog, DateWindow, GeoPolygon, GridSpec, Raster, Sensor, TileKey};
use serde_json::json;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($arg)*));
        }
    };
}

fn date(m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, m, d).unwrap()
}

const SEED: u64 = 2021;

struct Fixture {
    _dir: tempfile::TempDir,
    root: std::path::PathBuf,
    catalog: Catalog,
    truth: GroundTruth,
    generate_time: Duration,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("catalog");
    let t = Instant::now();
    let (catalog, truth) = generate(&SynthConfig::example(SEED), &root).unwrap();
    Fixture { generate_time: t.elapsed(), _dir: dir, root, catalog, truth }
}

// ---- Otsu ----

fn otsu_brute_force(samples: &[f64]) -> f64 {
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = (max - min) / 256.0;
    let bins: Vec<u64> = samples.iter().map(|v| (((v - min) / w).floor() as u64).min(255)).collect();
    let mut best = (f64::NEG_INFINITY, 0u64);
    for k in 0..255u64 {
        let lo: Vec<u64> = bins.iter().copied().filter(|b| *b <= k).collect();
        let hi: Vec<u64> = bins.iter().copied().filter(|b| *b > k).collect();
        let var = if lo.is_empty() || hi.is_empty() {
            0.0
        } else {
            let n = samples.len() as f64;
            let m0 = lo.iter().sum::<u64>() as f64 / lo.len() as f64;
            let m1 = hi.iter().sum::<u64>() as f64 / hi.len() as f64;
            (lo.len() as f64 / n) * (hi.len() as f64 / n) * (m0 - m1).powi(2)
        };
        if var > best.0 {
            best = (var, k);
        }
    }
    min + (best.1 + 1) as f64 * w
}

fn otsu_oracle() -> Outcome {
    let mut rng = SynthRng::new(7);
    let sets: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            let n = rng.range(10, 10_000) as usize;
            let (m0, m1) = (rng.uniform() * 10.0 - 5.0, rng.uniform() * 10.0 + 2.0);
            let (s0, s1) = (0.5 + rng.uniform(), 0.5 + rng.uniform());
            let p = 0.2 + 0.6 * rng.uniform();
            (0..n).map(|_| if rng.uniform() < p { m0 + s0 * rng.normal() } else { m1 + s1 * rng.normal() }).collect()
        })
        .collect();
    let t = Instant::now();
    let fitted: Vec<f64> = sets.iter().map(|s| otsu_fit(s).unwrap().threshold).collect();
    let elapsed = t.elapsed();
    for (i, (s, got)) in sets.iter().zip(&fitted).enumerate() {
        let want = otsu_brute_force(s);
        ensure!(got.to_bits() == want.to_bits(), "set {i} (n={}): {got} != {want}", s.len());
    }
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("100 sets identical to exhaustive search, {elapsed:.2?}"))
}

// ---- Change detection ----

fn change_recovery(fx: &Fixture) -> Outcome {
    let calib = fx.truth.change_calibration(100, SEED);
    ensure!(calib.constructed.len() == 100 && calib.destructed.len() == 100, "calibration size");
    let t = Instant::now();
    let catalog = Catalog::open(&fx.root).map_err(|e| e.to_string())?;
    let req = ChangeRequest::new(date(1, 13), date(2, 24), calib, fx.truth.grid.bbox());
    let layer = sar_change(&catalog, &req).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure!(layer.grid == fx.truth.grid, "layer grid differs from scene grid");
    let overlap = layer.blue_mask.bits.iter().zip(&layer.red_mask.bits).filter(|(b, r)| **b && **r).count();
    ensure!(overlap == 0, "{overlap} pixels both blue and red");
    let mut detail = Vec::new();
    for ev in &fx.truth.events {
        let mask = match ev.kind {
            EventKind::Construct => &layer.blue_mask,
            EventKind::Destruct => &layer.red_mask,
            EventKind::PumiceRaft => continue,
        };
        let s = score_masks(&mask.bits, &ev.mask).map_err(|e| e.to_string())?;
        ensure!(s.iou >= 0.8, "{:?} IoU {:.3}", ev.kind, s.iou);
        detail.push(format!("{:?} IoU {:.3}", ev.kind, s.iou));
    }
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "{}, thresholds {:+.2}/{:+.2} dB, {elapsed:.2?} (synthesis {:.2?})",
        detail.join(", "),
        layer.thresholds.blue,
        layer.thresholds.red,
        fx.generate_time
    ))
}

fn null_change(fx: &Fixture) -> Outcome {
    let mut calib = fx.truth.change_calibration(100, SEED);
    calib.reference_dates = Some(grasp_core::engine::ReferenceDates { date1: date(1, 13), date2: date(2, 24) });
    let mut n = 0;
    for d in [date(1, 13), date(2, 24), date(3, 8)] {
        let req = ChangeRequest::new(d, d, calib.clone(), fx.truth.grid.bbox());
        let layer = sar_change(&fx.catalog, &req).map_err(|e| e.to_string())?;
        let (b, r) = (layer.blue_mask.count(), layer.red_mask.count());
        ensure!(b == 0 && r == 0, "{d}: {b} blue, {r} red");
        n += 1;
    }
    Ok(format!("{n} dates, zero blue and red pixels"))
}

// ---- Composite ----

fn cloudless_composite() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let grid = GridSpec::new(10.0, 20.0, 0.01, 64, 48).unwrap();
    let n = grid.len();
    let mut rng = SynthRng::new(55);
    let bands = ["red", "green", "blue", "nir"];
    let clean: Vec<Vec<f32>> = bands.iter().map(|_| (0..n).map(|_| rng.uniform() as f32).collect()).collect();
    // Up to two clouded scenes per pixel, except the last pixel which is clouded everywhere.
    let mut clouded = vec![[false; 5]; n];
    for (i, c) in clouded.iter_mut().enumerate() {
        if i == n - 1 {
            *c = [true; 5];
            continue;
        }
        for _ in 0..rng.range(0, 2) {
            c[rng.range(0, 4) as usize] = true;
        }
    }
    let mut catalog = Catalog::create(root).map_err(|e| e.to_string())?;
    for s in 0..5usize {
        let mut named: Vec<(String, Vec<f32>)> = Vec::new();
        for (b, name) in bands.iter().enumerate() {
            let vals = (0..n).map(|i| if clouded[i][s] { 0.8 + rng.uniform() as f32 } else { clean[b][i] }).collect();
            named.push((name.to_string(), vals));
        }
        named.push(("cloud".into(), (0..n).map(|i| clouded[i][s] as u8 as f32).collect()));
        let raster = Raster::from_bands(grid, named).map_err(|e| e.to_string())?;
        let path = root.join(format!("in-{s}.grsp"));
        write_container(&raster, &path).map_err(|e| e.to_string())?;
        let timestamp = Utc.with_ymd_and_hms(2021, 5, 1 + 2 * s as u32, 0, 0, 0).unwrap();
        let req = IngestRequest { path, sensor: Sensor::Optical, timestamp, id: None };
        catalog = catalog.ingest(&req).map_err(|e| e.to_string())?.0;
    }
    let window = DateWindow::symmetric(NaiveDate::from_ymd_opt(2021, 5, 5).unwrap(), 10);
    let comp = temporal_composite(&catalog, Sensor::Optical, &window, &grid.bbox()).map_err(|e| e.to_string())?;
    ensure!(comp.grid() == &grid, "composite grid {:?}", comp.grid());
    for (b, name) in bands.iter().enumerate() {
        let got = comp.band(name).map_err(|e| e.to_string())?;
        for i in 0..n - 1 {
            ensure!(comp.valid()[i], "pixel {i} nodata");
            ensure!(got[i].to_bits() == clean[b][i].to_bits(), "{name}[{i}] = {} != {}", got[i], clean[b][i]);
        }
    }
    ensure!(!comp.valid()[n - 1], "fully clouded pixel is not nodata");
    let max_clouded = clouded[..n - 1].iter().map(|c| c.iter().filter(|x| **x).count()).max().unwrap();
    Ok(format!("{} pixels bit-exact (up to {max_clouded} of 5 clouded), all-cloud pixel nodata", n - 1))
}

// ---- Pumice ----

fn pumice(fx: &Fixture) -> Outcome {
    let mut contrast = f64::INFINITY;
    let mut worst = (f64::INFINITY, f64::INFINITY);
    let mut scenes = 0;
    let land = fx.catalog.land_mask_on(&fx.truth.grid).map_err(|e| e.to_string())?;
    let land = land.ok_or("catalog has no land mask")?;
    for scene in fx.truth.scenes.iter().filter(|s| s.sensor == Sensor::Optical) {
        let visible = fx.truth.visible_pumice(scene);
        if !visible.iter().any(|v| *v) {
            continue;
        }
        let raster = fx.catalog.load_id(scene.id.as_str()).map_err(|e| e.to_string())?.raster;
        let nd = ndwi(raster.view("green").unwrap(), raster.view("nir").unwrap()).map_err(|e| e.to_string())?;
        let nd = nd.band(NDWI_BAND).unwrap();
        let mean = |sel: &dyn Fn(usize) -> bool| {
            let v: Vec<f64> = (0..nd.len()).filter(|i| sel(*i)).map(|i| nd[i] as f64).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let raft = mean(&|i| visible[i]);
        let sea = mean(&|i| !visible[i] && !land[i] && !scene.cloud[i] && !fx.truth.events[2].mask[i]);
        contrast = contrast.min(sea - raft);

        let calib = fx.truth.pumice_calibration(scene, 100, SEED);
        ensure!(calib.pumice.len() >= 100 && calib.non_pumice.len() >= 100, "calibration size");
        let res = detect_pumice(&fx.catalog, &PumiceRequest::new(scene.date(), calib)).map_err(|e| e.to_string())?;
        ensure!(res.scene.as_str() == scene.id.as_str(), "picked {} for {}", res.scene.as_str(), scene.id);
        let bits = &res.mask.bits;
        let under_cloud = (0..bits.len()).filter(|i| bits[*i] && scene.cloud[*i]).count();
        let on_land = (0..bits.len()).filter(|i| bits[*i] && land[*i]).count();
        ensure!(under_cloud == 0 && on_land == 0, "{}: {under_cloud} under cloud, {on_land} on land", scene.id);
        let s = score_masks(bits, &visible).map_err(|e| e.to_string())?;
        ensure!(s.precision >= 0.95 && s.recall >= 0.95, "{}: {s:?}", scene.id);
        worst = (worst.0.min(s.precision), worst.1.min(s.recall));
        scenes += 1;
    }
    ensure!(scenes > 0, "no optical scene shows the raft");
    ensure!(contrast >= 0.5, "NDWI contrast {contrast:.3}");
    Ok(format!("{scenes} scenes, min precision {:.4}, min recall {:.4}, NDWI contrast {contrast:.3}", worst.0, worst.1))
}

// ---- Time series ----

fn time_series(fx: &Fixture) -> Outcome {
    let ev = fx.truth.events_of(EventKind::Construct).next().ok_or("no construct event")?;
    let poly = GeoPolygon::rect(&ev.rect.bbox(&fx.truth.grid));
    let ts =
        zonal_timeseries(&fx.catalog, &poly, Sensor::Sar, "vv", &DateRange::default()).map_err(|e| e.to_string())?;
    let zone = rasterize_polygon(&poly, &fx.truth.grid).map_err(|e| e.to_string())?;
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for s in &ts.samples {
        let raster = fx.catalog.load_id(s.scene.as_str()).map_err(|e| e.to_string())?.raster;
        let vv = raster.band("vv").unwrap();
        let (mut sum, mut n) = (0.0f64, 0usize);
        for i in 0..vv.len() {
            if zone.bits[i] && raster.valid()[i] {
                sum += vv[i] as f64;
                n += 1;
            }
        }
        ensure!(n >= 100, "{} pixels under polygon", n);
        let mean = s.mean.ok_or("empty sample")?;
        ensure!(
            s.valid_pixels == n && mean.to_bits() == (sum / n as f64).to_bits(),
            "{}: {mean} vs {}",
            s.scene.as_str(),
            sum / n as f64
        );
        if s.timestamp.date_naive() >= ev.onset {
            after.push(mean)
        } else {
            before.push(mean)
        }
    }
    ensure!(!before.is_empty() && !after.is_empty(), "onset not inside the series");
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let step = avg(&after) - avg(&before);
    ensure!((5.0..=7.0).contains(&step), "step {step:.3} dB");
    Ok(format!("{} scenes, {} pixels, step {step:.3} dB at {}, means exact", ts.samples.len(), zone.count(), ev.onset))
}

// ---- Tiles ----

fn tile_math() -> Outcome {
    let mut rng = SynthRng::new(1000);
    for _ in 0..1000 {
        let lon = rng.uniform() * 360.0 - 180.0;
        let lat = rng.uniform() * 170.0 - 85.0;
        let z = rng.range(0, 18) as u8;
        let key = lonlat_to_tile(lon, lat, z).map_err(|e| e.to_string())?;
        let b = tile_bounds(key);
        ensure!(
            b.west <= lon && lon <= b.east && b.south <= lat && lat <= b.north,
            "({lon}, {lat}) z{z} not inside {key:?} {b:?}"
        );
    }
    let root = tile_bounds(TileKey::new(0, 0, 0).unwrap());
    let kids: Vec<BoundingBox> = (0..4).map(|i| tile_bounds(TileKey::new(1, i % 2, i / 2).unwrap())).collect();
    let (nw, ne, sw, se) = (kids[0], kids[1], kids[2], kids[3]);
    ensure!(nw.west == root.west && sw.west == root.west, "west edge");
    ensure!(ne.east == root.east && se.east == root.east, "east edge");
    ensure!(nw.north == root.north && ne.north == root.north, "north edge");
    ensure!(sw.south == root.south && se.south == root.south, "south edge");
    ensure!(nw.east == ne.west && sw.east == se.west && nw.east == sw.east, "vertical seam");
    ensure!(nw.south == sw.north && ne.south == se.north && nw.south == ne.south, "horizontal seam");
    let area: f64 = kids.iter().map(|b| b.width() * b.height()).sum();
    ensure!(area == root.width() * root.height(), "areas {area}");
    Ok("1000 points contained; z=1 partitions z=0 exactly".into())
}

// ---- Container ----

fn container_format() -> Outcome {
    let mut rng = SynthRng::new(50);
    for k in 0..50 {
        let (w, h) = (rng.range(1, 64), rng.range(1, 64));
        let grid = GridSpec::new(rng.uniform() * 100.0 - 50.0, rng.uniform() * 60.0, 1e-4 + rng.uniform(), w, h)
            .map_err(|e| e.to_string())?;
        let bands: Vec<(String, Vec<f32>)> = (0..rng.range(1, 5))
            .map(|b| (format!("band{b}"), (0..grid.len()).map(|_| f32::from_bits(rng.range(0, u32::MAX))).collect()))
            .collect();
        let mut r = Raster::from_bands(grid, bands).map_err(|e| e.to_string())?;
        for v in r.valid_mut() {
            *v = rng.uniform() < 0.8;
        }
        let back = decode(&to_bytes(&r)).map_err(|e| e.to_string())?;
        ensure!(back.bit_eq(&r), "raster {k} differs after round trip");
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.grsp");
    let r = Raster::filled(GridSpec::new(0.0, 1.0, 0.1, 4, 4).unwrap(), &["vv"], 1.0).unwrap();
    let mut bytes = to_bytes(&r);
    bytes[..4].copy_from_slice(b"PNG\0");
    std::fs::write(&path, bytes).unwrap();
    match read_container(&path) {
        Err(ContainerError::FormatViolation { offset: 0, .. }) => {}
        other => return Err(format!("corrupt magic gave {other:?}")),
    }
    Ok("50 rasters bit-exact; bad magic rejected at offset 0".into())
}

// ---- Service ----

async fn fetch_all(app: &axum::Router, id: &str, keys: &[TileKey]) -> Result<Vec<Vec<u8>>, String> {
    let mut out = Vec::new();
    for k in keys {
        let r = common::get(app, &format!("/tiles/{id}/{}/{}/{}.png", k.z, k.x, k.y)).await;
        if r.status != 200 {
            return Err(format!("tile {k:?}: {}", r.status));
        }
        out.push(r.body);
    }
    Ok(out)
}

async fn service_determinism(root: &Path, truth: &GroundTruth) -> Outcome {
    let spec = json!({
        "kind": "sar_change",
        "date1": "2021-01-13",
        "date2": "2021-02-24",
        "calibration": truth.change_calibration(100, SEED),
    });
    let bbox = truth.grid.bbox();
    let corner = lonlat_to_tile(bbox.west + 1e-6, bbox.north - 1e-6, 15).unwrap();
    let keys: Vec<TileKey> = (0..64).map(|i| TileKey::new(15, corner.x + i % 8, corner.y + i / 8).unwrap()).collect();
    let app = common::app(root, 8);
    let a = common::post(&app, "/layers", spec.clone()).await;
    ensure!(a.status == 200, "create layer: {}", String::from_utf8_lossy(&a.body));
    let id = a.json()["layer_id"].as_str().unwrap().to_owned();
    let sequential = fetch_all(&app, &id, &keys).await?;

    // Same spec on the same server and on a fresh server.
    let b = common::post(&app, "/layers", spec.clone()).await;
    ensure!(b.json()["layer_id"] == a.json()["layer_id"], "layer id changed");
    let fresh = common::app(root, 8);
    let c = common::post(&fresh, "/layers", spec).await;
    ensure!(c.json()["layer_id"] == a.json()["layer_id"], "layer id differs across servers");
    ensure!(fetch_all(&fresh, &id, &keys).await? == sequential, "fresh server tiles differ");

    let handles: Vec<_> = keys
        .iter()
        .map(|k| {
            let app = fresh.clone();
            let uri = format!("/tiles/{id}/{}/{}/{}.png", k.z, k.x, k.y);
            tokio::spawn(async move { common::get(&app, &uri).await })
        })
        .collect();
    let mut concurrent = Vec::new();
    for h in handles {
        let r = h.await.map_err(|e| e.to_string())?;
        ensure!(r.status == 200, "concurrent tile {}", r.status);
        concurrent.push(r.body);
    }
    ensure!(concurrent == sequential, "concurrent tiles differ from sequential");
    let painted = sequential.iter().filter(|t| common::decode_png(t).2.chunks(4).any(|p| p[3] != 0)).count();
    ensure!(painted > 0, "no painted tiles");
    Ok(format!("64 tiles byte-identical across repeat, fresh server and concurrent fetch ({painted} painted)"))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = t.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS  {name:<24} {detail} [{secs:.2}s]");
            true
        }
        Err(detail) => {
            println!("FAIL  {name:<24} {detail} [{secs:.2}s]");
            false
        }
    }
}

fn main() {
    let fx = fixture();
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let results = [
        run("otsu-oracle", otsu_oracle),
        run("change-recovery", || change_recovery(&fx)),
        run("null-change", || null_change(&fx)),
        run("cloudless-composite", cloudless_composite),
        run("pumice", || pumice(&fx)),
        run("time-series", || time_series(&fx)),
        run("tile-math", tile_math),
        run("container-format", container_format),
        run("service-determinism", || rt.block_on(service_determinism(&fx.root, &fx.truth))),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
