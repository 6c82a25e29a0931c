use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, NaiveDate, Utc};
use grasp_core::catalog::IngestRequest;
use grasp_core::container::write_container;
use grasp_core::engine::{
    detect_pumice, sar_change, temporal_composite, zonal_timeseries, CalibrationSet, ChangeRequest, DateRange,
    PumiceCalibration, PumiceRequest,
};
use grasp_core::synth::{generate, GroundTruth, SynthConfig};
use grasp_core::{BoundingBox, Catalog, DateWindow, GeoPolygon, Raster, Sensor};
use grasp_service::{ServiceConfig, CALIBRATION_DIR, PUMICE_BAND};

const CALIBRATION_SAMPLES: usize = 100;

use crate::{Command, UsageError};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { config, out } => synth(&config, &out),
        Command::Ingest { catalog, file, sensor, date, id } => ingest(&catalog, &file, sensor, &date, id),
        Command::Composite { catalog, sensor, date, window_days, out } => {
            composite(&catalog, sensor, date, window_days, &out)
        }
        Command::Change { catalog, date1, date2, calib, out_prefix, window_days } => {
            change(&catalog, date1, date2, &calib, &out_prefix, window_days)
        }
        Command::Pumice { catalog, date, calib, out, search_days } => pumice(&catalog, date, &calib, &out, search_days),
        Command::Timeseries { catalog, polygon, out, sensor, band, start, end } => {
            timeseries(&catalog, &polygon, &out, sensor, &band, DateRange { start, end })
        }
        Command::Serve { catalog, port, cache_layers, bind } => {
            let config = ServiceConfig { catalog: existing(&catalog, "--catalog")?, bind, port, cache_layers };
            serve(config)
        }
    }
}

fn existing(path: &Path, flag: &str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path.to_owned())
    } else {
        Err(UsageError(format!("{flag}: {} does not exist", path.display())).into())
    }
}

fn read_input(path: &Path, flag: &str) -> Result<Vec<u8>> {
    existing(path, flag)?;
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn open_catalog(root: &Path) -> Result<Catalog> {
    existing(root, "--catalog")?;
    Ok(Catalog::open(root)?)
}

/// Extent of the sensor's scenes; the whole globe when there are none, so the
/// engine reports the empty window itself.
fn extent(catalog: &Catalog, sensor: Sensor) -> Result<BoundingBox> {
    match catalog.sensor_extent(sensor) {
        Some(b) => Ok(b),
        None => Ok(BoundingBox::new(-180.0, -90.0, 180.0, 90.0)?),
    }
}

fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(d) = s.parse::<NaiveDate>() {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| UsageError(format!("--date: '{s}' is neither YYYY-MM-DD nor RFC 3339")).into())
}

fn synth(config: &Path, out: &Path) -> Result<()> {
    let cfg = SynthConfig::from_json(&read_input(config, "--config")?)?;
    let (catalog, truth) = generate(&cfg, out)?;
    let written = write_calibrations(&truth, out, cfg.seed)?;
    println!(
        "{} scenes, {} events, {written} calibration files, catalog version {} in {}",
        catalog.len(),
        truth.events.len(),
        catalog.version(),
        out.display()
    );
    Ok(())
}

/// Ground-truth calibration sets under `calibration/`: `change.json` and one
/// `pumice-<scene>.json` per optical scene that shows a raft.
fn write_calibrations(truth: &GroundTruth, out: &Path, seed: u64) -> Result<usize> {
    let dir = out.join(CALIBRATION_DIR);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let change = truth.change_calibration(CALIBRATION_SAMPLES, seed);
    if !change.constructed.is_empty() || !change.destructed.is_empty() {
        files.push(("change.json".into(), serde_json::to_vec_pretty(&change)?));
    }
    for scene in truth.scenes.iter().filter(|s| s.sensor == Sensor::Optical) {
        if truth.visible_pumice(scene).iter().any(|v| *v) {
            let calib = truth.pumice_calibration(scene, CALIBRATION_SAMPLES, seed);
            files.push((format!("pumice-{}.json", scene.id), serde_json::to_vec_pretty(&calib)?));
        }
    }
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(files.len())
}

fn ingest(root: &Path, file: &Path, sensor: Sensor, date: &str, id: Option<String>) -> Result<()> {
    let timestamp = parse_timestamp(date)?;
    let path = existing(file, "FILE")?;
    fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let catalog = Catalog::create(root)?;
    let (next, id) = catalog.ingest(&IngestRequest { path, sensor, timestamp, id })?;
    println!("{id}\t{} scenes", next.len());
    Ok(())
}

fn composite(root: &Path, sensor: Sensor, date: NaiveDate, window_days: Option<u32>, out: &Path) -> Result<()> {
    let catalog = open_catalog(root)?;
    let window = match window_days {
        Some(days) => DateWindow::symmetric(date, days),
        None => DateWindow::default_for(sensor, date),
    };
    let raster = temporal_composite(&catalog, sensor, &window, &extent(&catalog, sensor)?)?;
    write_container(&raster, out)?;
    println!("{} valid of {} pixels", raster.valid_count(), raster.grid().len());
    Ok(())
}

fn change(
    root: &Path,
    date1: NaiveDate,
    date2: NaiveDate,
    calib: &Path,
    prefix: &Path,
    window_days: Option<u32>,
) -> Result<()> {
    let calibration = CalibrationSet::from_json(&read_input(calib, "--calib")?)
        .with_context(|| format!("parsing {}", calib.display()))?;
    let catalog = open_catalog(root)?;
    let mut req = ChangeRequest::new(date1, date2, calibration, extent(&catalog, Sensor::Sar)?);
    if let Some(days) = window_days {
        req.window_days = days;
    }
    let layer = sar_change(&catalog, &req)?;
    let with_suffix = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let blue = Raster::from_bands(layer.grid, [("blue", layer.blue_mask.to_f32())])?;
    let red = Raster::from_bands(layer.grid, [("red", layer.red_mask.to_f32())])?;
    write_container(&blue, with_suffix("_blue.grsp"))?;
    write_container(&red, with_suffix("_red.grsp"))?;
    let thresholds = serde_json::to_vec_pretty(&layer.thresholds)?;
    let path = with_suffix("_thresholds.json");
    fs::write(&path, thresholds).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "blue {} px (t = {}), red {} px (t = {})",
        layer.blue_mask.count(),
        layer.thresholds.blue,
        layer.red_mask.count(),
        layer.thresholds.red
    );
    Ok(())
}

fn pumice(root: &Path, date: NaiveDate, calib: &Path, out: &Path, search_days: Option<u32>) -> Result<()> {
    let calibration = PumiceCalibration::from_json(&read_input(calib, "--calib")?)
        .with_context(|| format!("parsing {}", calib.display()))?;
    let catalog = open_catalog(root)?;
    let mut req = PumiceRequest::new(date, calibration);
    if let Some(days) = search_days {
        req.search_days = days;
    }
    let res = detect_pumice(&catalog, &req)?;
    let raster = Raster::from_bands(res.mask.grid, [(PUMICE_BAND, res.mask.to_f32())])?;
    write_container(&raster, out)?;
    println!("scene {}, threshold {}, {} px", res.scene, res.threshold, res.mask.count());
    Ok(())
}

fn timeseries(root: &Path, polygon: &Path, out: &Path, sensor: Sensor, band: &str, range: DateRange) -> Result<()> {
    let value: serde_json::Value = serde_json::from_slice(&read_input(polygon, "--polygon")?)
        .with_context(|| format!("parsing {}", polygon.display()))?;
    let poly = GeoPolygon::from_json_value(&value)?;
    let catalog = open_catalog(root)?;
    let series = zonal_timeseries(&catalog, &poly, sensor, band, &range)?;
    let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
    w.write_record(["timestamp", "mean_db", "valid_pixels"])?;
    for s in &series.samples {
        let mean = s.mean.map(|m| m.to_string()).unwrap_or_default();
        w.write_record([s.timestamp.to_rfc3339(), mean, s.valid_pixels.to_string()])?;
    }
    w.flush()?;
    println!("{} samples", series.samples.len());
    Ok(())
}

fn serve(config: ServiceConfig) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(grasp_service::serve(config))?;
    Ok(())
}
