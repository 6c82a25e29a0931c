//! Deterministic synthetic scene catalogs with exact ground truth.
//!
//! SAR scenes are `background + event deltas + N(0, σ)` in dB. Optical scenes
//! carry per-class reflectance profiles (sea, land, pumice) plus additive noise,
//! with random axis-aligned cloud rectangles replacing pixels by a bright cloud
//! profile and setting the `cloud` band. Every random draw comes from one
//! [`SynthRng`] stream in a fixed order, so a config always yields the same bytes.

mod rng;
mod score;

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rng::SynthRng;
pub use score::{score_masks, MaskScore};

use crate::catalog::{
    Catalog, CatalogError, IngestRequest, SceneId, Sensor, CLOUD_BAND, LAND_BAND, OPTICAL_BANDS, SAR_BAND, SCENES_DIR,
};
use crate::container::{self, ContainerError};
use crate::engine::{CalibrationSet, PumiceCalibration};
use crate::raster::{rasterize_polygon, Band, BoundingBox, GeoPolygon, GridSpec, Mask, Raster, RasterError};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config field '{field}': {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("output directory {0} is not empty")]
    OutputNotEmpty(PathBuf),
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::InvalidConfig { .. } => "InvalidConfig",
            SynthError::OutputNotEmpty(_) | SynthError::Io { .. } => "IoFailure",
            SynthError::Catalog(e) => e.code(),
            SynthError::Container(e) => e.code(),
            SynthError::Raster(e) => e.code(),
        }
    }

    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SynthError::InvalidConfig { field: field.into(), reason: reason.into() }
    }
}

/// Acquisition dates `start, start + cadence, …` up to and including `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub cadence_days: u32,
}

impl Schedule {
    pub fn dates(&self) -> Vec<NaiveDate> {
        let step = chrono::Days::new(self.cadence_days.max(1) as u64);
        std::iter::successors(Some(self.start), |d| d.checked_add_days(step)).take_while(|d| *d <= self.end).collect()
    }

    fn validate(&self, field: &str) -> Result<(), SynthError> {
        if self.cadence_days < 1 {
            return Err(SynthError::invalid(format!("{field}.cadence_days"), "must be at least 1"));
        }
        if self.end < self.start {
            return Err(SynthError::invalid(format!("{field}.end"), "precedes start"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarParams {
    pub schedule: Schedule,
    pub background_db: f64,
    pub speckle_sigma_db: f64,
}

/// Reflectance in the four optical bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflectance {
    pub red: f64,
    pub green: f64,
    pub blue: f64,
    pub nir: f64,
}

impl Reflectance {
    pub const fn new(red: f64, green: f64, blue: f64, nir: f64) -> Self {
        Self { red, green, blue, nir }
    }

    fn bands(&self) -> [f64; 4] {
        [self.red, self.green, self.blue, self.nir]
    }
}

fn default_cloud() -> Reflectance {
    Reflectance::new(0.8, 0.8, 0.8, 0.8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalParams {
    pub schedule: Schedule,
    pub sea: Reflectance,
    pub land: Reflectance,
    pub pumice: Reflectance,
    #[serde(default = "default_cloud")]
    pub cloud: Reflectance,
    /// Fraction of pixels under cloud in each scene, in `[0, 1)`.
    pub cloud_fraction: f64,
    #[serde(default)]
    pub noise_sigma: f64,
}

/// Pixel rectangle on the config grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub col: u32,
    pub row: u32,
    pub width: u32,
    pub height: u32,
}

impl PixelRect {
    pub fn new(col: u32, row: u32, width: u32, height: u32) -> Self {
        Self { col, row, width, height }
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Geographic extent of the rectangle's pixel edges.
    pub fn bbox(&self, grid: &GridSpec) -> BoundingBox {
        let ps = grid.pixel_size;
        BoundingBox {
            west: grid.origin_lon + self.col as f64 * ps,
            east: grid.origin_lon + (self.col + self.width) as f64 * ps,
            north: grid.origin_lat - self.row as f64 * ps,
            south: grid.origin_lat - (self.row + self.height) as f64 * ps,
        }
    }

    fn fits(&self, grid: &GridSpec) -> bool {
        self.width > 0
            && self.height > 0
            && self.col.checked_add(self.width).is_some_and(|e| e <= grid.width)
            && self.row.checked_add(self.height).is_some_and(|e| e <= grid.height)
    }

    fn contains(&self, col: u32, row: u32) -> bool {
        col >= self.col && col < self.col + self.width && row >= self.row && row < self.row + self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Construct,
    Destruct,
    PumiceRaft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthEvent {
    pub kind: EventKind,
    pub rect: PixelRect,
    pub onset: NaiveDate,
    /// dB change for construct/destruct; unused for pumice rafts.
    #[serde(default)]
    pub magnitude: f64,
}

impl SynthEvent {
    fn active(&self, date: NaiveDate) -> bool {
        date >= self.onset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub sar: Option<SarParams>,
    #[serde(default)]
    pub optical: Option<OpticalParams>,
    #[serde(default)]
    pub land: Vec<PixelRect>,
    #[serde(default)]
    pub events: Vec<SynthEvent>,
}

impl SynthConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SynthError> {
        serde_json::from_slice(bytes).map_err(|e| SynthError::invalid("config", e.to_string()))
    }

    /// 512×512 scenario with one construct, one destruct (160×160 each) and one pumice event.
    ///
    /// Twelve SAR scenes every 6 days from 2021-01-01, events at 2021-02-03, ±6 dB
    /// over −12 dB with σ = 1 dB. Five optical scenes every 5 days from 2021-01-04,
    /// 20 % cloud, land along the southern edge.
    pub fn example(seed: u64) -> Self {
        let d = |m, day| NaiveDate::from_ymd_opt(2021, m, day).expect("valid date");
        Self {
            seed,
            grid: GridSpec { origin_lon: 139.0, origin_lat: 36.0, pixel_size: 0.0005, width: 512, height: 512 },
            sar: Some(SarParams {
                schedule: Schedule { start: d(1, 1), end: d(3, 8), cadence_days: 6 },
                background_db: -12.0,
                speckle_sigma_db: 1.0,
            }),
            optical: Some(OpticalParams {
                schedule: Schedule { start: d(1, 4), end: d(1, 24), cadence_days: 5 },
                sea: Reflectance::new(0.03, 0.08, 0.06, 0.02),
                land: Reflectance::new(0.10, 0.12, 0.08, 0.30),
                pumice: Reflectance::new(0.14, 0.12, 0.10, 0.18),
                cloud: default_cloud(),
                cloud_fraction: 0.2,
                noise_sigma: 0.003,
            }),
            land: vec![PixelRect::new(0, 448, 512, 64)],
            events: vec![
                SynthEvent {
                    kind: EventKind::Construct,
                    rect: PixelRect::new(48, 48, 160, 160),
                    onset: d(2, 3),
                    magnitude: 6.0,
                },
                SynthEvent {
                    kind: EventKind::Destruct,
                    rect: PixelRect::new(288, 48, 160, 160),
                    onset: d(2, 3),
                    magnitude: 6.0,
                },
                SynthEvent {
                    kind: EventKind::PumiceRaft,
                    rect: PixelRect::new(96, 288, 192, 96),
                    onset: d(1, 1),
                    magnitude: 0.0,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.grid.validate().map_err(|e| SynthError::invalid("grid", e.to_string()))?;
        if let Some(sar) = &self.sar {
            sar.schedule.validate("sar.schedule")?;
            if !sar.background_db.is_finite() {
                return Err(SynthError::invalid("sar.background_db", "must be finite"));
            }
            if !(sar.speckle_sigma_db.is_finite() && sar.speckle_sigma_db >= 0.0) {
                return Err(SynthError::invalid("sar.speckle_sigma_db", "must be finite and non-negative"));
            }
        }
        if let Some(opt) = &self.optical {
            opt.schedule.validate("optical.schedule")?;
            if !(0.0..1.0).contains(&opt.cloud_fraction) {
                return Err(SynthError::invalid("optical.cloud_fraction", "must lie in [0, 1)"));
            }
            if !(opt.noise_sigma.is_finite() && opt.noise_sigma >= 0.0) {
                return Err(SynthError::invalid("optical.noise_sigma", "must be finite and non-negative"));
            }
            for (name, r) in [("sea", &opt.sea), ("land", &opt.land), ("pumice", &opt.pumice), ("cloud", &opt.cloud)] {
                if !r.bands().iter().all(|v| v.is_finite() && *v >= 0.0) {
                    return Err(SynthError::invalid(
                        format!("optical.{name}"),
                        "reflectance must be finite and non-negative",
                    ));
                }
            }
        }
        for (i, r) in self.land.iter().enumerate() {
            if !r.fits(&self.grid) {
                return Err(SynthError::invalid(format!("land[{i}]"), "rectangle is empty or leaves the grid"));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if !e.rect.fits(&self.grid) {
                return Err(SynthError::invalid(format!("events[{i}].rect"), "rectangle is empty or leaves the grid"));
            }
            if !e.magnitude.is_finite() {
                return Err(SynthError::invalid(format!("events[{i}].magnitude"), "must be finite"));
            }
        }
        Ok(())
    }
}

/// Boolean planes serialize as run-length pairs `[start, length]` of set pixels.
mod runs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Runs {
        len: usize,
        runs: Vec<[usize; 2]>,
    }

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < bits.len() {
            if bits[i] {
                let start = i;
                while i < bits.len() && bits[i] {
                    i += 1;
                }
                runs.push([start, i - start]);
            } else {
                i += 1;
            }
        }
        Runs { len: bits.len(), runs }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let r = Runs::deserialize(d)?;
        let mut bits = vec![false; r.len];
        for [start, n] in r.runs {
            let end = start.checked_add(n).filter(|e| *e <= r.len);
            let end = end.ok_or_else(|| serde::de::Error::custom("run exceeds plane length"))?;
            bits[start..end].fill(true);
        }
        Ok(bits)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTruth {
    pub kind: EventKind,
    pub rect: PixelRect,
    pub onset: NaiveDate,
    pub magnitude: f64,
    #[serde(with = "runs")]
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub id: SceneId,
    pub sensor: Sensor,
    pub timestamp: DateTime<Utc>,
    pub cloud_rects: Vec<PixelRect>,
    /// Equal to the scene's `cloud` band; all false for SAR.
    #[serde(with = "runs")]
    pub cloud: Vec<bool>,
}

impl SceneTruth {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn cloud_fraction(&self) -> f64 {
        self.cloud.iter().filter(|c| **c).count() as f64 / self.cloud.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(with = "runs")]
    pub land: Vec<bool>,
    pub events: Vec<EventTruth>,
    pub scenes: Vec<SceneTruth>,
}

impl GroundTruth {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SynthError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| SynthError::Io { path: path.to_owned(), source })?;
        serde_json::from_slice(&bytes).map_err(|e| SynthError::invalid("ground_truth", e.to_string()))
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &EventTruth> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn scene(&self, id: &str) -> Option<&SceneTruth> {
        self.scenes.iter().find(|s| s.id.as_str() == id)
    }

    /// Pumice pixels observable in `scene`: active rafts, not cloudy, not land.
    pub fn visible_pumice(&self, scene: &SceneTruth) -> Vec<bool> {
        let mut out = vec![false; self.grid.len()];
        for e in self.events_of(EventKind::PumiceRaft).filter(|e| scene.date() >= e.onset) {
            for (o, &m) in out.iter_mut().zip(&e.mask) {
                *o |= m;
            }
        }
        for ((o, cloud), land) in out.iter_mut().zip(&scene.cloud).zip(&self.land) {
            *o &= !cloud && !land;
        }
        out
    }

    /// Calibration areas straddling the first construct and destruct events.
    ///
    /// Each class gets `per_class` points: a quarter inside the event rectangle
    /// and the rest in a ring around it, so the difference samples span both the
    /// changed and the unchanged mode. The lower threshold sits just above the
    /// largest unchanged sample, so more unchanged samples mean fewer false alarms.
    pub fn change_calibration(&self, per_class: usize, seed: u64) -> CalibrationSet {
        let mut rng = SynthRng::new(seed);
        let mut pick =
            |kind| self.events_of(kind).next().map(|e| self.straddle(&e.rect, per_class, &mut rng)).unwrap_or_default();
        let constructed = pick(EventKind::Construct);
        let destructed = pick(EventKind::Destruct);
        CalibrationSet { constructed, destructed, ..Default::default() }
    }

    /// `per_class` visible raft pixels and `per_class` open-sea pixels of `scene`.
    pub fn pumice_calibration(&self, scene: &SceneTruth, per_class: usize, seed: u64) -> PumiceCalibration {
        let mut rng = SynthRng::new(seed);
        let raft = self.visible_pumice(scene);
        let any_raft = self.events_of(EventKind::PumiceRaft).fold(vec![false; raft.len()], |mut acc, e| {
            acc.iter_mut().zip(&e.mask).for_each(|(a, m)| *a |= m);
            acc
        });
        let sea: Vec<usize> = (0..raft.len()).filter(|&i| !self.land[i] && !any_raft[i] && !scene.cloud[i]).collect();
        let raft: Vec<usize> = (0..raft.len()).filter(|&i| raft[i]).collect();
        PumiceCalibration {
            pumice: self.centers(sample(&raft, per_class, &mut rng)),
            non_pumice: self.centers(sample(&sea, per_class, &mut rng)),
        }
    }

    fn straddle(&self, rect: &PixelRect, n: usize, rng: &mut SynthRng) -> Vec<(f64, f64)> {
        let g = &self.grid;
        let inside: Vec<usize> = (0..g.len())
            .filter(|&i| rect.contains((i % g.width as usize) as u32, (i / g.width as usize) as u32))
            .collect();
        let mut margin = 1;
        let ring = loop {
            let outer = PixelRect {
                col: rect.col.saturating_sub(margin),
                row: rect.row.saturating_sub(margin),
                width: (rect.col + rect.width + margin).min(g.width) - rect.col.saturating_sub(margin),
                height: (rect.row + rect.height + margin).min(g.height) - rect.row.saturating_sub(margin),
            };
            let ring: Vec<usize> = (0..g.len())
                .filter(|&i| {
                    let (c, r) = ((i % g.width as usize) as u32, (i / g.width as usize) as u32);
                    outer.contains(c, r) && !rect.contains(c, r)
                })
                .collect();
            if ring.len() >= n - n / 4 || margin > g.width.max(g.height) {
                break ring;
            }
            margin *= 2;
        };
        let mut picked = sample(&inside, n / 4, rng);
        picked.extend(sample(&ring, n - n / 4, rng));
        self.centers(picked)
    }

    fn centers(&self, idx: Vec<usize>) -> Vec<(f64, f64)> {
        let w = self.grid.width as usize;
        idx.into_iter().map(|i| self.grid.pixel_center((i % w) as u32, (i / w) as u32)).collect()
    }
}

/// Up to `n` distinct elements of `pool`, by partial Fisher–Yates.
fn sample(pool: &[usize], n: usize, rng: &mut SynthRng) -> Vec<usize> {
    let mut v = pool.to_vec();
    let n = n.min(v.len());
    for i in 0..n {
        let j = rng.range(i as u32, (v.len() - 1) as u32) as usize;
        v.swap(i, j);
    }
    v.truncate(n);
    v
}

fn rect_mask(rect: &PixelRect, grid: &GridSpec) -> Result<Vec<bool>, RasterError> {
    Ok(rasterize_polygon(&GeoPolygon::rect(&rect.bbox(grid)), grid)?.bits)
}

fn timestamp(date: NaiveDate) -> DateTime<Utc> {
    date.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

/// Random cloud rectangles covering `fraction` of the grid to within one
/// percentage point (above the target, never below).
fn place_clouds(grid: &GridSpec, fraction: f64, rng: &mut SynthRng) -> (Vec<PixelRect>, Vec<bool>) {
    let n = grid.len();
    let target = (fraction * n as f64).round() as usize;
    let slack = n / 100;
    let mut bits = vec![false; n];
    let mut rects = Vec::new();
    let mut covered = 0usize;
    let mut max_side = (grid.width.min(grid.height) / 4).max(1);
    while covered < target {
        let w = rng.range(1, max_side.min(grid.width));
        let h = rng.range(1, max_side.min(grid.height));
        let rect = PixelRect::new(rng.range(0, grid.width - w), rng.range(0, grid.height - h), w, h);
        let fresh = (rect.row..rect.row + h)
            .flat_map(|r| (rect.col..rect.col + w).map(move |c| grid.index(c, r)))
            .filter(|&i| !bits[i])
            .count();
        if fresh == 0 {
            continue;
        }
        if covered + fresh > target + slack {
            max_side = (max_side / 2).max(1);
            continue;
        }
        for r in rect.row..rect.row + h {
            for c in rect.col..rect.col + w {
                bits[grid.index(c, r)] = true;
            }
        }
        covered += fresh;
        rects.push(rect);
    }
    (rects, bits)
}

/// Writes a catalog for `config` into `out` (created if missing, must be empty)
/// along with `ground_truth.json`.
pub fn generate(config: &SynthConfig, out: impl AsRef<Path>) -> Result<(Catalog, GroundTruth), SynthError> {
    config.validate()?;
    let out = out.as_ref();
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| SynthError::Io { path, source }
    };
    if out.exists() && fs::read_dir(out).map_err(io(out))?.next().is_some() {
        return Err(SynthError::OutputNotEmpty(out.to_owned()));
    }
    let grid = config.grid;
    let n = grid.len();
    let mut rng = SynthRng::new(config.seed);
    let mut catalog = Catalog::create(out)?;

    let land = config.land.iter().try_fold(vec![false; n], |mut acc, r| {
        rect_mask(r, &grid).map(|m| {
            acc.iter_mut().zip(m).for_each(|(a, b)| *a |= b);
            acc
        })
    })?;
    let events = config
        .events
        .iter()
        .map(|e| {
            Ok(EventTruth {
                kind: e.kind,
                rect: e.rect,
                onset: e.onset,
                magnitude: e.magnitude,
                mask: rect_mask(&e.rect, &grid)?,
            })
        })
        .collect::<Result<Vec<_>, RasterError>>()?;
    if !config.land.is_empty() {
        let mask = Raster::from_bands(grid, [(LAND_BAND, Mask::new(grid, land.clone())?.to_f32())])?;
        catalog = catalog.with_land_mask(&mask)?;
    }

    let mut scenes = Vec::new();
    let store = |catalog: &mut Catalog, raster: Raster, sensor: Sensor, id: String, date| {
        let path = out.join(SCENES_DIR).join(format!("{id}.grsp"));
        container::write_container(&raster, &path)?;
        let req = IngestRequest { path, sensor, timestamp: timestamp(date), id: Some(id) };
        let (next, id) = catalog.ingest(&req)?;
        *catalog = next;
        Ok::<_, SynthError>(id)
    };

    if let Some(sar) = &config.sar {
        for date in sar.schedule.dates() {
            let mut delta = vec![0.0f64; n];
            for (ev, truth) in config.events.iter().zip(&events) {
                let signed = match ev.kind {
                    EventKind::Construct => ev.magnitude,
                    EventKind::Destruct => -ev.magnitude,
                    EventKind::PumiceRaft => continue,
                };
                if ev.active(date) {
                    for (d, &m) in delta.iter_mut().zip(&truth.mask) {
                        if m {
                            *d += signed;
                        }
                    }
                }
            }
            let values: Vec<f32> =
                delta.iter().map(|d| (sar.background_db + d + sar.speckle_sigma_db * rng.normal()) as f32).collect();
            let raster = Raster::from_bands(grid, [(SAR_BAND, values)])?;
            let id = format!("sar-{}", date.format("%Y%m%d"));
            let id = store(&mut catalog, raster, Sensor::Sar, id, date)?;
            scenes.push(SceneTruth {
                id,
                sensor: Sensor::Sar,
                timestamp: timestamp(date),
                cloud_rects: vec![],
                cloud: vec![false; n],
            });
        }
    }

    if let Some(opt) = &config.optical {
        for date in opt.schedule.dates() {
            let mut raft = vec![false; n];
            for (ev, truth) in config.events.iter().zip(&events) {
                if ev.kind == EventKind::PumiceRaft && ev.active(date) {
                    raft.iter_mut().zip(&truth.mask).for_each(|(a, b)| *a |= b);
                }
            }
            let mut bands: [Vec<f32>; 4] = Default::default();
            for i in 0..n {
                let profile = if land[i] {
                    opt.land
                } else if raft[i] {
                    opt.pumice
                } else {
                    opt.sea
                };
                for (b, base) in bands.iter_mut().zip(profile.bands()) {
                    b.push((base + opt.noise_sigma * rng.normal()).max(0.0) as f32);
                }
            }
            let (cloud_rects, cloud) = place_clouds(&grid, opt.cloud_fraction, &mut rng);
            for (b, c) in bands.iter_mut().zip(opt.cloud.bands()) {
                for (v, _) in b.iter_mut().zip(&cloud).filter(|(_, m)| **m) {
                    *v = c as f32;
                }
            }
            let mut raster_bands: Vec<Band> =
                OPTICAL_BANDS.iter().zip(bands).map(|(name, values)| Band { name: (*name).into(), values }).collect();
            raster_bands.push(Band { name: CLOUD_BAND.into(), values: Mask::new(grid, cloud.clone())?.to_f32() });
            let raster = Raster::new(grid, raster_bands, vec![true; n])?;
            let id = format!("opt-{}", date.format("%Y%m%d"));
            let id = store(&mut catalog, raster, Sensor::Optical, id, date)?;
            scenes.push(SceneTruth { id, sensor: Sensor::Optical, timestamp: timestamp(date), cloud_rects, cloud });
        }
    }

    let truth = GroundTruth { seed: config.seed, grid, land, events, scenes };
    let json = serde_json::to_vec(&truth).expect("ground truth serializes");
    let path = out.join(GROUND_TRUTH_FILE);
    fs::write(&path, json).map_err(io(&path))?;
    Ok((catalog, truth))
}
