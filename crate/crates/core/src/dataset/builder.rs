use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    build_conditioning, build_pair_buffer, canny_edges, split_dataset, CannyParams, ContrastiveConfig, ContrastivePair,
    DatasetError, DatasetRecord, Split,
};
use crate::ingest::{tile_for, Scene};
use crate::shadowcast::{
    read_raster, render, render_pair, write_raster, RasterGrid, RasterKind, RasterSidecar, ShadeRaster, SimConfig,
};
use crate::solar::{format_prompt, sun_position, PromptTemplate, SolarOptions, SunPosition, TimeStamp};

pub const MANIFEST_FILE: &str = "dataset.jsonl";
pub const PAIRS_FILE: &str = "pairs.jsonl";

/// How the raster for a location is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// The slippy-map tile containing the scene center, `raster_px` on a side.
    Tile { zoom: u8 },
    /// The scene bounds plus a margin at a fixed ground resolution.
    Covering { meters_per_px: f64, margin_m: f64 },
}

impl GridSpec {
    pub fn grid_for(&self, scene: &Scene, cfg: &SimConfig) -> Result<RasterGrid, DatasetError> {
        let bounds = scene
            .bounds()
            .ok_or_else(|| DatasetError::Config("scene has no geometry".into()))?;
        match *self {
            GridSpec::Tile { zoom } => Ok(RasterGrid::for_tile(tile_for(bounds.center(), zoom)?, cfg.raster_px)),
            GridSpec::Covering { meters_per_px, margin_m } => {
                if !(meters_per_px > 0.0) {
                    return Err(DatasetError::Config(format!("resolution {meters_per_px} m/px")));
                }
                Ok(RasterGrid::covering(bounds.padded(margin_m), meters_per_px))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptChoice {
    /// Rotate through the templates by record index.
    Cycle,
    Fixed(PromptTemplate),
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub sim: SimConfig,
    pub grid: GridSpec,
    pub canny: CannyParams,
    pub contrastive: ContrastiveConfig,
    pub train_fraction: f64,
    pub prompt: PromptChoice,
    /// Overrides the per-scene offset guessed from longitude.
    pub utc_offset: Option<f64>,
    pub solar: SolarOptions,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            grid: GridSpec::Tile { zoom: 13 },
            canny: CannyParams::default(),
            contrastive: ContrastiveConfig::default(),
            train_fraction: super::DEFAULT_TRAIN_FRACTION,
            prompt: PromptChoice::Cycle,
            utc_offset: None,
            solar: SolarOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub records: usize,
    pub skipped_night: usize,
    pub train: usize,
    pub test: usize,
    pub positive_pairs: usize,
    pub negative_pairs: usize,
}

/// A scene and the id it is known by in the manifest.
#[derive(Debug, Clone)]
pub struct Location {
    pub id: String,
    pub scene: Scene,
}

/// Loads every `*.json` scene in `dir`, sorted by file name; the stem is the location id.
pub fn load_scenes(dir: &Path) -> Result<Vec<Location>, DatasetError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let scene = Scene::from_json(&fs::read(&p)?)?;
            Ok(Location { id, scene })
        })
        .collect()
}

struct Job<'a> {
    location: &'a Location,
    grid: RasterGrid,
    record: DatasetRecord,
}

fn rel(parts: &[&str]) -> String {
    parts.join("/")
}

/// Renders every (location, date, hour) snapshot with the sun above the
/// horizon, writes rasters and sidecars under `out`, splits by location and
/// writes the manifest and the pair buffer built over the train split.
pub fn build_dataset(
    locations: &[Location],
    dates: &[NaiveDate],
    hours: &[f64],
    out: &Path,
    opts: &BuildOptions,
) -> Result<BuildSummary, DatasetError> {
    opts.sim.validate()?;
    opts.contrastive.validate()?;
    if opts.canny.low >= opts.canny.high {
        return Err(DatasetError::Config("canny low threshold must be below high".into()));
    }
    let hash = opts.sim.hash();

    let mut jobs = Vec::new();
    let mut skipped_night = 0;
    for loc in locations {
        let grid = opts.grid.grid_for(&loc.scene, &opts.sim)?;
        let center = loc.scene.bounds().expect("grid_for checked geometry").center();
        let offset = opts.utc_offset.unwrap_or_else(|| loc.scene.nominal_utc_offset());
        for date in dates {
            for &hour in hours {
                let t = TimeStamp::new(date.year(), date.month(), date.day(), hour, offset)?;
                let sun: SunPosition<f64> = sun_position(center.lat, center.lon, &t, opts.solar);
                if !sun.is_daytime() {
                    log::info!("{} {date} {hour}h: sun below horizon, skipped", loc.id);
                    skipped_night += 1;
                    continue;
                }
                let template = match opts.prompt {
                    PromptChoice::Cycle => PromptTemplate::ALL[jobs.len() % PromptTemplate::ALL.len()],
                    PromptChoice::Fixed(t) => t,
                };
                let minutes = (hour * 60.0).round() as u32;
                let record_id = format!(
                    "{}_{:04}{:02}{:02}_{:02}{:02}",
                    loc.id,
                    t.year,
                    t.month,
                    t.day,
                    minutes / 60,
                    minutes % 60
                );
                let record = DatasetRecord {
                    x_shade_path: rel(&["records", &record_id, "x_shade.png"]),
                    x_sk_path: rel(&["locations", &loc.id, "x_sk.png"]),
                    x_gt_path: rel(&["records", &record_id, "x_gt.png"]),
                    x_sat_path: None,
                    prompt: format_prompt(&sun, &t, template),
                    theta_sun: sun,
                    t_day: t,
                    split: None,
                    record_id,
                    location_id: loc.id.clone(),
                };
                jobs.push(Job {
                    location: loc,
                    grid,
                    record,
                });
            }
        }
    }
    if jobs.is_empty() {
        return Err(DatasetError::Empty);
    }

    // Skeleton, edges and conditioning depend only on the location.
    locations.par_iter().try_for_each(|loc| -> Result<(), DatasetError> {
        let grid = opts.grid.grid_for(&loc.scene, &opts.sim)?;
        let dir = out.join("locations").join(&loc.id);
        fs::create_dir_all(&dir)?;
        let sk = render(&loc.scene.buildings, None, &grid, &opts.sim, RasterKind::Skeleton)?;
        let edge = canny_edges(&sk, &opts.canny);
        let cond = build_conditioning(&sk, &edge)?;
        write_raster(&dir.join("x_sk.png"), &sk, &RasterSidecar::for_raster(&sk, hash.clone()))?;
        write_raster(&dir.join("x_edge.png"), &edge, &RasterSidecar::for_raster(&edge, hash.clone()))?;
        fs::write(dir.join("x_cond.png"), cond.to_png())?;
        Ok(())
    })?;

    jobs.par_iter().try_for_each(|job| -> Result<(), DatasetError> {
        let r = &job.record;
        let (shade, _, gt) = render_pair(&job.location.scene.buildings, &r.theta_sun, &job.grid, &opts.sim)?;
        fs::create_dir_all(out.join("records").join(&r.record_id))?;
        for (path, raster) in [(&r.x_shade_path, &shade), (&r.x_gt_path, &gt)] {
            let mut sc = RasterSidecar::for_raster(raster, hash.clone());
            sc.sun = Some(r.theta_sun);
            sc.timestamp = Some(r.t_day);
            sc.prompt = Some(r.prompt.clone());
            write_raster(&out.join(path), raster, &sc)?;
        }
        Ok(())
    })?;

    let records = split_dataset(
        jobs.into_iter().map(|j| j.record).collect(),
        opts.train_fraction,
        opts.contrastive.seed,
    )?;
    let train: Vec<DatasetRecord> = records
        .iter()
        .filter(|r| r.split == Some(Split::Train))
        .cloned()
        .collect();
    let pairs = build_pair_buffer(&train, &opts.contrastive)?;

    write_jsonl(&out.join(MANIFEST_FILE), &records)?;
    write_jsonl(&out.join(PAIRS_FILE), &pairs)?;

    let positive_pairs = pairs.iter().filter(|p| p.label == 1).count();
    Ok(BuildSummary {
        records: records.len(),
        skipped_night,
        train: train.len(),
        test: records.len() - train.len(),
        positive_pairs,
        negative_pairs: pairs.len() - positive_pairs,
    })
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DatasetError> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, DatasetError> {
    fs::read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| DatasetError::Manifest(format!("{}:{}: {e}", path.display(), n + 1)))
        })
        .collect()
}

pub fn load_manifest(dir: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    read_jsonl(&dir.join(MANIFEST_FILE))
}

pub fn load_pairs(dir: &Path) -> Result<Vec<ContrastivePair>, DatasetError> {
    read_jsonl(&dir.join(PAIRS_FILE))
}

fn sun_matches(a: &SunPosition<f64>, b: &SunPosition<f64>) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9;
    close(a.declination_deg, b.declination_deg)
        && close(a.elevation_deg, b.elevation_deg)
        && close(a.azimuth_deg, b.azimuth_deg)
        && close(a.hour_angle_deg, b.hour_angle_deg)
}

/// Checks that every record's files exist, share one grid, and that the
/// shaded snapshot's sidecar reproduces the record's sun and prompt.
/// Returns the number of records checked.
pub fn verify_manifest(dir: &Path) -> Result<usize, DatasetError> {
    let records = load_manifest(dir)?;
    let fail = |r: &DatasetRecord, why: String| DatasetError::Manifest(format!("{}: {why}", r.record_id));
    for r in &records {
        if r.split.is_none() {
            return Err(fail(r, "no split".into()));
        }
        let mut grids = Vec::new();
        let mut shade_sidecar = None;
        for path in [&r.x_shade_path, &r.x_sk_path, &r.x_gt_path] {
            let full = dir.join(path);
            if !full.is_file() {
                return Err(fail(r, format!("missing {path}")));
            }
            let (raster, sc): (ShadeRaster, RasterSidecar) = read_raster(&full)?;
            grids.push(raster.grid);
            if raster.kind == RasterKind::ShadedSnapshot {
                shade_sidecar = Some(sc);
            }
        }
        if let Some(sat) = &r.x_sat_path {
            if !dir.join(sat).is_file() {
                return Err(fail(r, format!("missing {sat}")));
            }
        }
        if grids.windows(2).any(|w| w[0] != w[1]) {
            return Err(fail(r, "rasters do not share a grid".into()));
        }
        let sc = shade_sidecar.ok_or_else(|| fail(r, "x_shade is not a shaded snapshot".into()))?;
        let (sun, t) = match (sc.sun, sc.timestamp) {
            (Some(s), Some(t)) => (s, t),
            _ => return Err(fail(r, "sidecar lacks sun or timestamp".into())),
        };
        if !sun_matches(&sun, &r.theta_sun) {
            return Err(fail(r, "sidecar sun differs from record".into()));
        }
        if format_prompt(&sun, &t, r.prompt.template_id).text != r.prompt.text {
            return Err(fail(r, "prompt does not match sidecar sun".into()));
        }
    }
    Ok(records.len())
}
