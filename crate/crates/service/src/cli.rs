use std::error::Error;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use shadeway_core::dataset::{
    build_dataset, load_scenes, BuildOptions, CannyParams, ContrastiveConfig, GridSpec, PromptChoice,
};
use shadeway_core::ingest::{GeoPoint, IngestConfig, TileBBox};
use shadeway_core::pipeline::{evaluate_dirs, load_graph, plan_on_shade, run_demo, DemoConfig};
use shadeway_core::routing::{route_geojson, RouteOptions, RouteRequest, DEFAULT_SAMPLE_STEP_M};
use shadeway_core::shadowcast::{read_raster, render_pair, write_raster, RasterGrid, RasterSidecar};
use shadeway_core::solar::{format_prompt, sun_position, PromptTemplate, SolarOptions};
use shadeway_core::{Scene, SimConfig, SunPosition, TimeStamp};

use crate::{router, AppState, DEFAULT_CACHE_SIZE};

type CliResult = Result<(), Box<dyn Error + Send + Sync>>;

#[derive(Debug, Parser)]
#[command(name = "shadeway", version, about = "Shade maps, shade datasets and shade-aware routes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse building and road GeoJSON into a scene file.
    Ingest(IngestArgs),
    /// Print the sun position and prompts for a place and local time.
    Sun(SunArgs),
    /// Render shaded, skeleton, ground-truth and edge rasters for one time.
    Cast(CastArgs),
    /// Render a dataset over scenes, dates and hours with a contrastive pair buffer.
    BuildDataset(DatasetArgs),
    /// Score predicted rasters against ground truth.
    Evaluate(EvaluateArgs),
    /// Plan the shaded and the shortest route over a shade raster.
    Route(RouteArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Run the bundled campus scene end to end.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub buildings: PathBuf,
    #[arg(long)]
    pub roads: Option<PathBuf>,
    /// Output directory; the scene is written as `<name>.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "scene")]
    pub name: String,
    #[arg(long, default_value_t = 3.0)]
    pub storey_height: f64,
    #[arg(long, default_value_t = 8.0)]
    pub default_height: f64,
}

#[derive(Debug, Args)]
pub struct SunArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lat: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lon: f64,
    /// YYYY-MM-DD
    #[arg(long)]
    pub date: String,
    /// HH[:MM[:SS]] local time
    #[arg(long)]
    pub time: String,
    /// Hours east of UTC; defaults to round(lon / 15).
    #[arg(long, allow_hyphen_values = true)]
    pub utc_offset: Option<f64>,
    /// Disable the equation-of-time correction.
    #[arg(long)]
    pub no_eot: bool,
}

#[derive(Debug, Args)]
pub struct CastArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub date: String,
    #[arg(long)]
    pub time: String,
    #[arg(long, allow_hyphen_values = true)]
    pub utc_offset: Option<f64>,
    /// Slippy tile `z/x/y`; without it the raster covers the scene bounds.
    #[arg(long)]
    pub tile: Option<String>,
    #[arg(long, default_value_t = 1024)]
    pub raster_px: u32,
    #[arg(long, default_value_t = 1.0)]
    pub meters_per_px: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Directory of scene files (`*.json`); file stems become location ids.
    #[arg(long)]
    pub scenes: PathBuf,
    /// Comma-separated YYYY-MM-DD dates.
    #[arg(long)]
    pub dates: String,
    /// Comma-separated local hours (`9`, `9:30`) or inclusive ranges (`8-17`).
    #[arg(long)]
    pub hours: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub h: u32,
    #[arg(long, default_value_t = 5)]
    pub k_plus: usize,
    #[arg(long, default_value_t = 5)]
    pub k_minus: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 13)]
    pub zoom: u8,
    #[arg(long, default_value_t = 1024)]
    pub raster_px: u32,
    /// Cover each scene at this resolution instead of using its tile.
    #[arg(long)]
    pub meters_per_px: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub utc_offset: Option<f64>,
    /// `cycle` or a single template: declination, angle, time_of_day.
    #[arg(long, default_value = "cycle")]
    pub template: String,
    #[arg(long, default_value_t = 50.0)]
    pub canny_low: f32,
    #[arg(long, default_value_t = 150.0)]
    pub canny_high: f32,
    #[arg(long, default_value_t = 1.4)]
    pub canny_sigma: f32,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub gt_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Masks are `gray > threshold`.
    #[arg(long, default_value_t = 127)]
    pub threshold: u8,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    /// Scene file or bare road graph JSON.
    #[arg(long)]
    pub graph: PathBuf,
    /// Ground-truth shade PNG with its sidecar next to it.
    #[arg(long)]
    pub shade: PathBuf,
    /// `lon,lat`
    #[arg(long, allow_hyphen_values = true)]
    pub from: String,
    #[arg(long, allow_hyphen_values = true)]
    pub to: String,
    #[arg(long, default_value_t = 0.5)]
    pub w: f64,
    /// `YYYY-MM-DDTHH:MM`; defaults to the raster's timestamp.
    #[arg(long)]
    pub time: Option<String>,
    #[arg(long, default_value_t = 100.0)]
    pub snap_m: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_STEP_M)]
    pub step_m: f64,
    /// Write GeoJSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value = "shadeway-data")]
    pub data_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CACHE_SIZE)]
    pub cache_size: usize,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub w: f64,
}

fn parse_point(s: &str) -> Result<GeoPoint, Box<dyn Error + Send + Sync>> {
    let (lon, lat) = s.split_once(',').ok_or_else(|| format!("expected lon,lat, got '{s}'"))?;
    Ok(GeoPoint::new(lon.trim().parse()?, lat.trim().parse()?)?)
}

/// Splits `2024-06-01T12:30` into date and clock parts.
fn parse_time(s: &str, utc_offset: f64) -> Result<TimeStamp, Box<dyn Error + Send + Sync>> {
    let (date, clock) = s.split_once('T').ok_or_else(|| format!("expected YYYY-MM-DDTHH:MM, got '{s}'"))?;
    Ok(TimeStamp::parse(date, clock, utc_offset)?)
}

pub fn parse_hours(s: &str) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
            out.extend((a..=b).map(f64::from));
        } else {
            out.push(TimeStamp::parse("2000-01-01", part, 0.0)?.local_hour);
        }
    }
    if out.is_empty() {
        return Err("no hours given".into());
    }
    Ok(out)
}

pub fn parse_dates(s: &str) -> Result<Vec<NaiveDate>, Box<dyn Error + Send + Sync>> {
    let dates = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| NaiveDate::parse_from_str(p, "%Y-%m-%d").map_err(|e| format!("date '{p}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if dates.is_empty() {
        return Err("no dates given".into());
    }
    Ok(dates)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn sun_json(sun: &SunPosition, t: &TimeStamp) -> serde_json::Value {
    let prompts: serde_json::Map<String, serde_json::Value> = PromptTemplate::ALL
        .iter()
        .map(|&p| (p.to_string(), json!(format_prompt(sun, t, p).text)))
        .collect();
    json!({
        "declination": sun.declination_deg,
        "elevation": sun.elevation_deg,
        "azimuth": sun.azimuth_deg,
        "hour_angle": sun.hour_angle_deg,
        "zenith": sun.zenith_deg(),
        "daytime": sun.is_daytime(),
        "prompts": prompts,
    })
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Sun(a) => {
            let offset = a.utc_offset.unwrap_or((a.lon / 15.0).round());
            let t = TimeStamp::parse(&a.date, &a.time, offset)?;
            let opts = SolarOptions {
                equation_of_time: !a.no_eot,
            };
            let sun: SunPosition = sun_position(a.lat, a.lon, &t, opts);
            println!("{}", serde_json::to_string_pretty(&sun_json(&sun, &t))?);
            Ok(())
        }
        Command::Cast(a) => cast(a),
        Command::BuildDataset(a) => dataset(a),
        Command::Evaluate(a) => {
            let report = evaluate_dirs(&a.pred_dir, &a.gt_dir, a.threshold)?;
            write_json(&a.out, &report)?;
            let g = &report.aggregate;
            println!(
                "{} records: ssim {:.4}±{:.4} mse {:.2}±{:.2} miou {:.4}±{:.4} b_iou {:.4}±{:.4}",
                g.count, g.ssim.mean, g.ssim.std, g.mse.mean, g.mse.std, g.miou.mean, g.miou.std, g.b_iou.mean, g.b_iou.std
            );
            if !report.missing.is_empty() {
                log::warn!("{} ground-truth files had no prediction", report.missing.len());
            }
            Ok(())
        }
        Command::Route(a) => route(a),
        Command::Serve(a) => serve(a),
        Command::Demo(a) => {
            let cfg = DemoConfig {
                w: a.w,
                ..Default::default()
            };
            let out = run_demo(&cfg)?;
            fs::create_dir_all(&a.out)?;
            write_raster(&a.out.join("shade.png"), &out.shade.gt, &out.shade.sidecar)?;
            fs::write(a.out.join("scene.json"), out.scene.to_json())?;
            write_json(&a.out.join("route.geojson"), &out.geojson)?;
            for r in [&out.plan.shortest, &out.plan.shaded] {
                println!(
                    "{:>8}: length {:.1} m, exposure {:.1} m, shade {:.0}%",
                    if std::ptr::eq(r, &out.plan.shaded) { "shaded" } else { "shortest" },
                    r.total_length_m,
                    r.total_exposure_m,
                    100.0 * r.mean_shade_ratio
                );
            }
            Ok(())
        }
    }
}

fn ingest(a: IngestArgs) -> CliResult {
    let cfg = IngestConfig {
        storey_height_m: a.storey_height,
        default_height_m: a.default_height,
        ..Default::default()
    };
    let buildings = fs::read(&a.buildings)?;
    let roads = a.roads.as_ref().map(fs::read).transpose()?;
    let scene = Scene::from_geojson(&buildings, roads.as_deref(), &cfg)?;
    fs::create_dir_all(&a.out)?;
    let path = a.out.join(format!("{}.json", a.name));
    fs::write(&path, scene.to_json())?;
    println!(
        "{}: {} buildings ({} skipped), {} road nodes, {} edges ({} segments dropped)",
        path.display(),
        scene.buildings.len(),
        scene.skipped_buildings,
        scene.roads.nodes().len(),
        scene.roads.edges().len(),
        scene.dropped_road_segments
    );
    Ok(())
}

fn cast(a: CastArgs) -> CliResult {
    let scene = Scene::from_json(&fs::read(&a.scene)?)?;
    let bounds = scene.bounds().ok_or("scene has no geometry")?;
    let sim = SimConfig {
        raster_px: a.raster_px,
        ..Default::default()
    };
    let grid = match &a.tile {
        Some(spec) => RasterGrid::for_tile(TileBBox::parse(spec)?, a.raster_px),
        None => RasterGrid::covering(bounds.padded(60.0), a.meters_per_px),
    };
    let t = TimeStamp::parse(&a.date, &a.time, a.utc_offset.unwrap_or_else(|| scene.nominal_utc_offset()))?;
    let c = bounds.center();
    let sun: SunPosition = sun_position(c.lat, c.lon, &t, SolarOptions::default());
    if !sun.is_daytime() {
        return Err(format!("sun below the horizon (elevation {:.2}°)", sun.elevation_deg).into());
    }
    let (shade, sk, gt) = render_pair(&scene.buildings, &sun, &grid, &sim)?;
    let edge = shadeway_core::dataset::canny_edges(&sk, &CannyParams::default());
    fs::create_dir_all(&a.out)?;
    let prompt = format_prompt(&sun, &t, PromptTemplate::TimeOfDay);
    for (name, raster) in [("x_shade", &shade), ("x_sk", &sk), ("x_gt", &gt), ("x_edge", &edge)] {
        let mut sc = RasterSidecar::for_raster(raster, sim.hash());
        sc.sun = Some(sun);
        sc.timestamp = Some(t);
        sc.prompt = Some(prompt.clone());
        write_raster(&a.out.join(format!("{name}.png")), raster, &sc)?;
    }
    println!("{}", serde_json::to_string_pretty(&sun_json(&sun, &t))?);
    Ok(())
}

fn dataset(a: DatasetArgs) -> CliResult {
    let prompt = match a.template.as_str() {
        "cycle" => PromptChoice::Cycle,
        other => PromptChoice::Fixed(other.parse()?),
    };
    let grid = match a.meters_per_px {
        Some(m) => GridSpec::Covering {
            meters_per_px: m,
            margin_m: 60.0,
        },
        None => GridSpec::Tile { zoom: a.zoom },
    };
    let opts = BuildOptions {
        sim: SimConfig {
            raster_px: a.raster_px,
            ..Default::default()
        },
        grid,
        canny: CannyParams {
            low: a.canny_low,
            high: a.canny_high,
            sigma: a.canny_sigma,
        },
        contrastive: ContrastiveConfig {
            h: a.h,
            k_plus: a.k_plus,
            k_minus: a.k_minus,
            seed: a.seed,
        },
        train_fraction: a.train_fraction,
        prompt,
        utc_offset: a.utc_offset,
        ..Default::default()
    };
    let locations = load_scenes(&a.scenes)?;
    let summary = build_dataset(&locations, &parse_dates(&a.dates)?, &parse_hours(&a.hours)?, &a.out, &opts)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn route(a: RouteArgs) -> CliResult {
    let graph = load_graph(&fs::read(&a.graph)?)?;
    let (gt, sidecar) = read_raster(&a.shade)?;
    let time = match (&a.time, sidecar.timestamp) {
        (Some(s), ts) => Some(parse_time(s, ts.map_or(0.0, |t| t.utc_offset_hours))?),
        (None, ts) => ts,
    };
    let req = RouteRequest {
        origin: parse_point(&a.from)?,
        destination: parse_point(&a.to)?,
        shade_weight: a.w,
        time,
    };
    let opts = RouteOptions {
        snap_tolerance_m: a.snap_m,
    };
    let plan = plan_on_shade(&graph, &gt, &req, &opts, a.step_m)?;
    let geojson = serde_json::to_string_pretty(&route_geojson(&plan, time.as_ref()))?;
    match a.out {
        Some(path) => fs::write(path, geojson)?,
        None => println!("{geojson}"),
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CliResult {
    let state = Arc::new(AppState::new(a.data_dir, a.cache_size)?);
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, router(state)).await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hour_lists_and_ranges() {
        assert_eq!(parse_hours("8-10, 12:30").unwrap(), vec![8.0, 9.0, 10.0, 12.5]);
        assert!(parse_hours("").is_err());
        assert!(parse_hours("25").is_err());
        assert_eq!(parse_dates("2024-06-01,2024-12-01").unwrap().len(), 2);
        assert!(parse_dates("2024-13-01").is_err());
    }

    #[test]
    fn points_and_times() {
        let p = parse_point("-111.93, 33.42").unwrap();
        assert_eq!((p.lon, p.lat), (-111.93, 33.42));
        assert!(parse_point("1").is_err());
        let t = parse_time("2024-06-01T12:30", -7.0).unwrap();
        assert_eq!(t.local_hour, 12.5);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
