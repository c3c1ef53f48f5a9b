use serde_json::Value;

use super::{compute_shade, plan_on_shade, PipelineError, ShadeProduct, ShadeSettings};
use crate::ingest::{GeoPoint, IngestConfig, Scene};
use crate::routing::{route_geojson, RouteOptions, RoutePlan, RouteRequest, DEFAULT_SAMPLE_STEP_M};
use crate::solar::TimeStamp;

/// Synthetic campus near Tempe, AZ: an open east-west mall and a parallel
/// walk lined on its south side by tall halls.
pub const CAMPUS_BUILDINGS: &[u8] = include_bytes!("../../data/campus_buildings.geojson");
pub const CAMPUS_ROADS: &[u8] = include_bytes!("../../data/campus_roads.geojson");

pub fn campus_scene() -> Result<Scene, PipelineError> {
    Ok(Scene::from_geojson(CAMPUS_BUILDINGS, Some(CAMPUS_ROADS), &IngestConfig::default())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoConfig {
    pub time: TimeStamp,
    pub origin: GeoPoint,
    pub destination: GeoPoint,
    pub w: f64,
    pub settings: ShadeSettings,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            time: TimeStamp::new(2024, 12, 1, 12.0, -7.0).expect("valid date"),
            origin: GeoPoint {
                lon: -111.9321525,
                lat: 33.42,
            },
            destination: GeoPoint {
                lon: -111.9278475,
                lat: 33.42,
            },
            w: 0.5,
            settings: ShadeSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoOutput {
    pub scene: Scene,
    pub shade: ShadeProduct,
    pub plan: RoutePlan,
    pub geojson: Value,
}

/// Ingests the bundled campus, renders its shade and plans both routes.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutput, PipelineError> {
    let scene = campus_scene()?;
    let grid = cfg.settings.grid_for(&scene)?;
    let shade = compute_shade(&scene, &cfg.time, &grid, &cfg.settings)?;
    let req = RouteRequest {
        origin: cfg.origin,
        destination: cfg.destination,
        shade_weight: cfg.w,
        time: Some(cfg.time),
    };
    let plan = plan_on_shade(&scene.roads, &shade.gt, &req, &RouteOptions::default(), DEFAULT_SAMPLE_STEP_M)?;
    let geojson = route_geojson(&plan, Some(&cfg.time));
    Ok(DemoOutput {
        scene,
        shade,
        plan,
        geojson,
    })
}
