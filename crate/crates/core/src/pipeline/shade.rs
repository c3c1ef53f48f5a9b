use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::ingest::{IngestError, Scene};
use crate::routing::{overlay_shade, plan_route, RoadGraph, RouteOptions, RoutePlan, RouteRequest, RoutingError};
use crate::shadowcast::{render_pair, RasterGrid, RasterSidecar, ShadeRaster, ShadowError, SimConfig};
use crate::solar::{format_prompt, sun_position, PromptTemplate, SolarOptions, TimeStamp};

/// Raster placement and physics for on-demand shade maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadeSettings {
    pub sim: SimConfig,
    pub solar: SolarOptions,
    pub meters_per_px: f64,
    /// Border added around the scene bounds so shadows are not clipped.
    pub margin_m: f64,
    pub prompt: PromptTemplate,
}

impl Default for ShadeSettings {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            solar: SolarOptions::default(),
            meters_per_px: 1.0,
            margin_m: 60.0,
            prompt: PromptTemplate::TimeOfDay,
        }
    }
}

impl ShadeSettings {
    pub fn grid_for(&self, scene: &Scene) -> Result<RasterGrid, PipelineError> {
        let bounds = scene
            .bounds()
            .ok_or_else(|| PipelineError::Invalid("scene has no geometry".into()))?;
        if !(self.meters_per_px > 0.0) {
            return Err(PipelineError::Invalid(format!("resolution {} m/px", self.meters_per_px)));
        }
        Ok(RasterGrid::covering(bounds.padded(self.margin_m), self.meters_per_px))
    }
}

/// Ground-truth shade map with its sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadeProduct {
    pub gt: ShadeRaster,
    pub sidecar: RasterSidecar,
}

/// Renders the ground-truth shade of `scene` at local time `t`, with the sun
/// computed at `grid`'s center. Fails with `NightTime` when the sun is down.
pub fn compute_shade(
    scene: &Scene,
    t: &TimeStamp,
    grid: &RasterGrid,
    settings: &ShadeSettings,
) -> Result<ShadeProduct, PipelineError> {
    let c = grid.bounds.center();
    let sun = sun_position(c.lat, c.lon, t, settings.solar);
    if !sun.is_daytime() {
        return Err(ShadowError::NightTime {
            elevation_deg: sun.elevation_deg,
        }
        .into());
    }
    let (_, _, gt) = render_pair(&scene.buildings, &sun, grid, &settings.sim)?;
    let mut sidecar = RasterSidecar::for_raster(&gt, settings.sim.hash());
    sidecar.sun = Some(sun);
    sidecar.timestamp = Some(*t);
    sidecar.prompt = Some(format_prompt(&sun, t, settings.prompt));
    Ok(ShadeProduct { gt, sidecar })
}

/// Accepts either an ingested scene or a bare road graph.
pub fn load_graph(bytes: &[u8]) -> Result<RoadGraph, PipelineError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| IngestError::Json {
        offset: 0,
        message: e.to_string(),
    })?;
    if value.get("roads").is_some() {
        return Ok(Scene::from_json(bytes)?.roads);
    }
    serde_json::from_value(value).map_err(|e| PipelineError::Invalid(format!("not a scene or road graph: {e}")))
}

/// Overlays `gt` on the graph and plans both routes.
pub fn plan_on_shade(
    graph: &RoadGraph,
    gt: &ShadeRaster,
    req: &RouteRequest,
    opts: &RouteOptions,
    sample_step_m: f64,
) -> Result<RoutePlan, PipelineError> {
    if graph.is_empty() {
        return Err(RoutingError::NoGraph.into());
    }
    let shaded = overlay_shade(graph, gt, sample_step_m)?;
    Ok(plan_route(&shaded, req, opts)?)
}
