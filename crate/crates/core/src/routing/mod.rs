//! Shade overlay on the road graph and shade-aware shortest paths.

mod geojson;
mod graph;
mod overlay;
mod plan;

pub use geojson::route_geojson;
pub use graph::{RoadEdge, RoadGraph, RoadNode};
pub use overlay::{edge_shade_ratio, overlay_shade, DEFAULT_SAMPLE_STEP_M};
pub use plan::{blend_cost, edge_cost, plan_route, RouteOptions, RoutePlan, RouteRequest, RouteResult};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("invalid road graph: {0}")]
    InvalidGraph(String),
    #[error("the scene has no road graph")]
    NoGraph,
    #[error("edge {0} has no shade ratio; overlay a shade raster first")]
    MissingShade(usize),
    #[error("shade weight {0} outside [0, 1]")]
    InvalidWeight(f64),
    #[error("no route between nodes {from} and {to}")]
    NoRoute { from: usize, to: usize },
    #[error("nearest road node is {distance_m:.1} m away (limit {limit_m} m)")]
    Snap { distance_m: f64, limit_m: f64 },
}
