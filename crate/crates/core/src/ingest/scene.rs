use serde::{Deserialize, Serialize};

use super::{parse_buildings, parse_roads, BuildingFootprint, GeoBounds, IngestConfig, IngestError};
use crate::routing::RoadGraph;

pub const SCENE_SCHEMA_VERSION: u32 = 1;

/// Ingested buildings and roads, persisted as JSON by the `ingest` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub schema_version: u32,
    pub buildings: Vec<BuildingFootprint>,
    pub roads: RoadGraph,
    #[serde(default)]
    pub skipped_buildings: usize,
    #[serde(default)]
    pub dropped_road_segments: usize,
}

impl Scene {
    pub fn from_geojson(buildings: &[u8], roads: Option<&[u8]>, cfg: &IngestConfig) -> Result<Self, IngestError> {
        let b = parse_buildings(buildings, cfg)?;
        let r = match roads {
            Some(bytes) => parse_roads(bytes, cfg)?,
            None => Default::default(),
        };
        Ok(Self {
            schema_version: SCENE_SCHEMA_VERSION,
            buildings: b.footprints,
            roads: r.graph,
            skipped_buildings: b.skipped,
            dropped_road_segments: r.dropped_segments,
        })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, IngestError> {
        let scene: Scene = serde_json::from_slice(bytes).map_err(|e| IngestError::Json {
            offset: 0,
            message: e.to_string(),
        })?;
        if scene.schema_version != SCENE_SCHEMA_VERSION {
            return Err(IngestError::SchemaVersion(scene.schema_version));
        }
        Ok(scene)
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("scene serializes")
    }

    /// Extent of all building vertices and road nodes.
    pub fn bounds(&self) -> Option<GeoBounds> {
        GeoBounds::covering(
            self.buildings
                .iter()
                .flat_map(|b| b.ring.iter().copied())
                .chain(self.roads.nodes().iter().map(|n| n.point)),
        )
    }

    /// Civil UTC offset guessed from the scene's central meridian.
    pub fn nominal_utc_offset(&self) -> f64 {
        self.bounds().map_or(0.0, |b| (b.center().lon / 15.0).round())
    }
}
