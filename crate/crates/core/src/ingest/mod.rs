//! GeoJSON ingestion of building footprints and road networks, plus the
//! coordinate transforms the rest of the pipeline works in.

mod buildings;
mod coords;
mod roads;
mod scene;

pub use buildings::{parse_buildings, BuildingFootprint, ParsedBuildings};
pub use coords::{
    haversine_m, tile_bounds, tile_for, GeoBounds, GeoPoint, LocalFrame, TileBBox, DEFAULT_TILE_ZOOM,
    EARTH_RADIUS_M, MAX_MERCATOR_LAT, METERS_PER_DEG_LAT,
};
pub use roads::{parse_roads, ParsedRoads};
pub use scene::{Scene, SCENE_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("invalid GeoJSON: {0}")]
    Schema(String),
    #[error("coordinate out of range: lon={lon}, lat={lat}")]
    CoordinateRange { lon: f64, lat: f64 },
    #[error("latitude {0} outside the web-mercator range")]
    MercatorRange(f64),
    #[error("zoom {0} outside [0, 22]")]
    Zoom(u8),
    #[error("tile {x}/{y} does not exist at zoom {zoom}")]
    TileIndex { zoom: u8, x: u32, y: u32 },
    #[error("tile spec '{0}' is not z/x/y")]
    TileSpec(String),
    #[error("unsupported scene schema version {0}")]
    SchemaVersion(u32),
}

/// Fallback rules used when footprints lack explicit heights, and road snapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub storey_height_m: f64,
    pub default_height_m: f64,
    pub road_snap_m: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            storey_height_m: 3.0,
            default_height_m: 8.0,
            road_snap_m: 0.5,
        }
    }
}

/// Parses a byte stream as JSON, reporting failures with a byte offset.
pub fn parse_json(bytes: &[u8]) -> Result<Value, IngestError> {
    serde_json::from_slice(bytes).map_err(|e| IngestError::Json {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut offset = 0;
    for _ in 1..line {
        match bytes[offset..].iter().position(|&b| b == b'\n') {
            Some(p) => offset += p + 1,
            None => return bytes.len(),
        }
    }
    (offset + column.saturating_sub(1)).min(bytes.len())
}

/// The `features` array of a FeatureCollection.
pub(crate) fn features(root: &Value) -> Result<&[Value], IngestError> {
    match root.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {}
        other => {
            return Err(IngestError::Schema(format!(
                "expected a FeatureCollection, found {:?}",
                other.unwrap_or("no type")
            )))
        }
    }
    root.get("features")
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .ok_or_else(|| IngestError::Schema("FeatureCollection without a features array".into()))
}

pub(crate) fn position(v: &Value) -> Result<GeoPoint, IngestError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() >= 2)
        .ok_or_else(|| IngestError::Schema(format!("bad position {v}")))?;
    let lon = arr[0].as_f64().ok_or_else(|| IngestError::Schema(format!("bad position {v}")))?;
    let lat = arr[1].as_f64().ok_or_else(|| IngestError::Schema(format!("bad position {v}")))?;
    GeoPoint::new(lon, lat)
}
