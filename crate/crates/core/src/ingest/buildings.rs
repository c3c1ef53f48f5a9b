use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{features, parse_json, position, GeoPoint, IngestConfig, IngestError};

/// A flat-roofed building: outer ring (implicitly closed, first vertex not
/// repeated) extruded to `height_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingFootprint {
    pub id: String,
    pub ring: Vec<GeoPoint>,
    pub height_m: f64,
    #[serde(default)]
    pub source_tags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedBuildings {
    pub footprints: Vec<BuildingFootprint>,
    /// Polygons dropped for having fewer than 3 distinct vertices or a
    /// self-intersecting ring.
    pub skipped: usize,
}

const KEPT_TAGS: &[&str] = &[
    "building",
    "height",
    "building:levels",
    "roof:shape",
    "addr:street",
    "addr:housenumber",
    "name",
];

pub fn parse_buildings(bytes: &[u8], cfg: &IngestConfig) -> Result<ParsedBuildings, IngestError> {
    let root = parse_json(bytes)?;
    let mut out = ParsedBuildings::default();
    for (index, feature) in features(&root)?.iter().enumerate() {
        let Some(geometry) = feature.get("geometry").filter(|g| !g.is_null()) else {
            continue;
        };
        let props = feature.get("properties").and_then(Value::as_object);
        let base_id = feature_id(feature, index);
        let outer_rings: Vec<&Value> = match geometry.get("type").and_then(Value::as_str) {
            Some("Polygon") => geometry
                .get("coordinates")
                .and_then(Value::as_array)
                .and_then(|rings| rings.first())
                .into_iter()
                .collect(),
            Some("MultiPolygon") => geometry
                .get("coordinates")
                .and_then(Value::as_array)
                .map(|polys| polys.iter().filter_map(|p| p.as_array()?.first()).collect())
                .unwrap_or_default(),
            _ => continue,
        };
        let height_m = resolve_height(props, cfg);
        let source_tags: BTreeMap<String, String> = props
            .map(|p| {
                p.iter()
                    .filter(|(k, _)| KEPT_TAGS.contains(&k.as_str()))
                    .map(|(k, v)| (k.clone(), tag_string(v)))
                    .collect()
            })
            .unwrap_or_default();
        let multi = outer_rings.len() > 1;
        for (part, ring) in outer_rings.into_iter().enumerate() {
            let coords = ring
                .as_array()
                .ok_or_else(|| IngestError::Schema(format!("feature {base_id}: ring is not an array")))?;
            let points = coords.iter().map(position).collect::<Result<Vec<_>, _>>()?;
            let Some(ring) = clean_ring(points) else {
                warn!("skipping building {base_id}: degenerate or self-intersecting ring");
                out.skipped += 1;
                continue;
            };
            out.footprints.push(BuildingFootprint {
                id: if multi { format!("{base_id}#{part}") } else { base_id.clone() },
                ring,
                height_m,
                source_tags: source_tags.clone(),
            });
        }
    }
    Ok(out)
}

fn feature_id(feature: &Value, index: usize) -> String {
    let from = |v: Option<&Value>| match v {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Number(n)) => Some(n.to_string()),
        _ => None,
    };
    from(feature.get("id"))
        .or_else(|| from(feature.pointer("/properties/@id")))
        .or_else(|| from(feature.pointer("/properties/id")))
        .unwrap_or_else(|| format!("building/{index}"))
}

fn tag_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn resolve_height(props: Option<&serde_json::Map<String, Value>>, cfg: &IngestConfig) -> f64 {
    let get = |k: &str| props.and_then(|p| p.get(k));
    if let Some(h) = get("height").and_then(parse_length_m).filter(|h| *h > 0.0) {
        return h;
    }
    if let Some(levels) = get("building:levels").and_then(parse_number).filter(|l| *l > 0.0) {
        return levels * cfg.storey_height_m;
    }
    cfg.default_height_m
}

fn parse_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
    .filter(|x: &f64| x.is_finite())
}

/// Parses OSM-style lengths: `15`, `15 m`, `15m`, `12.5 metres`, `40 ft`, `40'`.
fn parse_length_m(v: &Value) -> Option<f64> {
    let s = match v {
        Value::String(s) => s.trim().to_ascii_lowercase(),
        other => return parse_number(other),
    };
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+'))
        .unwrap_or(s.len());
    let value: f64 = s[..split].trim().parse().ok()?;
    let factor = match s[split..].trim() {
        "" | "m" | "meter" | "meters" | "metre" | "metres" => 1.0,
        "ft" | "feet" | "'" => 0.3048,
        _ => return None,
    };
    Some(value * factor).filter(|x| x.is_finite())
}

/// Drops the closing vertex and consecutive duplicates; `None` if fewer than
/// three distinct vertices remain or the ring self-intersects.
fn clean_ring(points: Vec<GeoPoint>) -> Option<Vec<GeoPoint>> {
    let mut ring: Vec<GeoPoint> = Vec::with_capacity(points.len());
    for p in points {
        if ring.last() != Some(&p) {
            ring.push(p);
        }
    }
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 || !is_simple(&ring) {
        return None;
    }
    Some(ring)
}

fn cross(o: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon)
}

fn segments_intersect(p1: GeoPoint, p2: GeoPoint, q1: GeoPoint, q2: GeoPoint) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: GeoPoint, b: GeoPoint, p: GeoPoint, d: f64| {
        d == 0.0
            && p.lon >= a.lon.min(b.lon)
            && p.lon <= a.lon.max(b.lon)
            && p.lat >= a.lat.min(b.lat)
            && p.lat <= a.lat.max(b.lat)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn is_simple(ring: &[GeoPoint]) -> bool {
    let n = ring.len();
    // collinear zero-area rings count as degenerate
    let area2: f64 = (0..n).map(|i| cross(GeoPoint { lon: 0.0, lat: 0.0 }, ring[i], ring[(i + 1) % n])).sum();
    if area2 == 0.0 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}
