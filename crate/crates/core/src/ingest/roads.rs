use std::collections::HashMap;

use log::warn;
use serde_json::Value;

use super::{features, haversine_m, parse_json, position, GeoPoint, IngestConfig, IngestError, LocalFrame};
use crate::routing::{RoadEdge, RoadGraph, RoadNode};

#[derive(Debug, Clone, Default)]
pub struct ParsedRoads {
    pub graph: RoadGraph,
    /// Segments dropped because both ends snapped to the same node.
    pub dropped_segments: usize,
}

/// Builds an undirected graph from LineString / MultiLineString features.
///
/// Every vertex becomes a node, vertices closer than `road_snap_m` are merged,
/// and each consecutive vertex pair becomes an edge.
pub fn parse_roads(bytes: &[u8], cfg: &IngestConfig) -> Result<ParsedRoads, IngestError> {
    let root = parse_json(bytes)?;
    let mut lines: Vec<Vec<GeoPoint>> = Vec::new();
    for feature in features(&root)? {
        let Some(geometry) = feature.get("geometry").filter(|g| !g.is_null()) else {
            continue;
        };
        let coords = geometry.get("coordinates");
        match geometry.get("type").and_then(Value::as_str) {
            Some("LineString") => lines.push(line(coords)?),
            Some("MultiLineString") => {
                for part in coords.and_then(Value::as_array).into_iter().flatten() {
                    lines.push(line(Some(part))?);
                }
            }
            _ => {}
        }
    }

    let Some(origin) = lines.iter().flatten().next().copied() else {
        return Ok(ParsedRoads::default());
    };
    let mut snapper = Snapper::new(LocalFrame::new(origin), cfg.road_snap_m);
    let mut edges = Vec::new();
    let mut dropped = 0;
    for line in &lines {
        let ids: Vec<usize> = line.iter().map(|&p| snapper.node(p)).collect();
        for w in ids.windows(2) {
            let (u, v) = (w[0], w[1]);
            let (pu, pv) = (snapper.nodes[u].point, snapper.nodes[v].point);
            let length_m = haversine_m(pu, pv);
            if u == v || length_m <= 0.0 {
                warn!("dropping zero-length road segment at node {u}");
                dropped += 1;
                continue;
            }
            edges.push(RoadEdge {
                id: edges.len(),
                u,
                v,
                polyline: vec![pu, pv],
                length_m,
                shade_ratio: None,
            });
        }
    }
    let graph = RoadGraph::new(snapper.nodes, edges).map_err(|e| IngestError::Schema(e.to_string()))?;
    Ok(ParsedRoads {
        graph,
        dropped_segments: dropped,
    })
}

fn line(coords: Option<&Value>) -> Result<Vec<GeoPoint>, IngestError> {
    coords
        .and_then(Value::as_array)
        .ok_or_else(|| IngestError::Schema("line without coordinates".into()))?
        .iter()
        .map(position)
        .collect()
}

/// Merges points within `tol` meters using a uniform grid of `tol`-sized cells.
struct Snapper {
    frame: LocalFrame,
    tol: f64,
    nodes: Vec<RoadNode>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl Snapper {
    fn new(frame: LocalFrame, tol: f64) -> Self {
        Self {
            frame,
            tol: tol.max(1e-9),
            nodes: Vec::new(),
            cells: HashMap::new(),
        }
    }

    fn node(&mut self, p: GeoPoint) -> usize {
        let (x, y) = self.frame.to_local(p);
        let (cx, cy) = ((x / self.tol).floor() as i64, (y / self.tol).floor() as i64);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &id in self.cells.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                    let (nx, ny) = self.frame.to_local(self.nodes[id].point);
                    let d = (nx - x).hypot(ny - y);
                    if d <= self.tol && best.is_none_or(|(bd, bid)| d < bd || (d == bd && id < bid)) {
                        best = Some((d, id));
                    }
                }
            }
        }
        if let Some((_, id)) = best {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(RoadNode { id, point: p });
        self.cells.entry((cx, cy)).or_default().push(id);
        id
    }
}
