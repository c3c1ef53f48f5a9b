use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{RoadEdge, RoadGraph, RoutingError};
use crate::ingest::{haversine_m, GeoPoint};
use crate::num::Scalar;
use crate::solar::TimeStamp;

/// `(1 − w)·len + w·len·(1 − ratio)`: distance blended with unshaded meters.
pub fn blend_cost<T: Scalar>(length_m: T, shade_ratio: T, w: T) -> T {
    (T::one() - w) * length_m + w * length_m * (T::one() - shade_ratio)
}

pub fn edge_cost(edge: &RoadEdge, w: f64) -> Result<f64, RoutingError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(RoutingError::InvalidWeight(w));
    }
    let ratio = edge.shade_ratio.ok_or(RoutingError::MissingShade(edge.id))?;
    Ok(blend_cost(edge.length_m, ratio, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteRequest {
    pub origin: GeoPoint,
    pub destination: GeoPoint,
    /// Shade preference in `[0, 1]`; 0 is pure distance.
    pub shade_weight: f64,
    pub time: Option<TimeStamp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteOptions {
    pub snap_tolerance_m: f64,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self { snap_tolerance_m: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub polyline: Vec<GeoPoint>,
    pub total_length_m: f64,
    /// Unshaded meters, `Σ len·(1 − ratio)`.
    pub total_exposure_m: f64,
    /// Length-weighted shade ratio of the route.
    pub mean_shade_ratio: f64,
    pub cost: f64,
    pub w: f64,
}

/// The preference-weighted route and the pure shortest route for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub shaded: RouteResult,
    pub shortest: RouteResult,
}

#[derive(PartialEq)]
struct Queued {
    cost: f64,
    node: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    // min-heap on (cost, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn snap(graph: &RoadGraph, p: GeoPoint, opts: &RouteOptions) -> Result<usize, RoutingError> {
    let mut best: Option<(f64, usize)> = None;
    for n in graph.nodes() {
        if graph.incident(n.id).is_empty() {
            continue;
        }
        let d = haversine_m(p, n.point);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, n.id));
        }
    }
    match best {
        None => Err(RoutingError::NoGraph),
        Some((d, id)) if d <= opts.snap_tolerance_m => Ok(id),
        Some((d, _)) => Err(RoutingError::Snap {
            distance_m: d,
            limit_m: opts.snap_tolerance_m,
        }),
    }
}

/// Dijkstra under [`edge_cost`] at weight `w`. Equal-cost ties go to the
/// smaller predecessor node, then the smaller edge id.
fn shortest_path(graph: &RoadGraph, from: usize, to: usize, w: f64) -> Result<RouteResult, RoutingError> {
    let n = graph.nodes().len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(Queued { cost: 0.0, node: from });

    while let Some(Queued { cost, node }) = heap.pop() {
        if settled[node] || cost > dist[node] {
            continue;
        }
        settled[node] = true;
        if node == to {
            break;
        }
        for &eid in graph.incident(node) {
            let e = &graph.edges()[eid];
            let next = e.other(node);
            if settled[next] {
                continue;
            }
            let nd = cost + edge_cost(e, w)?;
            let better = match nd.total_cmp(&dist[next]) {
                Ordering::Less => true,
                Ordering::Equal => pred[next].is_none_or(|(pn, pe)| (node, eid) < (pn, pe)),
                Ordering::Greater => false,
            };
            if better {
                let improved = nd < dist[next];
                dist[next] = nd;
                pred[next] = Some((node, eid));
                if improved {
                    heap.push(Queued { cost: nd, node: next });
                }
            }
        }
    }
    if !dist[to].is_finite() {
        return Err(RoutingError::NoRoute { from, to });
    }

    let mut nodes = vec![to];
    let mut edges = Vec::new();
    let mut cur = to;
    while let Some((p, e)) = pred[cur] {
        if cur == from {
            break;
        }
        nodes.push(p);
        edges.push(e);
        cur = p;
    }
    nodes.reverse();
    edges.reverse();
    assemble(graph, nodes, edges, w)
}

fn assemble(graph: &RoadGraph, nodes: Vec<usize>, edges: Vec<usize>, w: f64) -> Result<RouteResult, RoutingError> {
    let mut polyline = vec![graph.nodes()[nodes[0]].point];
    let (mut length, mut exposure, mut cost) = (0.0, 0.0, 0.0);
    for (i, &eid) in edges.iter().enumerate() {
        let e = &graph.edges()[eid];
        let ratio = e.shade_ratio.ok_or(RoutingError::MissingShade(eid))?;
        length += e.length_m;
        exposure += e.length_m * (1.0 - ratio);
        cost += edge_cost(e, w)?;
        let forward = e.u == nodes[i];
        let pts: Box<dyn Iterator<Item = &GeoPoint>> = if forward {
            Box::new(e.polyline.iter())
        } else {
            Box::new(e.polyline.iter().rev())
        };
        polyline.extend(pts.skip(1).copied());
    }
    let mean_shade_ratio = if length > 0.0 { (length - exposure) / length } else { 0.0 };
    Ok(RouteResult {
        nodes,
        edges,
        polyline,
        total_length_m: length,
        total_exposure_m: exposure.min(length),
        mean_shade_ratio: mean_shade_ratio.clamp(0.0, 1.0),
        cost,
        w,
    })
}

/// Plans the route at the request's shade weight along with the w = 0 shortest path.
pub fn plan_route(graph: &RoadGraph, req: &RouteRequest, opts: &RouteOptions) -> Result<RoutePlan, RoutingError> {
    let w = req.shade_weight;
    if !(0.0..=1.0).contains(&w) {
        return Err(RoutingError::InvalidWeight(w));
    }
    if graph.is_empty() {
        return Err(RoutingError::NoGraph);
    }
    if let Some(e) = graph.edges().iter().find(|e| e.shade_ratio.is_none()) {
        return Err(RoutingError::MissingShade(e.id));
    }
    let from = snap(graph, req.origin, opts)?;
    let to = snap(graph, req.destination, opts)?;
    let shaded = shortest_path(graph, from, to, w)?;
    let shortest = if w == 0.0 {
        shaded.clone()
    } else {
        shortest_path(graph, from, to, 0.0)?
    };
    Ok(RoutePlan { shaded, shortest })
}
