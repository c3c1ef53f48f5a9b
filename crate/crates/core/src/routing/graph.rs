use serde::{Deserialize, Serialize};

use super::RoutingError;
use crate::ingest::GeoPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNode {
    pub id: usize,
    pub point: GeoPoint,
}

/// An undirected road segment between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub polyline: Vec<GeoPoint>,
    pub length_m: f64,
    /// Fraction of the edge lying in shade; unset until a shade raster is overlaid.
    pub shade_ratio: Option<f64>,
}

impl RoadEdge {
    pub fn other(&self, node: usize) -> usize {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected road network. Node and edge ids equal their indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct RoadGraph {
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawGraph {
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
}

impl TryFrom<RawGraph> for RoadGraph {
    type Error = RoutingError;

    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        RoadGraph::new(raw.nodes, raw.edges)
    }
}

impl RoadGraph {
    pub fn new(nodes: Vec<RoadNode>, edges: Vec<RoadEdge>) -> Result<Self, RoutingError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(RoutingError::InvalidGraph(format!("node at index {i} has id {}", n.id)));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(RoutingError::InvalidGraph(format!("edge at index {i} has id {}", e.id)));
            }
            if e.u >= nodes.len() || e.v >= nodes.len() {
                return Err(RoutingError::InvalidGraph(format!("edge {i} references a missing node")));
            }
            if !(e.length_m > 0.0) || !e.length_m.is_finite() {
                return Err(RoutingError::InvalidGraph(format!("edge {i} has length {}", e.length_m)));
            }
            if let Some(r) = e.shade_ratio {
                if !(0.0..=1.0).contains(&r) {
                    return Err(RoutingError::InvalidGraph(format!("edge {i} has shade ratio {r}")));
                }
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            adjacency[e.u].push(e.id);
            if e.v != e.u {
                adjacency[e.v].push(e.id);
            }
        }
        Ok(Self { nodes, edges, adjacency })
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Ids of edges incident to `node`.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Returns a copy of the graph with every edge's shade ratio replaced.
    pub fn with_shade_ratios(&self, ratios: &[f64]) -> Result<Self, RoutingError> {
        if ratios.len() != self.edges.len() {
            return Err(RoutingError::InvalidGraph(format!(
                "{} shade ratios for {} edges",
                ratios.len(),
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(ratios)
            .map(|(e, &r)| RoadEdge {
                shade_ratio: Some(r),
                ..e.clone()
            })
            .collect();
        Self::new(self.nodes.clone(), edges)
    }
}
