use super::{RoadEdge, RoadGraph, RoutingError};
use crate::ingest::{haversine_m, GeoPoint};
use crate::shadowcast::ShadeRaster;

pub const DEFAULT_SAMPLE_STEP_M: f64 = 2.0;

/// Evenly spaced points along a polyline, both ends included, no more than
/// `step_m` apart.
fn sample_points(polyline: &[GeoPoint], step_m: f64) -> Vec<GeoPoint> {
    let seg_len: Vec<f64> = polyline.windows(2).map(|w| haversine_m(w[0], w[1])).collect();
    let total: f64 = seg_len.iter().sum();
    if polyline.len() < 2 || total <= 0.0 {
        return polyline.first().copied().into_iter().collect();
    }
    let n = ((total / step_m).ceil() as usize).max(1);
    let mut out = Vec::with_capacity(n + 1);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for i in 0..=n {
        let s = total * i as f64 / n as f64;
        while seg + 1 < seg_len.len() && s > seg_start + seg_len[seg] {
            seg_start += seg_len[seg];
            seg += 1;
        }
        let t = if seg_len[seg] > 0.0 {
            ((s - seg_start) / seg_len[seg]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (polyline[seg], polyline[seg + 1]);
        out.push(GeoPoint {
            lon: a.lon + t * (b.lon - a.lon),
            lat: a.lat + t * (b.lat - a.lat),
        });
    }
    out
}

/// Fraction of sample points along the edge that fall on shade (pixel = 255).
/// Points outside the raster count as unshaded.
pub fn edge_shade_ratio(edge: &RoadEdge, raster: &ShadeRaster, sample_step_m: f64) -> f64 {
    let samples = sample_points(&edge.polyline, sample_step_m);
    if samples.is_empty() {
        return 0.0;
    }
    let shaded = samples.iter().filter(|&&p| raster.sample(p) == Some(255)).count();
    shaded as f64 / samples.len() as f64
}

/// New graph version with every edge's shade ratio taken from `raster`.
pub fn overlay_shade(graph: &RoadGraph, raster: &ShadeRaster, sample_step_m: f64) -> Result<RoadGraph, RoutingError> {
    let ratios: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| edge_shade_ratio(e, raster, sample_step_m))
        .collect();
    graph.with_shade_ratios(&ratios)
}
