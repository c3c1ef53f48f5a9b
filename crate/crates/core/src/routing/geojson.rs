use serde_json::{json, Value};

use super::{RoutePlan, RouteResult};
use crate::solar::TimeStamp;

fn format_time(t: &TimeStamp) -> String {
    let minutes = (t.local_hour * 60.0).round() as u32;
    format!(
        "{:04}-{:02}-{:02}T{:02}:{:02}",
        t.year,
        t.month,
        t.day,
        minutes / 60,
        minutes % 60
    )
}

fn feature(r: &RouteResult, kind: &str, time: Option<&TimeStamp>) -> Value {
    let coords: Vec<[f64; 2]> = r.polyline.iter().map(|p| [p.lon, p.lat]).collect();
    json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": coords },
        "properties": {
            "kind": kind,
            "length_m": r.total_length_m,
            "exposure_m": r.total_exposure_m,
            "mean_shade_ratio": r.mean_shade_ratio,
            "cost": r.cost,
            "w": r.w,
            "time": time.map(format_time),
            "nodes": r.nodes,
        }
    })
}

/// FeatureCollection with the shortest route followed by the shaded route.
pub fn route_geojson(plan: &RoutePlan, time: Option<&TimeStamp>) -> Value {
    json!({
        "type": "FeatureCollection",
        "features": [
            feature(&plan.shortest, "shortest", time),
            feature(&plan.shaded, "shaded", time),
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GeoPoint;

    #[test]
    fn feature_collection_layout() {
        let r = RouteResult {
            nodes: vec![0, 1],
            edges: vec![0],
            polyline: vec![GeoPoint { lon: 1.0, lat: 2.0 }, GeoPoint { lon: 1.5, lat: 2.5 }],
            total_length_m: 10.0,
            total_exposure_m: 4.0,
            mean_shade_ratio: 0.6,
            cost: 7.0,
            w: 0.5,
        };
        let plan = RoutePlan {
            shaded: r.clone(),
            shortest: RouteResult { w: 0.0, ..r },
        };
        let t = TimeStamp::new(2024, 12, 1, 12.0, -7.0).unwrap();
        let v = route_geojson(&plan, Some(&t));
        assert_eq!(v["type"], "FeatureCollection");
        assert_eq!(v["features"][0]["properties"]["kind"], "shortest");
        assert_eq!(v["features"][1]["properties"]["kind"], "shaded");
        assert_eq!(v["features"][1]["properties"]["exposure_m"], 4.0);
        assert_eq!(v["features"][1]["properties"]["time"], "2024-12-01T12:00");
        assert_eq!(v["features"][1]["geometry"]["coordinates"][1][0], 1.5);
    }
}
