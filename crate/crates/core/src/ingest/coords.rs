//! WGS84 points, slippy-map tiles and the equirectangular local plane.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Meters per degree of latitude on the local plane.
pub const METERS_PER_DEG_LAT: f64 = 111_320.0;

/// Sphere radius used for geodesic lengths. Matches the local-plane constant
/// (2πR/360 ≈ 111 319.5 m) so lengths agree across both paths.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Latitude limit of the web-mercator projection.
pub const MAX_MERCATOR_LAT: f64 = 85.051_128_779_806_59;

/// Zoom level used for dataset tile alignment.
pub const DEFAULT_TILE_ZOOM: u8 = 13;

/// A WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, IngestError> {
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(IngestError::CoordinateRange { lon, lat });
        }
        Ok(Self { lon, lat })
    }
}

/// Axis-aligned lon/lat rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl GeoBounds {
    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lon >= self.min_lon && p.lon <= self.max_lon && p.lat >= self.min_lat && p.lat <= self.max_lat
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint {
            lon: 0.5 * (self.min_lon + self.max_lon),
            lat: 0.5 * (self.min_lat + self.max_lat),
        }
    }

    /// Smallest bounds covering all points, `None` for an empty iterator.
    pub fn covering<I: IntoIterator<Item = GeoPoint>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = GeoBounds {
            min_lon: first.lon,
            min_lat: first.lat,
            max_lon: first.lon,
            max_lat: first.lat,
        };
        for p in it {
            b.min_lon = b.min_lon.min(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
        }
        Some(b)
    }

    /// Grows the bounds by `margin_m` meters on every side.
    pub fn padded(&self, margin_m: f64) -> Self {
        let dlat = margin_m / METERS_PER_DEG_LAT;
        let dlon = margin_m / (METERS_PER_DEG_LAT * self.center().lat.to_radians().cos());
        GeoBounds {
            min_lon: self.min_lon - dlon,
            min_lat: self.min_lat - dlat,
            max_lon: self.max_lon + dlon,
            max_lat: self.max_lat + dlat,
        }
    }
}

/// A slippy-map tile and its geographic extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileBBox {
    pub zoom: u8,
    pub x: u32,
    pub y: u32,
    pub geo_bounds: GeoBounds,
}

impl TileBBox {
    pub fn new(zoom: u8, x: u32, y: u32) -> Result<Self, IngestError> {
        if zoom > 22 {
            return Err(IngestError::Zoom(zoom));
        }
        let n = 1u64 << zoom;
        if u64::from(x) >= n || u64::from(y) >= n {
            return Err(IngestError::TileIndex { zoom, x, y });
        }
        Ok(Self {
            zoom,
            x,
            y,
            geo_bounds: tile_bounds(zoom, x, y),
        })
    }

    /// Parses `z/x/y`.
    pub fn parse(s: &str) -> Result<Self, IngestError> {
        let parts: Vec<&str> = s.trim().split('/').collect();
        let bad = || IngestError::TileSpec(s.to_string());
        if parts.len() != 3 {
            return Err(bad());
        }
        let zoom = parts[0].parse().map_err(|_| bad())?;
        let x = parts[1].parse().map_err(|_| bad())?;
        let y = parts[2].parse().map_err(|_| bad())?;
        Self::new(zoom, x, y)
    }
}

fn tile_lon(x: f64, n: f64) -> f64 {
    x / n * 360.0 - 180.0
}

fn tile_lat(y: f64, n: f64) -> f64 {
    (PI * (1.0 - 2.0 * y / n)).sinh().atan().to_degrees()
}

/// Geographic extent of tile `(zoom, x, y)`.
pub fn tile_bounds(zoom: u8, x: u32, y: u32) -> GeoBounds {
    let n = (1u64 << zoom) as f64;
    GeoBounds {
        min_lon: tile_lon(x as f64, n),
        max_lon: tile_lon(x as f64 + 1.0, n),
        max_lat: tile_lat(y as f64, n),
        min_lat: tile_lat(y as f64 + 1.0, n),
    }
}

/// The tile containing `point` at `zoom`.
pub fn tile_for(point: GeoPoint, zoom: u8) -> Result<TileBBox, IngestError> {
    if zoom > 22 {
        return Err(IngestError::Zoom(zoom));
    }
    if point.lat.abs() > MAX_MERCATOR_LAT {
        return Err(IngestError::MercatorRange(point.lat));
    }
    let n = (1u64 << zoom) as f64;
    let max = (1u64 << zoom) - 1;
    let x = ((point.lon + 180.0) / 360.0 * n).floor();
    let lat = point.lat.to_radians();
    let y = ((1.0 - (lat.tan() + 1.0 / lat.cos()).ln() / PI) / 2.0 * n).floor();
    let mut x = (x.max(0.0) as u64).min(max) as u32;
    let mut y = (y.max(0.0) as u64).min(max) as u32;

    // Floating rounding can put a point sitting on a tile edge one tile off.
    let b = tile_bounds(zoom, x, y);
    if point.lon < b.min_lon && x > 0 {
        x -= 1;
    } else if point.lon > b.max_lon && u64::from(x) < max {
        x += 1;
    }
    if point.lat > b.max_lat && y > 0 {
        y -= 1;
    } else if point.lat < b.min_lat && u64::from(y) < max {
        y += 1;
    }
    TileBBox::new(zoom, x, y)
}

/// Equirectangular plane tangent at `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin: GeoPoint,
    pub meters_per_deg_lon: f64,
    pub meters_per_deg_lat: f64,
}

impl LocalFrame {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            meters_per_deg_lon: METERS_PER_DEG_LAT * origin.lat.to_radians().cos(),
            meters_per_deg_lat: METERS_PER_DEG_LAT,
        }
    }

    /// Meters east and north of the origin.
    pub fn to_local(&self, p: GeoPoint) -> (f64, f64) {
        (
            (p.lon - self.origin.lon) * self.meters_per_deg_lon,
            (p.lat - self.origin.lat) * self.meters_per_deg_lat,
        )
    }

    pub fn from_local(&self, x_m: f64, y_m: f64) -> GeoPoint {
        GeoPoint {
            lon: self.origin.lon + x_m / self.meters_per_deg_lon,
            lat: self.origin.lat + y_m / self.meters_per_deg_lat,
        }
    }
}

/// Great-circle distance in meters.
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (la1, la2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = la2 - la1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equator_origin_zoom_one() {
        let t = tile_for(GeoPoint { lon: 0.0, lat: 0.0 }, 1).unwrap();
        assert_eq!((t.x, t.y), (1, 1));
    }

    #[test]
    fn tempe_zoom_13_matches_formula() {
        // x = floor((lon+180)/360 * 2^z), y = floor((1 - asinh(tan lat)/π)/2 * 2^z)
        let (lon, lat) = (-111.93f64, 33.42f64);
        let n = 8192.0;
        let x = ((lon + 180.0) / 360.0 * n).floor() as u32;
        let y = ((1.0 - lat.to_radians().tan().asinh() / PI) / 2.0 * n).floor() as u32;
        assert_eq!((x, y), (1548, 3288));
        let t = tile_for(GeoPoint { lon, lat }, 13).unwrap();
        assert_eq!((t.x, t.y), (x, y));
        assert!(t.geo_bounds.contains(GeoPoint { lon, lat }));
    }

    #[test]
    fn rejects_polar_latitude() {
        assert!(matches!(
            tile_for(GeoPoint { lon: 0.0, lat: 86.0 }, 5),
            Err(IngestError::MercatorRange(_))
        ));
        assert!(tile_for(GeoPoint { lon: 0.0, lat: 0.0 }, 23).is_err());
    }

    #[test]
    fn parse_tile_spec() {
        let t = TileBBox::parse("13/1548/3288").unwrap();
        assert_eq!((t.zoom, t.x, t.y), (13, 1548, 3288));
        assert!(TileBBox::parse("13/1549").is_err());
        assert!(TileBBox::parse("1/2/0").is_err());
    }

    #[test]
    fn local_frame_basics() {
        let origin = GeoPoint { lon: -111.93, lat: 33.42 };
        let f = LocalFrame::new(origin);
        assert_eq!(f.to_local(origin), (0.0, 0.0));
        let (_, y) = f.to_local(GeoPoint { lon: origin.lon, lat: origin.lat + 0.001 });
        assert!((y - 111.32).abs() < 1e-6);
    }

    #[test]
    fn haversine_agrees_with_local_plane() {
        let o = GeoPoint { lon: 10.0, lat: 45.0 };
        let f = LocalFrame::new(o);
        let p = f.from_local(300.0, 400.0);
        assert!((haversine_m(o, p) - 500.0).abs() < 0.5);
    }

    proptest! {
        #[test]
        fn tile_contains_point(lon in -180.0f64..180.0, lat in -85.05f64..85.05, z in 0u8..=22) {
            let p = GeoPoint { lon, lat };
            let t = tile_for(p, z).unwrap();
            prop_assert!(t.geo_bounds.contains(p), "{:?} not in {:?}", p, t);
        }

        #[test]
        fn local_round_trip(dlon in -0.1f64..0.1, dlat in -0.1f64..0.1, olat in -60.0f64..60.0) {
            let f = LocalFrame::new(GeoPoint { lon: 20.0, lat: olat });
            let p = GeoPoint { lon: 20.0 + dlon, lat: olat + dlat };
            let (x, y) = f.to_local(p);
            let q = f.from_local(x, y);
            let (x2, y2) = f.to_local(q);
            prop_assert!((x - x2).abs() < 1e-9 && (y - y2).abs() < 1e-9);
            prop_assert!((q.lon - p.lon).abs() * f.meters_per_deg_lon < 1e-9);
            prop_assert!((q.lat - p.lat).abs() * f.meters_per_deg_lat < 1e-9);
        }
    }
}
