use geo::{BooleanOps, Coord, LineString, MultiPolygon, Polygon};

use super::ShadowError;
use crate::ingest::{BuildingFootprint, LocalFrame};
use crate::num::Scalar;
use crate::solar::SunPosition;

/// Ground displacement of a roof point at `height_m` under parallel sunlight,
/// pointing away from the sun: `L · (−sin az, −cos az)` with `L = h / tan(el)`.
pub fn shadow_offset<T: Scalar>(height_m: T, sun: &SunPosition<T>) -> Result<Coord<T>, ShadowError> {
    if !(sun.elevation_deg > T::zero()) {
        return Err(ShadowError::NightTime {
            elevation_deg: sun.elevation_deg.as_f64(),
        });
    }
    let length = height_m / sun.elevation_deg.to_radians().tan();
    let az = sun.azimuth_deg.to_radians();
    Ok(Coord {
        x: -length * az.sin(),
        y: -length * az.cos(),
    })
}

/// Footprint ring in local meters (east, north).
pub fn footprint_local(b: &BuildingFootprint, frame: &LocalFrame) -> Vec<Coord<f64>> {
    b.ring
        .iter()
        .map(|&p| {
            let (x, y) = frame.to_local(p);
            Coord { x, y }
        })
        .collect()
}

/// The footprint followed by one parallelogram per edge swept along `offset`.
/// Their union is the prism's ground shadow including the footprint; edges
/// parallel to the offset produce zero-area quads and are left out.
pub fn shadow_parts<T: Scalar>(ring: &[Coord<T>], offset: Coord<T>) -> Vec<Vec<Coord<T>>> {
    let mut parts = Vec::with_capacity(ring.len() + 1);
    parts.push(ring.to_vec());
    let offset_len = offset.x.hypot(offset.y);
    if offset_len <= T::epsilon() {
        return parts;
    }
    let n = ring.len();
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let edge_len = ex.hypot(ey);
        let swept = (ex * offset.y - ey * offset.x).abs();
        if swept <= T::lit(1e-9) * edge_len * offset_len {
            continue;
        }
        parts.push(vec![a, b, b + offset, a + offset]);
    }
    parts
}

/// Ground shadow region of one building, footprint included, as simple polygons.
pub fn shadow_polygon(
    b: &BuildingFootprint,
    sun: &SunPosition<f64>,
    frame: &LocalFrame,
) -> Result<MultiPolygon<f64>, ShadowError> {
    let offset = shadow_offset(b.height_m, sun)?;
    let ring = footprint_local(b, frame);
    let polys = shadow_parts(&ring, offset)
        .into_iter()
        .map(|part| Polygon::new(LineString::from(part), vec![]));
    let mut union = MultiPolygon::new(vec![]);
    for p in polys {
        union = union.union(&p);
    }
    Ok(union)
}

/// Even-odd point-in-polygon test for an implicitly closed ring.
pub fn point_in_polygon<T: Scalar>(p: Coord<T>, ring: &[Coord<T>]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Unsigned shoelace area.
pub fn polygon_area<T: Scalar>(ring: &[Coord<T>]) -> T {
    let n = ring.len();
    let mut twice = T::zero();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        twice = twice + a.x * b.y - b.x * a.y;
    }
    (twice / T::lit(2.0)).abs()
}
