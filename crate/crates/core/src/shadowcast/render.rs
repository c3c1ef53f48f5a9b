use rayon::prelude::*;

use super::geometry::{footprint_local, shadow_offset, shadow_parts};
use super::{RasterGrid, RasterKind, ShadeRaster, ShadowError, SimConfig};
use crate::ingest::{BuildingFootprint, LocalFrame};
use crate::solar::SunPosition;

/// Distance in pixels from the footprint boundary within which shadow quads
/// are painted as side projection.
const SIDE_BAND_PX: f64 = 1.0;

/// A polygon in pixel space with its fill value.
struct Fill {
    ring: Vec<(f64, f64)>,
    gray: u8,
    /// Footprint whose boundary band is painted at `side_gray` instead.
    band_of: Option<usize>,
    y_min: f64,
    y_max: f64,
}

impl Fill {
    fn new(ring: Vec<(f64, f64)>, gray: u8, band_of: Option<usize>) -> Self {
        let y_min = ring.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let y_max = ring.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        Self {
            ring,
            gray,
            band_of,
            y_min,
            y_max,
        }
    }

    /// Sorted x positions where the horizontal line at `y` crosses the ring.
    /// Edges are half-open in y (`[min, max)`), so a center on a top edge is inside.
    fn crossings(&self, y: f64, out: &mut Vec<f64>) {
        out.clear();
        let n = self.ring.len();
        for i in 0..n {
            let (x0, y0) = self.ring[i];
            let (x1, y1) = self.ring[(i + 1) % n];
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            if lo <= y && y < hi {
                out.push(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        out.sort_by(f64::total_cmp);
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

fn near_boundary(p: (f64, f64), ring: &[(f64, f64)], tol: f64) -> bool {
    let n = ring.len();
    (0..n).any(|i| segment_distance(p, ring[i], ring[(i + 1) % n]) <= tol)
}

/// Renders a skeleton or shaded snapshot of `scene` on `grid`.
///
/// Footprints are filled at `building_gray`; in a shaded snapshot each
/// building's swept edge quads are filled at `shade_gray`, or `side_gray`
/// within one pixel of the footprint boundary. Overlaps keep the maximum.
pub fn render(
    scene: &[BuildingFootprint],
    sun: Option<&SunPosition<f64>>,
    grid: &RasterGrid,
    cfg: &SimConfig,
    kind: RasterKind,
) -> Result<ShadeRaster, ShadowError> {
    cfg.validate()?;
    let sun = match kind {
        RasterKind::Skeleton => None,
        RasterKind::ShadedSnapshot => Some(sun.ok_or(ShadowError::MissingSun)?),
        other => {
            return Err(ShadowError::KindMismatch {
                expected: RasterKind::ShadedSnapshot,
                actual: other,
            })
        }
    };
    if grid.is_empty() {
        return Ok(ShadeRaster::zeros(*grid, kind));
    }

    let frame = LocalFrame::new(grid.bounds.center());
    let to_px = |c: geo::Coord<f64>| grid.to_pixel(frame.from_local(c.x, c.y));

    let mut footprints_px: Vec<Vec<(f64, f64)>> = Vec::with_capacity(scene.len());
    let mut fills = Vec::new();
    for (i, b) in scene.iter().enumerate() {
        let ring = footprint_local(b, &frame);
        let ring_px: Vec<(f64, f64)> = ring.iter().map(|&c| to_px(c)).collect();
        if let Some(sun) = sun {
            let offset = shadow_offset(b.height_m, sun)?;
            for quad in shadow_parts(&ring, offset).into_iter().skip(1) {
                fills.push(Fill::new(quad.into_iter().map(to_px).collect(), cfg.shade_gray, Some(i)));
            }
        }
        fills.push(Fill::new(ring_px.clone(), cfg.building_gray, None));
        footprints_px.push(ring_px);
    }

    let width = grid.width;
    let mut pixels = vec![0u8; grid.len()];
    pixels.par_chunks_mut(width).enumerate().for_each(|(row, line)| {
        let y = row as f64 + 0.5;
        let mut xs = Vec::new();
        for fill in &fills {
            if y < fill.y_min || y >= fill.y_max {
                continue;
            }
            fill.crossings(y, &mut xs);
            for span in xs.chunks_exact(2) {
                let start = (span[0] - 0.5).ceil().max(0.0) as usize;
                let end = ((span[1] - 0.5).ceil().max(0.0) as usize).min(width);
                for (col, px) in line.iter_mut().enumerate().take(end).skip(start) {
                    let mut gray = fill.gray;
                    if let Some(b) = fill.band_of {
                        if near_boundary((col as f64 + 0.5, y), &footprints_px[b], SIDE_BAND_PX) {
                            gray = cfg.side_gray;
                        }
                    }
                    *px = (*px).max(gray);
                }
            }
        }
    });
    ShadeRaster::new(*grid, kind, pixels)
}

/// Per-pixel ground-truth rule: structure (`sk > 0`) and noise (`shade ≤ α`)
/// become 0, everything else 255.
pub fn extract_ground_truth(
    x_shade: &ShadeRaster,
    x_sk: &ShadeRaster,
    cfg: &SimConfig,
) -> Result<ShadeRaster, ShadowError> {
    for (r, expected) in [(x_shade, RasterKind::ShadedSnapshot), (x_sk, RasterKind::Skeleton)] {
        if r.kind != expected {
            return Err(ShadowError::KindMismatch {
                expected,
                actual: r.kind,
            });
        }
    }
    x_shade.check_same_shape(x_sk)?;
    if x_shade.grid.bounds != x_sk.grid.bounds {
        return Err(ShadowError::BoundsMismatch);
    }
    let pixels = x_shade
        .pixels()
        .iter()
        .zip(x_sk.pixels())
        .map(|(&shade, &sk)| if sk > 0 || shade <= cfg.alpha { 0 } else { 255 })
        .collect();
    ShadeRaster::new(x_shade.grid, RasterKind::GroundTruth, pixels)
}

/// Shaded snapshot, skeleton and ground truth for one sun position.
pub fn render_pair(
    scene: &[BuildingFootprint],
    sun: &SunPosition<f64>,
    grid: &RasterGrid,
    cfg: &SimConfig,
) -> Result<(ShadeRaster, ShadeRaster, ShadeRaster), ShadowError> {
    let shade = render(scene, Some(sun), grid, cfg, RasterKind::ShadedSnapshot)?;
    let sk = render(scene, None, grid, cfg, RasterKind::Skeleton)?;
    let gt = extract_ground_truth(&shade, &sk, cfg)?;
    Ok((shade, sk, gt))
}
