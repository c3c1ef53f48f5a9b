use std::fmt;

use serde::{Deserialize, Serialize};

use super::ShadowError;
use crate::ingest::{GeoBounds, GeoPoint, LocalFrame, TileBBox, METERS_PER_DEG_LAT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterKind {
    ShadedSnapshot,
    Skeleton,
    GroundTruth,
    Edge,
}

impl fmt::Display for RasterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ShadedSnapshot => "shaded_snapshot",
            Self::Skeleton => "skeleton",
            Self::GroundTruth => "ground_truth",
            Self::Edge => "edge",
        })
    }
}

/// Pixel lattice over lon/lat bounds. Row 0 is the northern edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterGrid {
    pub bounds: GeoBounds,
    pub width: usize,
    pub height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile: Option<TileBBox>,
}

impl RasterGrid {
    pub fn new(bounds: GeoBounds, width: usize, height: usize) -> Self {
        Self {
            bounds,
            width,
            height,
            tile: None,
        }
    }

    /// A square `px × px` grid covering a slippy tile.
    pub fn for_tile(tile: TileBBox, px: u32) -> Self {
        Self {
            bounds: tile.geo_bounds,
            width: px as usize,
            height: px as usize,
            tile: Some(tile),
        }
    }

    /// A grid over `bounds` with roughly square pixels of `meters_per_px`.
    pub fn covering(bounds: GeoBounds, meters_per_px: f64) -> Self {
        let frame = LocalFrame::new(bounds.center());
        let w_m = (bounds.max_lon - bounds.min_lon) * frame.meters_per_deg_lon;
        let h_m = (bounds.max_lat - bounds.min_lat) * METERS_PER_DEG_LAT;
        Self::new(
            bounds,
            ((w_m / meters_per_px).ceil() as usize).max(1),
            ((h_m / meters_per_px).ceil() as usize).max(1),
        )
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn deg_per_px(&self) -> (f64, f64) {
        (
            (self.bounds.max_lon - self.bounds.min_lon) / self.width as f64,
            (self.bounds.max_lat - self.bounds.min_lat) / self.height as f64,
        )
    }

    /// Continuous pixel coordinates (column, row) of a point; pixel `(c, r)`
    /// spans `[c, c+1) × [r, r+1)`.
    pub fn to_pixel(&self, p: GeoPoint) -> (f64, f64) {
        let (dx, dy) = self.deg_per_px();
        ((p.lon - self.bounds.min_lon) / dx, (self.bounds.max_lat - p.lat) / dy)
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> GeoPoint {
        let (dx, dy) = self.deg_per_px();
        GeoPoint {
            lon: self.bounds.min_lon + (col as f64 + 0.5) * dx,
            lat: self.bounds.max_lat - (row as f64 + 0.5) * dy,
        }
    }

    /// Pixel containing `p`, if inside the grid.
    pub fn pixel_at(&self, p: GeoPoint) -> Option<(usize, usize)> {
        let (c, r) = self.to_pixel(p);
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((c as usize, r as usize))
    }
}

/// Georeferenced 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadeRaster {
    pub grid: RasterGrid,
    pub kind: RasterKind,
    pixels: Vec<u8>,
}

impl ShadeRaster {
    pub fn new(grid: RasterGrid, kind: RasterKind, pixels: Vec<u8>) -> Result<Self, ShadowError> {
        if pixels.len() != grid.len() {
            return Err(ShadowError::Raster(format!(
                "{} pixels for a {}x{} grid",
                pixels.len(),
                grid.width,
                grid.height
            )));
        }
        if matches!(kind, RasterKind::GroundTruth | RasterKind::Edge) && pixels.iter().any(|&p| p != 0 && p != 255) {
            return Err(ShadowError::Raster(format!("{kind} raster must be binary")));
        }
        Ok(Self { grid, kind, pixels })
    }

    pub fn zeros(grid: RasterGrid, kind: RasterKind) -> Self {
        Self {
            pixels: vec![0; grid.len()],
            grid,
            kind,
        }
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.grid.width + col]
    }

    /// Value of the pixel containing `p`, `None` outside the raster.
    pub fn sample(&self, p: GeoPoint) -> Option<u8> {
        self.grid.pixel_at(p).map(|(c, r)| self.get(c, r))
    }

    pub(crate) fn check_same_shape(&self, other: &ShadeRaster) -> Result<(), ShadowError> {
        if self.width() != other.width() || self.height() != other.height() {
            return Err(ShadowError::DimensionMismatch(
                self.width(),
                self.height(),
                other.width(),
                other.height(),
            ));
        }
        Ok(())
    }
}
