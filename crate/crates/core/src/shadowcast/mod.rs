//! Analytic shadow casting of extruded footprints and the three snapshot
//! rasters derived from it.

mod geometry;
mod io;
mod raster;
mod render;

pub use geometry::{footprint_local, point_in_polygon, polygon_area, shadow_offset, shadow_parts, shadow_polygon};
pub use io::{read_raster, sidecar_path, write_raster, RasterSidecar};
pub use raster::{RasterGrid, RasterKind, ShadeRaster};
pub use render::{extract_ground_truth, render, render_pair};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShadowError {
    #[error("sun below the horizon (elevation {elevation_deg:.2}°)")]
    NightTime { elevation_deg: f64 },
    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("rasters cover different bounds")]
    BoundsMismatch,
    #[error("expected a {expected:?} raster, got {actual:?}")]
    KindMismatch { expected: RasterKind, actual: RasterKind },
    #[error("a shaded snapshot needs a sun position")]
    MissingSun,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid raster: {0}")]
    Raster(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("png: {0}")]
    Png(#[from] image::ImageError),
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

/// Render palette and ground-truth threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Pixels per tile side.
    pub raster_px: u32,
    /// Gray values at or below this are noise in ground-truth extraction.
    pub alpha: u8,
    pub shade_gray: u8,
    pub side_gray: u8,
    pub building_gray: u8,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            raster_px: 1024,
            alpha: 10,
            shade_gray: 90,
            side_gray: 140,
            building_gray: 200,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ShadowError> {
        if self.raster_px == 0 {
            return Err(ShadowError::Config("raster_px must be positive".into()));
        }
        if !(0 < self.alpha && self.alpha < self.shade_gray && self.shade_gray < self.side_gray && self.side_gray < self.building_gray)
        {
            return Err(ShadowError::Config(format!(
                "need 0 < alpha ({}) < shade_gray ({}) < side_gray ({}) < building_gray ({})",
                self.alpha, self.shade_gray, self.side_gray, self.building_gray
            )));
        }
        Ok(())
    }

    /// Short content hash stored in raster sidecars.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(bytes)[..8])
    }
}
