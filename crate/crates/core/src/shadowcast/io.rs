use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{GrayImage, ImageFormat};
use serde::{Deserialize, Serialize};

use super::{RasterGrid, RasterKind, ShadeRaster, ShadowError};
use crate::solar::{SunPosition, TextPrompt, TimeStamp};

/// Metadata persisted next to every raster PNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterSidecar {
    pub kind: RasterKind,
    pub grid: RasterGrid,
    pub sun: Option<SunPosition<f64>>,
    pub timestamp: Option<TimeStamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<TextPrompt>,
    pub config_hash: String,
}

impl RasterSidecar {
    pub fn for_raster(raster: &ShadeRaster, config_hash: String) -> Self {
        Self {
            kind: raster.kind,
            grid: raster.grid,
            sun: None,
            timestamp: None,
            prompt: None,
            config_hash,
        }
    }
}

impl ShadeRaster {
    /// Encodes the pixels as an 8-bit grayscale PNG.
    pub fn to_png(&self) -> Vec<u8> {
        let img = GrayImage::from_raw(self.width() as u32, self.height() as u32, self.pixels().to_vec())
            .expect("pixel buffer matches grid");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
        out.into_inner()
    }

    pub fn from_png(bytes: &[u8], grid: RasterGrid, kind: RasterKind) -> Result<Self, ShadowError> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?.into_luma8();
        if img.width() as usize != grid.width || img.height() as usize != grid.height {
            return Err(ShadowError::DimensionMismatch(
                img.width() as usize,
                img.height() as usize,
                grid.width,
                grid.height,
            ));
        }
        ShadeRaster::new(grid, kind, img.into_raw())
    }
}

/// `foo.png` → `foo.json`.
pub fn sidecar_path(png: &Path) -> PathBuf {
    png.with_extension("json")
}

pub fn write_raster(png: &Path, raster: &ShadeRaster, sidecar: &RasterSidecar) -> Result<(), ShadowError> {
    fs::write(png, raster.to_png())?;
    fs::write(sidecar_path(png), serde_json::to_vec_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_raster(png: &Path) -> Result<(ShadeRaster, RasterSidecar), ShadowError> {
    let sidecar: RasterSidecar = serde_json::from_slice(&fs::read(sidecar_path(png))?)?;
    let raster = ShadeRaster::from_png(&fs::read(png)?, sidecar.grid, sidecar.kind)?;
    Ok((raster, sidecar))
}
