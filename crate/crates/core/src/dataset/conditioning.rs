use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::shadowcast::{RasterGrid, RasterKind, ShadeRaster};

/// Skeleton replicated into R, G and B plus the edge map as a fourth channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningTensor {
    pub grid: RasterGrid,
    /// Row-major, channel-interleaved.
    data: Vec<u8>,
}

impl ConditioningTensor {
    pub const CHANNELS: usize = 4;

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn channels(&self) -> usize {
        Self::CHANNELS
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, col: usize, row: usize) -> [u8; 4] {
        let i = (row * self.grid.width + col) * Self::CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }

    /// RGBA PNG encoding; the edge channel lands in alpha.
    pub fn to_png(&self) -> Vec<u8> {
        let img = image::RgbaImage::from_raw(self.width() as u32, self.height() as u32, self.data.clone())
            .expect("buffer matches grid");
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).expect("in-memory PNG encoding");
        out.into_inner()
    }
}

pub fn build_conditioning(x_sk: &ShadeRaster, x_edge: &ShadeRaster) -> Result<ConditioningTensor, DatasetError> {
    x_sk.check_same_shape(x_edge)?;
    let mut data = Vec::with_capacity(x_sk.pixels().len() * ConditioningTensor::CHANNELS);
    for (&s, &e) in x_sk.pixels().iter().zip(x_edge.pixels()) {
        data.extend_from_slice(&[s, s, s, e]);
    }
    Ok(ConditioningTensor { grid: x_sk.grid, data })
}

/// Inverse of [`build_conditioning`]: the skeleton is read from channel 0.
pub fn split_conditioning(t: &ConditioningTensor) -> Result<(ShadeRaster, ShadeRaster), DatasetError> {
    let sk = t.data.chunks_exact(4).map(|p| p[0]).collect();
    let edge = t.data.chunks_exact(4).map(|p| p[3]).collect();
    Ok((
        ShadeRaster::new(t.grid, RasterKind::Skeleton, sk)?,
        ShadeRaster::new(t.grid, RasterKind::Edge, edge)?,
    ))
}
