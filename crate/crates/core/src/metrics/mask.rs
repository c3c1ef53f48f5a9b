use serde::{Deserialize, Serialize};

use super::{same_dims, MetricsError};
use crate::shadowcast::ShadeRaster;

/// Gray level above which a non-binary raster pixel counts as shade.
pub const DEFAULT_GRAY_THRESHOLD: u8 = 127;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, MetricsError> {
        if bits.len() != width * height {
            return Err(MetricsError::Invalid(format!("{} bits for {width}x{height}", bits.len())));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Pixels strictly above `threshold` are set.
    pub fn from_raster(r: &ShadeRaster, threshold: u8) -> Self {
        Self {
            width: r.width(),
            height: r.height(),
            bits: r.pixels().iter().map(|&p| p > threshold).collect(),
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
            ..self.clone()
        }
    }

    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Applies `reduce` over each pixel's 3×3 neighborhood, with pixels
    /// outside the image read as `outside`.
    fn morph(&self, outside: bool, reduce: fn(bool, bool) -> bool, init: bool) -> Self {
        let (w, h) = (self.width as isize, self.height as isize);
        let mut bits = Vec::with_capacity(self.bits.len());
        for y in 0..h {
            for x in 0..w {
                let mut acc = init;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        let v = if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            outside
                        } else {
                            self.bits[(ny * w + nx) as usize]
                        };
                        acc = reduce(acc, v);
                    }
                }
                bits.push(acc);
            }
        }
        Self {
            width: self.width,
            height: self.height,
            bits,
        }
    }
}

/// 3×3 dilation; outside the image is background.
pub fn dilate(m: &BinaryMask) -> BinaryMask {
    m.morph(false, |a, b| a || b, false)
}

/// 3×3 erosion; outside the image is background.
pub fn erode(m: &BinaryMask) -> BinaryMask {
    m.morph(false, |a, b| a && b, true)
}

/// Morphological boundary `dilate(M) \ erode(M)`.
pub fn boundary(m: &BinaryMask) -> BinaryMask {
    let d = dilate(m);
    let e = erode(m);
    BinaryMask {
        width: m.width,
        height: m.height,
        bits: d.bits.iter().zip(&e.bits).map(|(&a, &b)| a && !b).collect(),
    }
}

fn iou(a: impl Iterator<Item = bool>, b: impl Iterator<Item = bool>) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean IoU over the shade and background classes. A class absent from both
/// masks scores 1.
pub fn miou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricsError> {
    same_dims(pred.dims(), gt.dims())?;
    let shade = iou(pred.bits.iter().copied(), gt.bits.iter().copied());
    let background = iou(pred.bits.iter().map(|b| !b), gt.bits.iter().map(|b| !b));
    Ok(0.5 * (shade + background))
}

/// IoU of the two masks' morphological boundaries; 1 when both are empty.
pub fn b_iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricsError> {
    same_dims(pred.dims(), gt.dims())?;
    let (bp, bg) = (boundary(pred), boundary(gt));
    Ok(iou(bp.bits.into_iter(), bg.bits.into_iter()))
}
