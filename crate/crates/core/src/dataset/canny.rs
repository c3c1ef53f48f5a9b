use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::shadowcast::{RasterKind, ShadeRaster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    /// Weak-edge threshold on the unnormalized Sobel magnitude.
    pub low: f32,
    pub high: f32,
    /// Gaussian blur width in pixels.
    pub sigma: f32,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            low: 50.0,
            high: 150.0,
            sigma: 1.4,
        }
    }
}

fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

fn gaussian_blur(src: &[f32], w: usize, h: usize, sigma: f32) -> Vec<f32> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f32> = (-radius..=radius)
        .map(|i| (-(i * i) as f32 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f32 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &kw)| kw * src[y * w + clamp_idx(x as isize + k as isize - radius, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &kw)| kw * tmp[clamp_idx(y as isize + k as isize - radius, h) * w + x])
                .sum();
        }
    }
    out
}

/// Canny edge map: Gaussian blur, Sobel gradients, non-maximum suppression,
/// double threshold and hysteresis. Output pixels are 0 or 255.
pub fn canny_edges(x_sk: &ShadeRaster, params: &CannyParams) -> ShadeRaster {
    let (w, h) = (x_sk.width(), x_sk.height());
    if w == 0 || h == 0 {
        return ShadeRaster::zeros(x_sk.grid, RasterKind::Edge);
    }
    let src: Vec<f32> = x_sk.pixels().iter().map(|&p| p as f32).collect();
    let blurred = gaussian_blur(&src, w, h, params.sigma);
    let at = |x: isize, y: isize| blurred[clamp_idx(y, h) * w + clamp_idx(x, w)];

    let mut mag = vec![0.0f32; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            mag[i] = gx.hypot(gy);
            // gradient direction quantized to 0°, 45°, 90°, 135°
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            dir[i] = match angle {
                a if !(22.5..157.5).contains(&a) => 0,
                a if a < 67.5 => 1,
                a if a < 112.5 => 2,
                _ => 3,
            };
        }
    }

    let m = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    // 0 none, 1 weak, 2 strong
    let mut class = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let v = mag[i];
            if v < params.low {
                continue;
            }
            let (dx, dy) = match dir[i] {
                0 => (1, 0),
                1 => (1, 1),
                2 => (0, 1),
                _ => (-1, 1),
            };
            // strict on one side so equal-magnitude ridges stay one pixel wide
            if v > m(x - dx, y - dy) && v >= m(x + dx, y + dy) {
                class[i] = if v >= params.high { 2 } else { 1 };
            }
        }
    }

    let mut out = vec![0u8; w * h];
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| class[i] == 2).collect();
    for &i in &queue {
        out[i] = 255;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 && out[j] == 0 {
                    out[j] = 255;
                    queue.push_back(j);
                }
            }
        }
    }
    ShadeRaster::new(x_sk.grid, RasterKind::Edge, out).expect("binary edge map")
}
