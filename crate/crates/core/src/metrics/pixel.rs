use super::{same_dims, MetricsError};
use crate::num::Scalar;
use crate::shadowcast::ShadeRaster;

/// Mean squared error on the 0–255 scale.
pub fn mse(a: &ShadeRaster, b: &ShadeRaster) -> Result<f64, MetricsError> {
    same_dims((a.width(), a.height()), (b.width(), b.height()))?;
    if a.pixels().is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            dynamic_range: 255.0,
        }
    }
}

/// Gaussian-windowed SSIM averaged over every full window position.
pub fn ssim(a: &ShadeRaster, b: &ShadeRaster) -> Result<f64, MetricsError> {
    ssim_with::<f64>(a.pixels(), b.pixels(), a.width(), a.height(), b.width(), b.height(), SsimParams::default())
}

pub fn ssim_with<T: Scalar>(
    a: &[u8],
    b: &[u8],
    width: usize,
    height: usize,
    b_width: usize,
    b_height: usize,
    params: SsimParams,
) -> Result<T, MetricsError> {
    same_dims((width, height), (b_width, b_height))?;
    let win = params.window;
    if win == 0 || width < win || height < win {
        return Err(MetricsError::TooSmall { width, height, window: win });
    }
    let kernel = gaussian_kernel::<T>(win, T::lit(params.sigma));
    let c1 = (T::lit(0.01 * params.dynamic_range)).powi(2);
    let c2 = (T::lit(0.03 * params.dynamic_range)).powi(2);

    let to_t = |v: &[u8]| v.iter().map(|&p| T::lit(p as f64)).collect::<Vec<T>>();
    let (fa, fb) = (to_t(a), to_t(b));
    let prod = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| p * q).collect::<Vec<T>>();
    let blur = |img: &[T]| filter_valid(img, width, height, &kernel);

    let mu_a = blur(&fa);
    let mu_b = blur(&fb);
    let aa = blur(&prod(&fa, &fa));
    let bb = blur(&prod(&fb, &fb));
    let ab = blur(&prod(&fa, &fb));

    let two = T::lit(2.0);
    let mut total = T::zero();
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = aa[i] - ma * ma;
        let var_b = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        let num = (two * ma * mb + c1) * (two * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        total = total + num / den;
    }
    Ok(total / T::lit(mu_a.len() as f64))
}

fn gaussian_kernel<T: Scalar>(size: usize, sigma: T) -> Vec<T> {
    let center = T::lit((size as f64 - 1.0) / 2.0);
    let weights: Vec<T> = (0..size)
        .map(|i| {
            let x = T::lit(i as f64) - center;
            (-(x * x) / (T::lit(2.0) * sigma * sigma)).exp()
        })
        .collect();
    let sum = weights.iter().fold(T::zero(), |s, &w| s + w);
    weights.into_iter().map(|w| w / sum).collect()
}

/// Separable "valid" correlation: output is `(w - k + 1) × (h - k + 1)`.
fn filter_valid<T: Scalar>(img: &[T], w: usize, h: usize, kernel: &[T]) -> Vec<T> {
    let k = kernel.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut rows = vec![T::zero(); ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut s = T::zero();
            for (i, &kw) in kernel.iter().enumerate() {
                s = s + kw * img[y * w + x + i];
            }
            rows[y * ow + x] = s;
        }
    }
    let mut out = vec![T::zero(); ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut s = T::zero();
            for (i, &kw) in kernel.iter().enumerate() {
                s = s + kw * rows[(y + i) * ow + x];
            }
            out[y * ow + x] = s;
        }
    }
    out
}
