//! PSNR and SSIM over 8-bit frames. Alpha is ignored by both.

use serde::{Deserialize, Serialize};

use crate::error::MetricError;
use crate::image::FrameImage;

/// Returned by [`psnr`] for identical images.
pub const PSNR_CAP_DB: f64 = 99.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const L: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
}

fn check_dims(a: &FrameImage, b: &FrameImage) -> Result<(), MetricError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricError::InvalidArgument(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// `10·log10(255² / MSE)` over the RGB channels, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &FrameImage, b: &FrameImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let (sum, n) = a
        .pixels()
        .chunks_exact(4)
        .zip(b.pixels().chunks_exact(4))
        .flat_map(|(p, q)| (0..3).map(move |i| p[i] as f64 - q[i] as f64))
        .fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    if n == 0 {
        return Err(MetricError::InvalidArgument("empty image".into()));
    }
    if sum == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    let mse = sum / n as f64;
    Ok((10.0 * (L * L / mse).log10()).min(PSNR_CAP_DB))
}

fn luma(img: &FrameImage) -> Vec<f64> {
    img.pixels()
        .chunks_exact(4)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let r = (SSIM_WINDOW / 2) as f64;
    let mut k = [0.0; SSIM_WINDOW];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.map(|v| v / sum)
}

/// Separable weighted mean over every window lying fully inside the image.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..SSIM_WINDOW).map(|i| k[i] * src[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..SSIM_WINDOW).map(|i| k[i] * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM of the Rec.601 luma planes, 11×11 Gaussian window (σ = 1.5),
/// population statistics, averaged over valid window positions.
pub fn ssim(a: &FrameImage, b: &FrameImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(MetricError::InvalidArgument(format!(
            "images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let x = luma(a);
    let y = luma(b);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let k = gaussian_kernel();
    let [mx, my, mxx, myy, mxy] = [&x, &y, &xx, &yy, &xy].map(|p| filter_valid(p, w, h, &k));

    let c1 = (K1 * L).powi(2);
    let c2 = (K2 * L).powi(2);
    let n = mx.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = mxx[i] - ux * ux;
            let vy = myy[i] - uy * uy;
            let cxy = mxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok((total / n as f64).clamp(-1.0, 1.0))
}

pub fn compare(a: &FrameImage, b: &FrameImage) -> Result<MetricReport, MetricError> {
    Ok(MetricReport {
        psnr_db: psnr(a, b)?,
        ssim: ssim(a, b)?,
    })
}
