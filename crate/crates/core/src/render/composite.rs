//! Front-to-back alpha compositing of depth-sorted splats.
//!
//! Per pixel, with `d` the offset from the splat mean to the pixel center
//! and `m = dᵀ Σ⁻¹ d`, a splat contributes `a = min(α′·exp(−m/2), 0.99)`
//! when `m ≤ 9` (inside its 3σ ellipse) and nothing otherwise. Colors
//! accumulate as `C += c·a·T`, `T ← T·(1 − a)`, stopping once `T < 1e-3`;
//! the background is added with the remaining `T`.

use rayon::prelude::*;

use crate::error::RenderError;
use crate::image::LinearImage;
use crate::render::project::{ProjectedSplat, FOOTPRINT_SIGMAS};

pub const MAX_SPLAT_ALPHA: f64 = 0.99;
pub const TRANSMITTANCE_CUTOFF: f64 = 1e-3;
const TILE: u32 = 16;

struct Prepared {
    mean: [f64; 2],
    conic: [f64; 3],
    opacity: f64,
    color: [f64; 3],
    /// Inclusive pixel ranges touched by the footprint box.
    x: (u32, u32),
    y: (u32, u32),
}

fn prepare(s: &ProjectedSplat, width: u32, height: u32) -> Option<Prepared> {
    let (a, b, c) = (s.cov[(0, 0)], s.cov[(0, 1)], s.cov[(1, 1)]);
    let det = a * c - b * b;
    if !(det > 0.0) {
        return None;
    }
    let conic = [c / det, -b / det, a / det];
    let (hx, hy) = s.half_extent();
    // pixel i is covered when its center i + 0.5 lies inside the box
    let lo_x = (s.mean.x - hx - 0.5).ceil().max(0.0);
    let hi_x = (s.mean.x + hx - 0.5).floor().min(width as f64 - 1.0);
    let lo_y = (s.mean.y - hy - 0.5).ceil().max(0.0);
    let hi_y = (s.mean.y + hy - 0.5).floor().min(height as f64 - 1.0);
    if lo_x > hi_x || lo_y > hi_y {
        return None;
    }
    Some(Prepared {
        mean: [s.mean.x, s.mean.y],
        conic,
        opacity: s.opacity,
        color: s.color,
        x: (lo_x as u32, hi_x as u32),
        y: (lo_y as u32, hi_y as u32),
    })
}

/// Composites `splats`, which must be sorted by ascending depth, over an
/// opaque `background` (linear RGB).
pub fn composite(
    splats: &[ProjectedSplat],
    width: u32,
    height: u32,
    background: [f64; 3],
) -> Result<LinearImage, RenderError> {
    if width == 0 || height == 0 {
        return Err(RenderError::InvalidArgument(format!(
            "viewport must be non-empty, got {width}x{height}"
        )));
    }
    if let Some(i) = splats.windows(2).position(|w| w[1].depth < w[0].depth) {
        return Err(RenderError::ContractViolation(format!(
            "splats not depth-sorted at index {}: {} after {}",
            i + 1,
            splats[i + 1].depth,
            splats[i].depth
        )));
    }

    let prepared: Vec<Prepared> = splats.iter().filter_map(|s| prepare(s, width, height)).collect();
    let tiles_x = width.div_ceil(TILE);
    let tiles_y = height.div_ceil(TILE);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); (tiles_x * tiles_y) as usize];
    for (i, p) in prepared.iter().enumerate() {
        for ty in p.y.0 / TILE..=p.y.1 / TILE {
            for tx in p.x.0 / TILE..=p.x.1 / TILE {
                bins[(ty * tiles_x + tx) as usize].push(i as u32);
            }
        }
    }

    let threshold = FOOTPRINT_SIGMAS * FOOTPRINT_SIGMAS;
    let mut rgb = vec![[0.0; 3]; width as usize * height as usize];
    rgb.par_chunks_mut(width as usize)
        .enumerate()
        .for_each(|(y, row)| {
            let y = y as u32;
            let py = y as f64 + 0.5;
            let tile_row = (y / TILE) * tiles_x;
            for (x, out) in row.iter_mut().enumerate() {
                let x = x as u32;
                let px = x as f64 + 0.5;
                let mut color = [0.0; 3];
                let mut transmittance = 1.0;
                for &i in &bins[(tile_row + x / TILE) as usize] {
                    let s = &prepared[i as usize];
                    if x < s.x.0 || x > s.x.1 || y < s.y.0 || y > s.y.1 {
                        continue;
                    }
                    let dx = px - s.mean[0];
                    let dy = py - s.mean[1];
                    let m = s.conic[0] * dx * dx + 2.0 * s.conic[1] * dx * dy + s.conic[2] * dy * dy;
                    if m > threshold {
                        continue;
                    }
                    let a = (s.opacity * (-0.5 * m).exp()).clamp(0.0, MAX_SPLAT_ALPHA);
                    for ch in 0..3 {
                        color[ch] += s.color[ch] * a * transmittance;
                    }
                    transmittance *= 1.0 - a;
                    if transmittance < TRANSMITTANCE_CUTOFF {
                        break;
                    }
                }
                for ch in 0..3 {
                    color[ch] += transmittance * background[ch];
                }
                *out = color;
            }
        });

    Ok(LinearImage { width, height, rgb })
}
