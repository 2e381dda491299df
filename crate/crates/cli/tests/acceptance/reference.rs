//! Emission-absorption ray integration of a plane-clipped Gaussian density.
//!
//! Each primitive becomes a 3D density `ρ(x) = κ·exp(−½ (x−μ)ᵀ Σ⁻¹ (x−μ))`
//! whose optical depth along the ray from the camera through the mean is
//! `−ln(1 − α)`, i.e. `κ = −ln(1 − α)·sqrt(dᵀΣ⁻¹d / 2π)` for the central
//! view direction `d`. Density on the non-positive side of the plane is
//! removed. Every pixel ray is marched with a fixed number of midpoint
//! samples across the scene's bounding sphere.

use nalgebra::{Matrix3, Vector3};
use splatslice_core::image::LinearImage;
use splatslice_core::sh::evaluate_color;
use splatslice_core::{CameraPose, GaussianPrimitive, SlicingPlane};

struct Blob {
    mean: Vector3<f64>,
    precision: Matrix3<f64>,
    kappa: f64,
    color: [f64; 3],
}

pub fn render_reference(
    prims: &[GaussianPrimitive],
    plane: &SlicingPlane,
    camera: &CameraPose,
    samples: usize,
) -> LinearImage {
    let eye = camera.position;
    let blobs: Vec<Blob> = prims
        .iter()
        .map(|p| {
            let mean = p.mean();
            let precision = p.covariance().try_inverse().expect("covariance is invertible");
            let d = (mean - eye).normalize();
            let q = (d.transpose() * precision * d)[(0, 0)];
            let alpha = (p.opacity as f64).min(0.999);
            Blob {
                mean,
                precision,
                kappa: -(1.0 - alpha).ln() * (q / (2.0 * std::f64::consts::PI)).sqrt(),
                color: evaluate_color(p, None, &d),
            }
        })
        .collect();

    // bounding sphere of all 4σ ellipsoids
    let center = prims.iter().map(|p| p.mean()).sum::<Vector3<f64>>() / prims.len().max(1) as f64;
    let radius = prims
        .iter()
        .map(|p| {
            let s = p.scale.iter().fold(0.0f32, |a, b| a.max(*b)) as f64;
            (p.mean() - center).norm() + 4.0 * s
        })
        .fold(0.0, f64::max);
    let dist = (center - eye).norm();
    let t0 = (dist - radius).max(camera.near);
    let t1 = dist + radius;
    let dt = (t1 - t0) / samples as f64;

    let (w, h) = (camera.width, camera.height);
    let mut rgb = Vec::with_capacity(w as usize * h as usize);
    let mut near: Vec<&Blob> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let dir = camera.ray_direction(x as f64 + 0.5, y as f64 + 0.5);
            near.clear();
            for b in &blobs {
                // smallest Mahalanobis distance along the ray
                let o = eye - b.mean;
                let pd = b.precision * dir;
                let a = dir.dot(&pd);
                let bb = o.dot(&pd);
                let c = o.dot(&(b.precision * o));
                if c - bb * bb / a <= 36.0 {
                    near.push(b);
                }
            }
            let mut color = [0.0; 3];
            let mut transmittance = 1.0;
            if !near.is_empty() {
                for i in 0..samples {
                    let p = eye + dir * (t0 + (i as f64 + 0.5) * dt);
                    if !plane.is_visible(&p) {
                        continue;
                    }
                    let mut sigma = 0.0;
                    let mut emit = [0.0; 3];
                    for b in &near {
                        let r = p - b.mean;
                        let m = r.dot(&(b.precision * r));
                        let rho = b.kappa * (-0.5 * m).exp();
                        sigma += rho;
                        for ch in 0..3 {
                            emit[ch] += rho * b.color[ch];
                        }
                    }
                    if sigma <= 0.0 {
                        continue;
                    }
                    let a = 1.0 - (-sigma * dt).exp();
                    for ch in 0..3 {
                        color[ch] += transmittance * a * emit[ch] / sigma;
                    }
                    transmittance *= 1.0 - a;
                }
            }
            rgb.push(color);
        }
    }
    LinearImage { width: w, height: h, rgb }
}
