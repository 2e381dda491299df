//! Perspective EWA projection of 3D Gaussians to screen-space ellipses.

use nalgebra::{Matrix2, Matrix2x3, Vector2};

use crate::camera::CameraPose;
use crate::primitive::{GaussianPrimitive, ShCoefficients};
use crate::sh::evaluate_color;

/// Added to the diagonal of every screen covariance, in px².
pub const SCREEN_DILATION: f64 = 0.3;
/// Footprint radius in standard deviations.
pub const FOOTPRINT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedSplat {
    /// Screen-space mean in pixels (pixel `(i, j)` has its center at
    /// `(i + 0.5, j + 0.5)`).
    pub mean: Vector2<f64>,
    /// Screen covariance in px², dilation included.
    pub cov: Matrix2<f64>,
    /// Camera-space depth.
    pub depth: f64,
    /// Effective opacity after slicing.
    pub opacity: f64,
    /// Linear RGB.
    pub color: [f64; 3],
}

impl ProjectedSplat {
    /// Half-widths of the axis-aligned box around the footprint ellipse.
    pub fn half_extent(&self) -> (f64, f64) {
        (
            FOOTPRINT_SIGMAS * self.cov[(0, 0)].sqrt(),
            FOOTPRINT_SIGMAS * self.cov[(1, 1)].sqrt(),
        )
    }
}

/// Projects `prim` through `camera`. Returns `None` when the mean is not in
/// front of the near plane or the footprint lies outside the viewport.
/// The splat takes its opacity from `prim.opacity`.
pub fn project_gaussian(
    prim: &GaussianPrimitive,
    sh: Option<&ShCoefficients>,
    camera: &CameraPose,
) -> Option<ProjectedSplat> {
    let mean = prim.mean();
    let t = camera.to_camera(&mean);
    if !(t.z > camera.near) {
        return None;
    }
    let f = camera.focal();
    let (cx, cy) = camera.principal_point();
    let screen = Vector2::new(f * t.x / t.z + cx, f * t.y / t.z + cy);

    let inv_z = 1.0 / t.z;
    let jac = Matrix2x3::new(
        f * inv_z,
        0.0,
        -f * t.x * inv_z * inv_z,
        0.0,
        f * inv_z,
        -f * t.y * inv_z * inv_z,
    );
    let m = jac * camera.world_to_camera();
    let mut cov = m * prim.covariance() * m.transpose();
    cov = (cov + cov.transpose()) * 0.5;
    cov[(0, 0)] += SCREEN_DILATION;
    cov[(1, 1)] += SCREEN_DILATION;

    let splat = ProjectedSplat {
        mean: screen,
        cov,
        depth: t.z,
        opacity: prim.opacity as f64,
        color: evaluate_color(prim, sh, &(mean - camera.position).normalize()),
    };
    let (hx, hy) = splat.half_extent();
    if screen.x + hx < 0.0
        || screen.x - hx > camera.width as f64
        || screen.y + hy < 0.0
        || screen.y - hy > camera.height as f64
    {
        return None;
    }
    Some(splat)
}
