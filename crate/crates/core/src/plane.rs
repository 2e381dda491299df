//! Slicing planes: hard truncation and opacity modulation.

use nalgebra::Vector3;

use crate::error::SliceError;

/// An oriented plane `{ p : p·n = c }`. The half-space `p·n > c` is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicingPlane {
    normal: Vector3<f64>,
    offset: f64,
}

impl SlicingPlane {
    /// Builds a plane from any non-zero normal; the normal is normalized.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self, SliceError> {
        let len = normal.norm();
        if !len.is_finite() || len == 0.0 {
            return Err(SliceError::InvalidArgument(
                "plane normal must be non-zero and finite".into(),
            ));
        }
        if !offset.is_finite() {
            return Err(SliceError::InvalidArgument(
                "plane offset must be finite".into(),
            ));
        }
        Ok(Self {
            normal: normal / len,
            offset,
        })
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The same plane with the kept half-space swapped.
    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// `μ·n − c`.
    pub fn signed_distance(&self, mu: &Vector3<f64>) -> f64 {
        mu.dot(&self.normal) - self.offset
    }

    /// Centroid-side visibility test. Centroids exactly on the plane are
    /// not visible.
    pub fn is_visible(&self, mu: &Vector3<f64>) -> bool {
        self.signed_distance(mu) > 0.0
    }

    /// The modulation factor `clamp(1/2 + (μ·n − c) / (2 s_n), 0, 1)`.
    pub fn fade(&self, mu: &Vector3<f64>, s_n: f64) -> Result<f64, SliceError> {
        if !(s_n > 0.0) {
            return Err(SliceError::InvalidArgument(format!(
                "projected radius must be positive, got {s_n}"
            )));
        }
        Ok((0.5 + self.signed_distance(mu) / (2.0 * s_n)).clamp(0.0, 1.0))
    }

    /// `α′ = α · fade(μ, s_n)`.
    pub fn modulated_opacity(
        &self,
        alpha: f64,
        mu: &Vector3<f64>,
        s_n: f64,
    ) -> Result<f64, SliceError> {
        Ok(alpha * self.fade(mu, s_n)?)
    }
}
