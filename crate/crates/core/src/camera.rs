//! Pinhole camera.
//!
//! Camera space follows the usual computer-vision convention: `+x` right,
//! `+y` down, `+z` forward along the optical axis. `orientation` rotates
//! camera-space vectors into world space.

use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};

use crate::error::SliceError;

pub const DEFAULT_NEAR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    /// Vertical field of view in radians.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
    pub near: f64,
}

impl CameraPose {
    pub fn new(
        position: Vector3<f64>,
        orientation: UnitQuaternion<f64>,
        vertical_fov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, SliceError> {
        let cam = Self {
            position,
            orientation,
            vertical_fov,
            width,
            height,
            near: DEFAULT_NEAR,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target`, with `up` roughly towards the
    /// top of the image.
    pub fn look_at(
        eye: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        vertical_fov: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, SliceError> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| SliceError::InvalidArgument("eye and target coincide".into()))?;
        let right = forward
            .cross(&up)
            .try_normalize(1e-12)
            .ok_or_else(|| SliceError::InvalidArgument("up is parallel to view".into()))?;
        let down = forward.cross(&right);
        let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[right, down, forward]));
        Self::new(
            eye,
            UnitQuaternion::from_rotation_matrix(&rot),
            vertical_fov,
            width,
            height,
        )
    }

    pub fn validate(&self) -> Result<(), SliceError> {
        if self.width == 0 || self.height == 0 {
            return Err(SliceError::InvalidArgument(format!(
                "viewport must be non-empty, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(SliceError::InvalidArgument(format!(
                "vertical_fov must be in (0, pi), got {}",
                self.vertical_fov
            )));
        }
        if !(self.near > 0.0) {
            return Err(SliceError::InvalidArgument("near must be positive".into()));
        }
        if !self.position.iter().all(|v| v.is_finite()) {
            return Err(SliceError::InvalidArgument("camera position must be finite".into()));
        }
        Ok(())
    }

    /// Focal length in pixels (square pixels).
    pub fn focal(&self) -> f64 {
        0.5 * self.height as f64 / (0.5 * self.vertical_fov).tan()
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (0.5 * self.width as f64, 0.5 * self.height as f64)
    }

    /// Rotation taking world vectors into camera space.
    pub fn world_to_camera(&self) -> Matrix3<f64> {
        self.orientation.inverse().to_rotation_matrix().into_inner()
    }

    pub fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&(p - self.position))
    }

    /// World-space direction of the ray through pixel coordinates `(u, v)`.
    pub fn ray_direction(&self, u: f64, v: f64) -> Vector3<f64> {
        let f = self.focal();
        let (cx, cy) = self.principal_point();
        let d = Vector3::new((u - cx) / f, (v - cy) / f, 1.0);
        self.orientation.transform_vector(&d).normalize()
    }

    pub fn eye(&self) -> Point3<f64> {
        Point3::from(self.position)
    }
}
