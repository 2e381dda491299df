//! Wire format of render requests and their conversion to renderer inputs.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use splatslice_core::render::RenderOptions;
use splatslice_core::{CameraPose, RenderMode, SlicingPlane, DEFAULT_K_SIGMA};

/// Largest accepted `width · height` (1920×1080).
pub const MAX_PIXELS: u64 = 2_073_600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub normal: [f64; 3],
    pub offset: f64,
}

/// Pinhole camera in the +x right, +y down, +z forward convention.
/// `orientation` is the camera-to-world rotation as `[w, x, y, z]` and need
/// not be normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub position: [f64; 3],
    pub orientation: [f64; 4],
    /// Radians.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderRequest {
    pub case_id: String,
    pub plane: PlaneSpec,
    pub camera: CameraSpec,
    pub mode: String,
    #[serde(default = "default_k_sigma")]
    pub k_sigma: f64,
}

fn default_k_sigma() -> f64 {
    DEFAULT_K_SIGMA
}

/// A rejected request field, named by its dotted JSON path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for FieldError {}

impl PlaneSpec {
    pub fn to_plane(&self) -> Result<SlicingPlane, FieldError> {
        if self.normal.iter().any(|v| !v.is_finite()) || self.normal == [0.0; 3] {
            return Err(FieldError::new("plane.normal", "must be a finite non-zero vector"));
        }
        if !self.offset.is_finite() {
            return Err(FieldError::new("plane.offset", "must be finite"));
        }
        SlicingPlane::new(Vector3::from(self.normal), self.offset)
            .map_err(|e| FieldError::new("plane.normal", e.to_string()))
    }
}

impl CameraSpec {
    pub fn to_camera(&self) -> Result<CameraPose, FieldError> {
        if self.position.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::new("camera.position", "must be finite"));
        }
        let [w, x, y, z] = self.orientation;
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(FieldError::new("camera.orientation", "must be a finite non-zero quaternion"));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < std::f64::consts::PI) {
            return Err(FieldError::new("camera.vertical_fov", "must lie in (0, pi) radians"));
        }
        if self.width == 0 {
            return Err(FieldError::new("camera.width", "must be positive"));
        }
        if self.height == 0 {
            return Err(FieldError::new("camera.height", "must be positive"));
        }
        if self.width as u64 * self.height as u64 > MAX_PIXELS {
            return Err(FieldError::new(
                "camera.width",
                format!("width * height exceeds {MAX_PIXELS} pixels"),
            ));
        }
        CameraPose::new(
            Vector3::from(self.position),
            UnitQuaternion::from_quaternion(q),
            self.vertical_fov,
            self.width,
            self.height,
        )
        .map_err(|e| FieldError::new("camera", e.to_string()))
    }
}

/// Validated renderer inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderInputs {
    pub plane: SlicingPlane,
    pub camera: CameraPose,
    pub options: RenderOptions,
}

impl RenderRequest {
    /// Parses a JSON body, reporting the path of the first bad field.
    pub fn from_json(body: &[u8]) -> Result<Self, FieldError> {
        let de = &mut serde_json::Deserializer::from_slice(body);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "body".to_string() } else { path };
            FieldError::new(field, e.into_inner().to_string())
        })
    }

    pub fn inputs(&self) -> Result<RenderInputs, FieldError> {
        let mode: RenderMode = self
            .mode
            .parse()
            .map_err(|e: splatslice_core::error::RenderError| FieldError::new("mode", e.to_string()))?;
        if !(self.k_sigma > 0.0 && self.k_sigma.is_finite()) {
            return Err(FieldError::new("k_sigma", "must be positive and finite"));
        }
        Ok(RenderInputs {
            plane: self.plane.to_plane()?,
            camera: self.camera.to_camera()?,
            options: RenderOptions {
                mode,
                k_sigma: self.k_sigma,
                ..RenderOptions::default()
            },
        })
    }
}
