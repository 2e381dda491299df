//! Gaussian primitives and their covariance geometry.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};

/// Default multiple of the standard deviation used as a splat's extent
/// along the slicing normal.
pub const DEFAULT_K_SIGMA: f64 = 3.0;

/// One anisotropic 3D Gaussian.
///
/// Attributes are kept at `f32`, the precision they are stored and
/// exchanged at. Geometry is evaluated in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrimitive {
    pub position: [f32; 3],
    /// Per-axis standard deviations, strictly positive.
    pub scale: [f32; 3],
    /// Unit quaternion, `(w, x, y, z)`.
    pub rotation: [f32; 4],
    pub opacity: f32,
    /// Degree-0 SH coefficient per RGB channel.
    pub dc_color: [f32; 3],
    /// Index into the owning higher-order SH table; `None` when the
    /// primitive carries only the DC term.
    pub sh_index: Option<u32>,
}

impl Default for GaussianPrimitive {
    fn default() -> Self {
        Self {
            position: [0.0; 3],
            scale: [1.0; 3],
            rotation: [1.0, 0.0, 0.0, 0.0],
            opacity: 1.0,
            dc_color: [0.0; 3],
            sh_index: None,
        }
    }
}

impl GaussianPrimitive {
    pub fn mean(&self) -> Vector3<f64> {
        Vector3::new(
            self.position[0] as f64,
            self.position[1] as f64,
            self.position[2] as f64,
        )
    }

    pub fn unit_rotation(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.rotation;
        UnitQuaternion::from_quaternion(Quaternion::new(w as f64, x as f64, y as f64, z as f64))
    }

    /// `Σ = R · diag(scale²) · Rᵀ`.
    pub fn covariance(&self) -> Matrix3<f64> {
        let r = self.unit_rotation().to_rotation_matrix().into_inner();
        let s2 = Matrix3::from_diagonal(&Vector3::new(
            (self.scale[0] as f64).powi(2),
            (self.scale[1] as f64).powi(2),
            (self.scale[2] as f64).powi(2),
        ));
        let cov = r * s2 * r.transpose();
        // symmetrize away rounding noise
        (cov + cov.transpose()) * 0.5
    }

    /// Extent of the Gaussian along the unit direction `n`:
    /// `k_sigma · sqrt(nᵀ Σ n)`.
    pub fn projected_radius(&self, n: &Vector3<f64>, k_sigma: f64) -> f64 {
        let var = (n.transpose() * self.covariance() * n)[(0, 0)];
        k_sigma * var.max(0.0).sqrt()
    }
}

/// Higher-order spherical-harmonics coefficients (orders `1..=degree`).
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoefficients {
    degree: u8,
    coeffs: Vec<[f32; 3]>,
}

impl ShCoefficients {
    /// Number of basis functions above the DC term for `degree`.
    pub const fn basis_count(degree: u8) -> usize {
        let d = degree as usize;
        (d + 1) * (d + 1) - 1
    }

    pub fn new(degree: u8, coeffs: Vec<[f32; 3]>) -> Option<Self> {
        if !(1..=3).contains(&degree) || coeffs.len() != Self::basis_count(degree) {
            return None;
        }
        Some(Self { degree, coeffs })
    }

    pub fn zeros(degree: u8) -> Option<Self> {
        Self::new(degree, vec![[0.0; 3]; Self::basis_count(degree)])
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn coeffs(&self) -> &[[f32; 3]] {
        &self.coeffs
    }
}
