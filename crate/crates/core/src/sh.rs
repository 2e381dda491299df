//! Real spherical-harmonics color evaluation (degrees 0 through 3).

use nalgebra::Vector3;

use crate::primitive::{GaussianPrimitive, ShCoefficients};

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// Linear RGB of a primitive seen along `view_dir` (camera towards the
/// Gaussian), including the +0.5 DC offset, clamped to `[0, 1]`.
pub fn evaluate_color(
    prim: &GaussianPrimitive,
    sh: Option<&ShCoefficients>,
    view_dir: &Vector3<f64>,
) -> [f64; 3] {
    let mut basis = [0.0f64; 15];
    let degree = sh.map_or(0, |s| s.degree());
    if degree > 0 {
        let (x, y, z) = (view_dir.x, view_dir.y, view_dir.z);
        basis[0] = -SH_C1 * y;
        basis[1] = SH_C1 * z;
        basis[2] = -SH_C1 * x;
        if degree > 1 {
            let (xx, yy, zz) = (x * x, y * y, z * z);
            basis[3] = SH_C2[0] * x * y;
            basis[4] = SH_C2[1] * y * z;
            basis[5] = SH_C2[2] * (2.0 * zz - xx - yy);
            basis[6] = SH_C2[3] * x * z;
            basis[7] = SH_C2[4] * (xx - yy);
            if degree > 2 {
                basis[8] = SH_C3[0] * y * (3.0 * xx - yy);
                basis[9] = SH_C3[1] * x * y * z;
                basis[10] = SH_C3[2] * y * (4.0 * zz - xx - yy);
                basis[11] = SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
                basis[12] = SH_C3[4] * x * (4.0 * zz - xx - yy);
                basis[13] = SH_C3[5] * z * (xx - yy);
                basis[14] = SH_C3[6] * x * (xx - 3.0 * yy);
            }
        }
    }

    let mut rgb = [0.0; 3];
    for (ch, out) in rgb.iter_mut().enumerate() {
        let mut v = 0.5 + SH_C0 * prim.dc_color[ch] as f64;
        if let Some(sh) = sh {
            for (b, c) in basis.iter().zip(sh.coeffs()) {
                v += b * c[ch] as f64;
            }
        }
        *out = v.clamp(0.0, 1.0);
    }
    rgb
}
