use std::fmt;

use crate::compiler::quant::canonical_quaternion;
use crate::primitive::GaussianPrimitive;

pub const POSITION_STEP: f64 = 1e-5;
pub const SCALE_STEP: f64 = 1e-5;
pub const OPACITY_STEP: f64 = 1e-5;
pub const DC_STEP: f64 = 1e-5;
pub const ROTATION_STEP: f64 = 1e-6;

/// Grid-quantized identity of a primitive, used to match primitives across
/// states. Ordering is lexicographic over the fields in declaration order
/// and agrees with the ordering of [`IdentityKey::to_bytes`].
///
/// The SH component is the primitive's index into a deduplicated global
/// table, where index equality is payload equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdentityKey {
    position: [i64; 3],
    scale: [i64; 3],
    rotation: [i64; 4],
    opacity: i64,
    dc_color: [i64; 3],
    sh: i64,
}

fn q(v: f32, step: f64) -> i64 {
    (v as f64 / step).round() as i64
}

impl IdentityKey {
    pub fn of(p: &GaussianPrimitive) -> Self {
        Self {
            position: p.position.map(|v| q(v, POSITION_STEP)),
            scale: p.scale.map(|v| q(v, SCALE_STEP)),
            rotation: canonical_quaternion(p.rotation).map(|v| q(v, ROTATION_STEP)),
            opacity: q(p.opacity, OPACITY_STEP),
            dc_color: p.dc_color.map(|v| q(v, DC_STEP)),
            sh: p.sh_index.map_or(-1, i64::from),
        }
    }

    fn fields(&self) -> [i64; 15] {
        let mut out = [0; 15];
        out[..3].copy_from_slice(&self.position);
        out[3..6].copy_from_slice(&self.scale);
        out[6..10].copy_from_slice(&self.rotation);
        out[10] = self.opacity;
        out[11..14].copy_from_slice(&self.dc_color);
        out[14] = self.sh;
        out
    }

    /// Order-preserving big-endian encoding (sign bit flipped).
    pub fn to_bytes(&self) -> [u8; 120] {
        let mut out = [0u8; 120];
        for (chunk, v) in out.chunks_exact_mut(8).zip(self.fields()) {
            chunk.copy_from_slice(&((v as u64) ^ (1 << 63)).to_be_bytes());
        }
        out
    }
}

impl fmt::Display for IdentityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pos={:?} scale={:?} rot={:?} opacity={} dc={:?} sh={}",
            self.position, self.scale, self.rotation, self.opacity, self.dc_color, self.sh
        )
    }
}
