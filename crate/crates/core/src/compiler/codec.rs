//! Binary asset format, all little-endian:
//!
//! ```text
//! "CGSA" | version u32 | flags u32 | axis 3×f32 | K u32 | offsets K×f32 |
//! bounds 6×f32 (min xyz, max xyz) | sh_degree u8 | sh_count u32 |
//! sh_table sh_count×((degree+1)²−1)×3×f16 |
//! base_count u32 | base records | K × (delta_count u32 | delta records) |
//! crc32 of all preceding bytes
//! ```
//!
//! A record is `position 3×f32 | scale 3×f32 | rotation u32 (smallest-three,
//! 10 bits per component) | opacity u8 | dc 3×f16 | sh_index u32`, with
//! `0xFFFFFFFF` standing for no SH.

use crate::compiler::quant::{
    dequantize_opacity, dequantize_rotation, from_f16_bits, quantize_opacity, quantize_rotation,
    to_f16_bits,
};
use crate::compiler::{Aabb, LayeredAsset};
use crate::error::CodecError;
use crate::primitive::{GaussianPrimitive, ShCoefficients};

pub const MAGIC: [u8; 4] = *b"CGSA";
pub const VERSION: u32 = 1;
pub const RECORD_LEN: usize = 39;
const NO_SH: u32 = u32::MAX;

/// Encoded size of a single-state asset with no primitives and no SH.
pub const EMPTY_ASSET_LEN: usize = 4 + 4 + 4 + 12 + 4 + 4 + 24 + 1 + 4 + 4 + 4 + 4;

fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_record(out: &mut Vec<u8>, p: &GaussianPrimitive) {
    put_f32s(out, &p.position);
    put_f32s(out, &p.scale);
    put_u32(out, quantize_rotation(p.rotation));
    out.push(quantize_opacity(p.opacity));
    for v in p.dc_color {
        out.extend_from_slice(&to_f16_bits(v).to_le_bytes());
    }
    put_u32(out, p.sh_index.unwrap_or(NO_SH));
}

fn count_u32(n: usize) -> u32 {
    u32::try_from(n).expect("layer sizes fit in u32")
}

/// Serializes an asset. Identical assets give identical bytes.
pub fn encode_asset(asset: &LayeredAsset) -> Vec<u8> {
    let basis = ShCoefficients::basis_count(asset.sh_degree());
    let records = asset.base_layer().len() + asset.delta_layers().iter().map(Vec::len).sum::<usize>();
    let mut out = Vec::with_capacity(
        EMPTY_ASSET_LEN
            + 8 * asset.state_count()
            + asset.sh_table().len() * basis * 6
            + records * RECORD_LEN,
    );
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, 0);
    put_f32s(&mut out, &asset.axis());
    put_u32(&mut out, count_u32(asset.state_count()));
    put_f32s(&mut out, asset.offsets());
    put_f32s(&mut out, &asset.bounds().min);
    put_f32s(&mut out, &asset.bounds().max);
    out.push(asset.sh_degree());
    put_u32(&mut out, count_u32(asset.sh_table().len()));
    for sh in asset.sh_table() {
        for c in sh.coeffs() {
            for v in c {
                out.extend_from_slice(&to_f16_bits(*v).to_le_bytes());
            }
        }
    }
    put_u32(&mut out, count_u32(asset.base_layer().len()));
    for p in asset.base_layer() {
        put_record(&mut out, p);
    }
    for delta in asset.delta_layers() {
        put_u32(&mut out, count_u32(delta.len()));
        for p in delta {
            put_record(&mut out, p);
        }
    }
    let crc = crc32fast::hash(&out);
    put_u32(&mut out, crc);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Consumes `n` bytes; on shortfall reports the minimum total length
    /// implied by what has been parsed so far (payload plus crc).
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Length {
            expected: usize::MAX,
            actual: self.bytes.len(),
        })?;
        if end + 4 > self.bytes.len() {
            return Err(CodecError::Length {
                expected: end.saturating_add(4),
                actual: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, CodecError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32x3(&mut self) -> Result<[f32; 3], CodecError> {
        Ok([self.f32()?, self.f32()?, self.f32()?])
    }

    /// Checks that `count` items of `size` bytes can still be present
    /// before allocating for them.
    fn reserve(&self, count: usize, size: usize) -> Result<(), CodecError> {
        let needed = count.saturating_mul(size).saturating_add(self.pos).saturating_add(4);
        if needed > self.bytes.len() {
            return Err(CodecError::Length {
                expected: needed,
                actual: self.bytes.len(),
            });
        }
        Ok(())
    }

    fn record(&mut self) -> Result<GaussianPrimitive, CodecError> {
        let position = self.f32x3()?;
        let scale = self.f32x3()?;
        let rotation = dequantize_rotation(self.u32()?);
        let opacity = dequantize_opacity(self.u8()?);
        let dc_color = [
            from_f16_bits(self.u16()?),
            from_f16_bits(self.u16()?),
            from_f16_bits(self.u16()?),
        ];
        let sh = self.u32()?;
        Ok(GaussianPrimitive {
            position,
            scale,
            rotation,
            opacity,
            dc_color,
            sh_index: (sh != NO_SH).then_some(sh),
        })
    }

    fn layer(&mut self) -> Result<Vec<GaussianPrimitive>, CodecError> {
        let count = self.u32()? as usize;
        self.reserve(count, RECORD_LEN)?;
        (0..count).map(|_| self.record()).collect()
    }
}

/// Parses an encoded asset, verifying structure, length and checksum.
pub fn decode_asset(bytes: &[u8]) -> Result<LayeredAsset, CodecError> {
    if bytes.len() < 8 {
        return Err(if bytes.len() >= 4 && bytes[..4] != MAGIC {
            CodecError::Format("bad magic".into())
        } else {
            CodecError::Length {
                expected: EMPTY_ASSET_LEN,
                actual: bytes.len(),
            }
        });
    }
    if bytes[..4] != MAGIC {
        return Err(CodecError::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(CodecError::Format(format!("unsupported version {version}")));
    }

    let mut r = Reader { bytes, pos: 8 };
    let _flags = r.u32()?;
    let axis = r.f32x3()?;
    let k = r.u32()? as usize;
    r.reserve(k, 4)?;
    let offsets = (0..k).map(|_| r.f32()).collect::<Result<Vec<_>, _>>()?;
    let bounds = Aabb {
        min: r.f32x3()?,
        max: r.f32x3()?,
    };
    let sh_degree = r.u8()?;
    if sh_degree > 3 {
        return Err(CodecError::Format(format!("sh degree {sh_degree} > 3")));
    }
    let basis = ShCoefficients::basis_count(sh_degree);
    let sh_count = r.u32()? as usize;
    if sh_count > 0 && sh_degree == 0 {
        return Err(CodecError::Format("SH entries with degree 0".into()));
    }
    r.reserve(sh_count, basis * 6)?;
    let mut sh_table = Vec::with_capacity(sh_count);
    for _ in 0..sh_count {
        let coeffs = (0..basis)
            .map(|_| {
                Ok([
                    from_f16_bits(r.u16()?),
                    from_f16_bits(r.u16()?),
                    from_f16_bits(r.u16()?),
                ])
            })
            .collect::<Result<Vec<_>, CodecError>>()?;
        sh_table.push(ShCoefficients::new(sh_degree, coeffs).expect("basis count matches"));
    }
    let base_layer = r.layer()?;
    let delta_layers = (0..k).map(|_| r.layer()).collect::<Result<Vec<_>, _>>()?;

    let expected = r.pos + 4;
    if bytes.len() != expected {
        return Err(CodecError::Length {
            expected,
            actual: bytes.len(),
        });
    }
    let stored = u32::from_le_bytes(bytes[r.pos..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..r.pos]);
    if stored != computed {
        return Err(CodecError::Integrity { stored, computed });
    }

    LayeredAsset::from_decoded(axis, offsets, bounds, sh_degree, sh_table, base_layer, delta_layers)
        .map_err(|e| CodecError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_asset() -> LayeredAsset {
        LayeredAsset::single_state(vec![], 0, vec![]).unwrap()
    }

    fn sample_asset() -> LayeredAsset {
        let sh = ShCoefficients::new(1, vec![[0.5, -0.25, 0.125]; 3]).unwrap();
        let p = |x: f32, sh_index| GaussianPrimitive {
            position: [x, 1.0, -2.0],
            scale: [0.1, 0.2, 0.3],
            rotation: [0.8, 0.0, 0.6, 0.0],
            opacity: 0.7,
            dc_color: [0.3, -0.1, 1.5],
            sh_index,
        };
        LayeredAsset::from_parts(
            [0.0, 0.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            1,
            vec![sh],
            vec![p(0.0, Some(0)), p(1.0, None)],
            vec![vec![p(2.0, None)], vec![], vec![p(3.0, Some(0)), p(4.0, None)]],
        )
        .unwrap()
    }

    #[test]
    fn empty_asset_has_documented_length() {
        let bytes = encode_asset(&empty_asset());
        assert_eq!(bytes.len(), EMPTY_ASSET_LEN);
        assert_eq!(EMPTY_ASSET_LEN, 73);
        assert_eq!(&bytes[..4], b"CGSA");
        assert_eq!(decode_asset(&bytes).unwrap(), empty_asset());
    }

    #[test]
    fn layout_offsets() {
        let asset = sample_asset();
        let bytes = encode_asset(&asset);
        let basis = 3;
        let header = 28 + 4 * 3 + 24 + 1 + 4 + 1 * basis * 6;
        let expected = header + 4 + 2 * RECORD_LEN + (4 + RECORD_LEN) + 4 + (4 + 2 * RECORD_LEN) + 4;
        assert_eq!(bytes.len(), expected);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 3);
        assert_eq!(bytes[64], 1, "sh_degree byte");
        let base_count_at = header;
        assert_eq!(u32::from_le_bytes(bytes[base_count_at..base_count_at + 4].try_into().unwrap()), 2);
        // first record's sh_index is the last four bytes of the record
        let sh_at = base_count_at + 4 + RECORD_LEN - 4;
        assert_eq!(u32::from_le_bytes(bytes[sh_at..sh_at + 4].try_into().unwrap()), 0);
        let sh_at = sh_at + RECORD_LEN;
        assert_eq!(u32::from_le_bytes(bytes[sh_at..sh_at + 4].try_into().unwrap()), u32::MAX);
    }

    #[test]
    fn encode_decode_encode_is_stable() {
        let bytes = encode_asset(&sample_asset());
        let decoded = decode_asset(&bytes).unwrap();
        assert_eq!(encode_asset(&decoded), bytes);
        assert_eq!(decoded.base_layer()[0].position, [0.0, 1.0, -2.0]);
        assert!((decoded.base_layer()[0].opacity - 0.7).abs() <= 1.0 / 510.0);
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = encode_asset(&empty_asset());
        bytes[0] = b'X';
        assert!(matches!(decode_asset(&bytes), Err(CodecError::Format(_))));
        let mut bytes = encode_asset(&empty_asset());
        bytes[4] = 2;
        assert!(matches!(decode_asset(&bytes), Err(CodecError::Format(_))));
    }

    #[test]
    fn truncation_reports_lengths() {
        let bytes = encode_asset(&sample_asset());
        for cut in [3, 20, 70, bytes.len() - 10, bytes.len() - 1] {
            match decode_asset(&bytes[..cut]) {
                Err(CodecError::Length { expected, actual }) => {
                    assert_eq!(actual, cut);
                    assert!(expected > cut);
                }
                other => panic!("cut {cut}: unexpected {other:?}"),
            }
        }
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(
            decode_asset(&long),
            Err(CodecError::Length {
                expected: bytes.len(),
                actual: bytes.len() + 1
            })
        );
    }

    #[test]
    fn corrupted_payload_fails_checksum() {
        let mut bytes = encode_asset(&sample_asset());
        let at = bytes.len() - 20;
        bytes[at] ^= 0x40;
        assert!(matches!(decode_asset(&bytes), Err(CodecError::Integrity { .. })));
    }
}
