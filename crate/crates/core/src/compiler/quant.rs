//! Storage quantizers used by the asset format.

use half::f16;

const ROT_BITS: u32 = 10;
const ROT_MAX: f64 = ((1 << ROT_BITS) - 1) as f64;
const ROT_MASK: u32 = (1 << ROT_BITS) - 1;

fn rot_component_to_code(v: f64) -> i64 {
    ((v * std::f64::consts::SQRT_2 + 1.0) * 0.5 * ROT_MAX).round() as i64
}

fn rot_code_to_component(code: u32) -> f64 {
    (code as f64 / ROT_MAX * 2.0 - 1.0) * std::f64::consts::FRAC_1_SQRT_2
}

fn pack(largest: usize, codes: [u32; 3]) -> u32 {
    ((largest as u32) << 30) | (codes[0] << 20) | (codes[1] << 10) | codes[2]
}

fn decode_f64(bits: u32) -> [f64; 4] {
    let largest = (bits >> 30) as usize;
    let codes = [(bits >> 20) & ROT_MASK, (bits >> 10) & ROT_MASK, bits & ROT_MASK];
    let mut q = [0.0f64; 4];
    let mut sum = 0.0;
    let mut next = codes.iter();
    for (i, slot) in q.iter_mut().enumerate() {
        if i != largest {
            let v = rot_code_to_component(*next.next().expect("three codes"));
            sum += v * v;
            *slot = v;
        }
    }
    q[largest] = (1.0 - sum).max(0.0).sqrt();
    q
}

/// Unpacks a smallest-three quaternion (`w, x, y, z`).
pub fn dequantize_rotation(bits: u32) -> [f32; 4] {
    decode_f64(bits).map(|v| v as f32)
}

fn largest_index(q: &[f64; 4]) -> usize {
    (0..4).fold(0, |best, i| if q[i].abs() > q[best].abs() { i } else { best })
}

fn encode_once(q: [f64; 4]) -> u32 {
    let largest = largest_index(&q);
    let sign = if q[largest] < 0.0 { -1.0 } else { 1.0 };
    let target = q.map(|v| v * sign);
    let others: Vec<usize> = (0..4).filter(|&i| i != largest).collect();
    let base = others.iter().map(|&i| rot_component_to_code(target[i])).collect::<Vec<_>>();

    // search the rounding neighbourhood for the smallest worst-component
    // error; plain rounding lets the reconstructed largest component drift.
    // Codes whose decoded form would pick another index are only a fallback.
    let mut best = (false, f64::INFINITY, 0u32);
    for d in 0..27i64 {
        let deltas = [d % 3 - 1, (d / 3) % 3 - 1, d / 9 - 1];
        let mut codes = [0u32; 3];
        let mut valid = true;
        for k in 0..3 {
            let c = base[k] + deltas[k];
            if !(0..=ROT_MASK as i64).contains(&c) {
                valid = false;
                break;
            }
            codes[k] = c as u32;
        }
        if !valid {
            continue;
        }
        let bits = pack(largest, codes);
        let decoded = decode_f64(bits);
        let err = decoded
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let stable = largest_index(&decoded.map(|v| v as f32 as f64)) == largest;
        if (stable, -err) > (best.0, -best.1) {
            best = (stable, err, bits);
        }
    }
    best.2
}

/// Packs a quaternion as two index bits plus three 10-bit components.
/// `q` and `-q` encode identically, and `quantize(dequantize(b)) == b` for
/// every `b` produced here.
pub fn quantize_rotation(q: [f32; 4]) -> u32 {
    let norm = q.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
    let q = if norm > 0.0 {
        q.map(|v| v as f64 / norm)
    } else {
        [1.0, 0.0, 0.0, 0.0]
    };
    encode_once(q)
}

pub fn quantize_opacity(alpha: f32) -> u8 {
    (alpha.clamp(0.0, 1.0) as f64 * 255.0).round() as u8
}

pub fn dequantize_opacity(v: u8) -> f32 {
    v as f32 / 255.0
}

pub fn to_f16_bits(v: f32) -> u16 {
    f16::from_f32(v).to_bits()
}

pub fn from_f16_bits(bits: u16) -> f32 {
    f16::from_bits(bits).to_f32()
}

/// Rounds `v` to the nearest representable f16, returned as f32.
pub fn round_f16(v: f32) -> f32 {
    from_f16_bits(to_f16_bits(v))
}

/// Sign-canonical form of a quaternion: the first non-zero component is
/// positive.
pub fn canonical_quaternion(q: [f32; 4]) -> [f32; 4] {
    match q.iter().find(|v| **v != 0.0) {
        Some(v) if *v < 0.0 => q.map(|c| -c),
        _ => q,
    }
}
