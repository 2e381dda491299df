//! Reader and writer for the standard Gaussian-splat PLY vertex layout.
//!
//! Vertices carry `x y z`, `scale_0..2` (log space), `rot_0..3` (`w x y z`),
//! `opacity` (logit space), `f_dc_0..2` and optionally `f_rest_*` with 9, 24
//! or 45 entries stored channel-major (all red coefficients first). Other
//! properties and elements are skipped. `ascii` and `binary_little_endian`
//! bodies are accepted.

use std::io::Write;

use crate::error::PlyError;
use crate::ingest::GaussianCloud;
use crate::primitive::{GaussianPrimitive, ShCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug, Clone)]
enum PropertyKind {
    Scalar(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropertyKind,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_start: usize,
}

fn header_err(line: usize, message: impl Into<String>) -> PlyError {
    PlyError::Header {
        line,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        line_no += 1;
        let rest = &bytes[pos..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            return Err(header_err(line_no, "unexpected end of header"));
        };
        let raw = &rest[..nl];
        pos += nl + 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| header_err(line_no, "header is not valid ASCII"))?
            .trim_end_matches('\r');
        let mut words = line.split_ascii_whitespace();
        let keyword = words.next().unwrap_or("");
        if line_no == 1 {
            if line != "ply" {
                return Err(header_err(1, "missing `ply` magic"));
            }
            continue;
        }
        match keyword {
            "format" => {
                let kind = words.next().unwrap_or("");
                format = Some(match kind {
                    "ascii" => Format::Ascii,
                    "binary_little_endian" => Format::BinaryLe,
                    other => {
                        return Err(header_err(line_no, format!("unsupported format `{other}`")))
                    }
                });
            }
            "comment" | "obj_info" | "" => {}
            "element" => {
                let (Some(name), Some(count), None) = (words.next(), words.next(), words.next())
                else {
                    return Err(header_err(line_no, "expected `element <name> <count>`"));
                };
                let count = count
                    .parse()
                    .map_err(|_| header_err(line_no, format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let words: Vec<&str> = words.collect();
                let kind_err = |t: &str| header_err(line_no, format!("unknown property type `{t}`"));
                let (kind, name) = match words.as_slice() {
                    ["list", count, item, name] => (
                        PropertyKind::List {
                            count: Scalar::parse(count).ok_or_else(|| kind_err(count))?,
                            item: Scalar::parse(item).ok_or_else(|| kind_err(item))?,
                        },
                        name,
                    ),
                    [ty, name] => (
                        PropertyKind::Scalar(Scalar::parse(ty).ok_or_else(|| kind_err(ty))?),
                        name,
                    ),
                    _ => return Err(header_err(line_no, "malformed property line")),
                };
                let element = elements
                    .last_mut()
                    .ok_or_else(|| header_err(line_no, "property before any element"))?;
                element.properties.push(Property {
                    name: name.to_string(),
                    kind,
                });
            }
            "end_header" => break,
            other => return Err(header_err(line_no, format!("unknown keyword `{other}`"))),
        }
    }
    let format = format.ok_or_else(|| header_err(line_no, "no `format` line"))?;
    Ok(Header {
        format,
        elements,
        body_start: pos,
    })
}

/// Sequential value reader over either body encoding.
struct Body<'a> {
    format: Format,
    bytes: &'a [u8],
    pos: usize,
}

impl Body<'_> {
    fn read(&mut self, ty: Scalar) -> Option<f64> {
        match self.format {
            Format::BinaryLe => {
                let b = self.bytes.get(self.pos..self.pos + ty.size())?;
                self.pos += ty.size();
                Some(match ty {
                    Scalar::I8 => b[0] as i8 as f64,
                    Scalar::U8 => b[0] as f64,
                    Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
                    Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
                    Scalar::I32 => i32::from_le_bytes(b.try_into().ok()?) as f64,
                    Scalar::U32 => u32::from_le_bytes(b.try_into().ok()?) as f64,
                    Scalar::F32 => f32::from_le_bytes(b.try_into().ok()?) as f64,
                    Scalar::F64 => f64::from_le_bytes(b.try_into().ok()?),
                })
            }
            Format::Ascii => {
                let rest = &self.bytes[self.pos..];
                let start = rest.iter().position(|b| !b.is_ascii_whitespace())?;
                let len = rest[start..]
                    .iter()
                    .position(|b| b.is_ascii_whitespace())
                    .unwrap_or(rest.len() - start);
                self.pos += start + len;
                let token = std::str::from_utf8(&rest[start..start + len]).ok()?;
                // `nan`/`inf` tokens parse and are rejected later as non-finite
                let v: f64 = token.parse().ok()?;
                Some(match ty {
                    Scalar::F32 => v as f32 as f64,
                    _ => v,
                })
            }
        }
    }

    fn skip_property(&mut self, kind: &PropertyKind) -> Option<()> {
        match *kind {
            PropertyKind::Scalar(ty) => {
                self.read(ty)?;
            }
            PropertyKind::List { count, item } => {
                let n = self.read(count)?;
                if !(n >= 0.0) {
                    return None;
                }
                for _ in 0..n as usize {
                    self.read(item)?;
                }
            }
        }
        Some(())
    }
}

const REQUIRED: [&str; 14] = [
    "x", "y", "z", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3",
    "opacity", "f_dc_0", "f_dc_1", "f_dc_2",
];

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Parses a Gaussian-splat PLY into a cloud. Each primitive with `f_rest`
/// coefficients gets its own entry in the cloud's local SH table.
pub fn parse_ply(bytes: &[u8], source_name: &str) -> Result<GaussianCloud, PlyError> {
    let header = parse_header(bytes)?;
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| PlyError::Schema("no `vertex` element".into()))?;
    let vertex = &header.elements[vertex_pos];

    let column = |name: &str| vertex.properties.iter().position(|p| p.name == name);
    let mut required = [0usize; REQUIRED.len()];
    for (slot, name) in required.iter_mut().zip(REQUIRED) {
        *slot = column(name).ok_or_else(|| PlyError::MissingProperty(name.into()))?;
    }
    let mut rest_columns = Vec::new();
    while let Some(c) = column(&format!("f_rest_{}", rest_columns.len())) {
        rest_columns.push(c);
    }
    let rest_total = vertex
        .properties
        .iter()
        .filter(|p| p.name.starts_with("f_rest_"))
        .count();
    if rest_total != rest_columns.len() {
        return Err(PlyError::Schema(format!(
            "f_rest properties are not numbered contiguously from 0 ({rest_total} present)"
        )));
    }
    let degree: u8 = match rest_columns.len() {
        0 => 0,
        9 => 1,
        24 => 2,
        45 => 3,
        n => {
            return Err(PlyError::Schema(format!(
                "{n} f_rest properties do not match SH degree 1, 2 or 3"
            )))
        }
    };
    for &c in required.iter().chain(&rest_columns) {
        if let PropertyKind::List { .. } = vertex.properties[c].kind {
            return Err(PlyError::Schema(format!(
                "property `{}` must be scalar",
                vertex.properties[c].name
            )));
        }
    }
    let basis = if degree > 0 { ShCoefficients::basis_count(degree) } else { 0 };

    let mut body = Body {
        format: header.format,
        bytes,
        pos: header.body_start,
    };
    for element in &header.elements[..vertex_pos] {
        for record in 0..element.count {
            for prop in &element.properties {
                body.skip_property(&prop.kind).ok_or_else(|| {
                    PlyError::Schema(format!(
                        "truncated `{}` element at record {record}",
                        element.name
                    ))
                })?;
            }
        }
    }

    let mut cloud = GaussianCloud {
        primitives: Vec::with_capacity(vertex.count),
        sh_table: Vec::with_capacity(if degree > 0 { vertex.count } else { 0 }),
        source_name: source_name.to_string(),
    };
    let mut values = vec![0.0f64; vertex.properties.len()];
    for v in 0..vertex.count {
        let data_err = |message: String| PlyError::Data { vertex: v, message };
        for (slot, prop) in values.iter_mut().zip(&vertex.properties) {
            match prop.kind {
                PropertyKind::Scalar(ty) => {
                    *slot = body
                        .read(ty)
                        .ok_or_else(|| data_err(format!("unreadable value for `{}`", prop.name)))?;
                }
                ref kind => {
                    body.skip_property(kind)
                        .ok_or_else(|| data_err(format!("unreadable list `{}`", prop.name)))?;
                }
            }
        }
        for &c in required.iter().chain(&rest_columns) {
            if !values[c].is_finite() {
                return Err(data_err(format!(
                    "non-finite `{}` = {}",
                    vertex.properties[c].name, values[c]
                )));
            }
        }
        let get = |i: usize| values[required[i]];

        let q = [get(6), get(7), get(8), get(9)];
        let qn = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(qn > 0.0) {
            return Err(data_err("zero-length rotation quaternion".into()));
        }
        let scale = [get(3).exp(), get(4).exp(), get(5).exp()];
        if !scale.iter().all(|s| s.is_finite() && (*s as f32).is_finite()) {
            return Err(data_err(format!("scale overflows: {scale:?}")));
        }

        let sh_index = if degree > 0 {
            let coeffs = (0..basis)
                .map(|j| {
                    [0, 1, 2].map(|ch| values[rest_columns[ch * basis + j]] as f32)
                })
                .collect();
            cloud
                .sh_table
                .push(ShCoefficients::new(degree, coeffs).expect("basis count matches degree"));
            Some((cloud.sh_table.len() - 1) as u32)
        } else {
            None
        };
        cloud.primitives.push(GaussianPrimitive {
            position: [get(0) as f32, get(1) as f32, get(2) as f32],
            scale: scale.map(|s| s as f32),
            rotation: q.map(|c| (c / qn) as f32),
            opacity: logistic(get(10)) as f32,
            dc_color: [get(11) as f32, get(12) as f32, get(13) as f32],
            sh_index,
        });
    }
    Ok(cloud)
}

fn logit(alpha: f64) -> f64 {
    // saturate so that logistic() maps back to exactly 0 or 1 at f32
    if alpha <= 0.0 {
        -104.0
    } else if alpha >= 1.0 {
        40.0
    } else {
        (alpha / (1.0 - alpha)).ln()
    }
}

/// Writes `cloud` as a binary little-endian PLY in the standard layout.
/// Primitives without an SH reference are written with zero `f_rest`.
pub fn write_ply(cloud: &GaussianCloud) -> Result<Vec<u8>, PlyError> {
    let degree = cloud.sh_table.first().map_or(0, |s| s.degree());
    if let Some(s) = cloud.sh_table.iter().find(|s| s.degree() != degree) {
        return Err(PlyError::Schema(format!(
            "cannot write mixed SH degrees {degree} and {}",
            s.degree()
        )));
    }
    let basis = if degree > 0 { ShCoefficients::basis_count(degree) } else { 0 };
    let floats_per_vertex = 17 + 3 * basis;

    let mut out = Vec::with_capacity(512 + cloud.primitives.len() * floats_per_vertex * 4);
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", cloud.primitives.len()));
    let mut names: Vec<String> = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
        .map(String::from)
        .to_vec();
    names.extend((0..3 * basis).map(|i| format!("f_rest_{i}")));
    names.extend(
        ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
            .map(String::from),
    );
    for name in &names {
        header.push_str(&format!("property float {name}\n"));
    }
    header.push_str("end_header\n");
    out.extend_from_slice(header.as_bytes());

    let mut record = Vec::with_capacity(floats_per_vertex);
    for (i, p) in cloud.primitives.iter().enumerate() {
        record.clear();
        record.extend_from_slice(&p.position);
        record.extend_from_slice(&[0.0; 3]);
        record.extend_from_slice(&p.dc_color);
        let sh = match p.sh_index {
            Some(idx) => Some(cloud.sh_table.get(idx as usize).ok_or_else(|| PlyError::Data {
                vertex: i,
                message: format!("dangling sh_index {idx}"),
            })?),
            None => None,
        };
        for ch in 0..3 {
            for j in 0..basis {
                record.push(sh.map_or(0.0, |s| s.coeffs()[j][ch]));
            }
        }
        record.push(logit(p.opacity as f64) as f32);
        record.extend(p.scale.iter().map(|s| (*s as f64).ln() as f32));
        record.extend_from_slice(&p.rotation);
        for v in &record {
            out.write_all(&v.to_le_bytes()).expect("write to Vec");
        }
    }
    Ok(out)
}
