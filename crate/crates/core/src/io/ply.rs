//! PLY point clouds.
//!
//! Reads ASCII and binary little-endian files. The `vertex` element must have
//! float or double `x`, `y`, `z`. Every other float/double vertex property
//! becomes a feature channel in header order; `red`, `green`, `blue` stored as
//! `uchar` become channels scaled by `1/255`. Any other vertex property type
//! is rejected. A vertex element with no feature properties yields a single
//! channel of ones.
//!
//! The writer emits `x y z` followed by `feature_0 .. feature_{C-1}`, all as
//! `float`.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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
    fn parse(name: &str) -> Result<Scalar> {
        Ok(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            other => return Err(Error::format(format!("unknown PLY type `{other}`"))),
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

    fn is_float(self) -> bool {
        matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Clone, Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Clone, Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// What to do with each vertex property.
#[derive(Clone, Copy, Debug)]
enum Role {
    Coord(usize),
    Feature { divisor: f64 },
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    body_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut next_line = || -> Result<String> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::format("PLY header is not terminated by end_header"))?;
        pos += end + 1;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::format("PLY header is not valid UTF-8"))?;
        Ok(line.trim_end_matches('\r').to_string())
    };
    if next_line()?.trim() != "ply" {
        return Err(Error::format("missing `ply` magic"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => continue,
            ["end_header"] => break,
            ["comment", ..] | ["obj_info", ..] => continue,
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    other => return Err(Error::format(format!("unsupported PLY format `{other}`"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| Error::format(format!("bad element count `{count}`")))?,
                properties: Vec::new(),
            }),
            ["property", "list", count, item, _name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::format("property before any element"))?;
                el.properties
                    .push(Property::List { count: Scalar::parse(count)?, item: Scalar::parse(item)? });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::format("property before any element"))?;
                el.properties.push(Property::Scalar { name: name.to_string(), ty: Scalar::parse(ty)? });
            }
            _ => return Err(Error::format(format!("unrecognized PLY header line `{line}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::format("PLY header has no format line"))?;
    Ok(Header { encoding, elements, body_start: pos })
}

fn vertex_roles(el: &Element) -> Result<(Vec<Role>, usize)> {
    let mut roles = Vec::new();
    let mut coords = [false; 3];
    let mut channels = 0;
    for prop in &el.properties {
        match prop {
            Property::List { .. } => {
                return Err(Error::format("list properties are not supported on vertices"))
            }
            Property::Scalar { name, ty } => {
                let axis = ["x", "y", "z"].iter().position(|a| a == name);
                match (axis, ty) {
                    (Some(a), t) if t.is_float() => {
                        coords[a] = true;
                        roles.push(Role::Coord(a));
                    }
                    (Some(_), _) => {
                        return Err(Error::format(format!("vertex `{name}` must be float or double")))
                    }
                    (None, t) if t.is_float() => {
                        channels += 1;
                        roles.push(Role::Feature { divisor: 1.0 });
                    }
                    (None, Scalar::U8) if matches!(name.as_str(), "red" | "green" | "blue") => {
                        channels += 1;
                        roles.push(Role::Feature { divisor: 255.0 });
                    }
                    (None, t) => {
                        return Err(Error::format(format!(
                            "unsupported type {t:?} for vertex property `{name}`"
                        )))
                    }
                }
            }
        }
    }
    if let Some(a) = coords.iter().position(|c| !c) {
        return Err(Error::format(format!("vertex element has no `{}` property", ["x", "y", "z"][a])));
    }
    Ok((roles, channels))
}

struct AsciiBody<'a> {
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl AsciiBody<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| Error::format("PLY body ended early"))?;
        let bad = || Error::format(format!("bad PLY number `{tok}`"));
        // Parse at the declared precision so ASCII and binary files agree.
        match ty {
            Scalar::F32 => tok.parse::<f32>().map(f64::from).map_err(|_| bad()),
            Scalar::F64 => tok.parse::<f64>().map_err(|_| bad()),
            _ => tok.parse::<i64>().map(|v| v as f64).map_err(|_| bad()),
        }
    }
}

struct BinaryBody<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BinaryBody<'_> {
    fn next(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        let b = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::format("PLY body ended early"))?;
        self.pos += n;
        Ok(match ty {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b.try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b.try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b.try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b.try_into().unwrap()),
        })
    }
}

/// Parses a PLY file held in memory.
pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    let vertex = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::format("PLY file has no vertex element"))?;
    let (roles, channels) = vertex_roles(&header.elements[vertex])?;
    let body = &bytes[header.body_start..];

    let mut read: Box<dyn FnMut(Scalar) -> Result<f64>> = match header.encoding {
        PlyEncoding::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| Error::format("ASCII PLY body is not UTF-8"))?;
            let mut b = AsciiBody { tokens: text.split_ascii_whitespace() };
            Box::new(move |ty| b.next(ty))
        }
        PlyEncoding::BinaryLittleEndian => {
            let mut b = BinaryBody { bytes: body, pos: 0 };
            Box::new(move |ty| b.next(ty))
        }
    };

    let mut positions = Vec::new();
    let mut features = Vec::new();
    for (ei, el) in header.elements.iter().enumerate() {
        if ei == vertex {
            positions.reserve(el.count);
            features.reserve(el.count * channels.max(1));
            for _ in 0..el.count {
                let mut p = Vector3::zeros();
                for (prop, role) in el.properties.iter().zip(&roles) {
                    let Property::Scalar { ty, .. } = prop else { unreachable!() };
                    let v = read(*ty)?;
                    match role {
                        Role::Coord(a) => p[*a] = v,
                        Role::Feature { divisor } => features.push(v / divisor),
                    }
                }
                if channels == 0 {
                    features.push(1.0);
                }
                positions.push(p);
            }
        } else if ei < vertex {
            // Elements after the vertex block are never read.
            for _ in 0..el.count {
                for prop in &el.properties {
                    match prop {
                        Property::Scalar { ty, .. } => {
                            read(*ty)?;
                        }
                        Property::List { count, item } => {
                            let n = read(*count)?;
                            if !(n >= 0.0) {
                                return Err(Error::format("negative PLY list length"));
                            }
                            for _ in 0..n as usize {
                                read(*item)?;
                            }
                        }
                    }
                }
            }
        }
    }
    PointCloud::new(positions, features, channels.max(1))
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    parse_ply(&fs::read(path)?)
}

/// Serializes a cloud; positions and features are stored as `float`.
pub fn encode_ply(cloud: &PointCloud, encoding: PlyEncoding) -> Vec<u8> {
    let mut out = Vec::new();
    let fmt = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    writeln!(out, "ply\nformat {fmt} 1.0\ncomment softsplat point cloud").unwrap();
    writeln!(out, "element vertex {}", cloud.len()).unwrap();
    for axis in ["x", "y", "z"] {
        writeln!(out, "property float {axis}").unwrap();
    }
    for c in 0..cloud.channels() {
        writeln!(out, "property float feature_{c}").unwrap();
    }
    writeln!(out, "end_header").unwrap();
    for i in 0..cloud.len() {
        let p = cloud.positions()[i];
        let values = p.iter().chain(cloud.feature(i)).map(|&v| v as f32);
        match encoding {
            PlyEncoding::Ascii => {
                let line: Vec<String> = values.map(|v| v.to_string()).collect();
                writeln!(out, "{}", line.join(" ")).unwrap();
            }
            PlyEncoding::BinaryLittleEndian => {
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    out
}

pub fn write_ply(path: impl AsRef<Path>, cloud: &PointCloud, encoding: PlyEncoding) -> Result<()> {
    fs::write(path, encode_ply(cloud, encoding))?;
    Ok(())
}
