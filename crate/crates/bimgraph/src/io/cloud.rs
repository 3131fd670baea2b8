use std::path::Path;

use bimgraph_core::pix2vox::ColoredCloud;
use bimgraph_core::{Point3, PointCloudMap};

use super::write_with;
use crate::error::{AppError, AppResult};

/// Points with an optional per-point timestamp (when the point entered the
/// map, for replayable sessions).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimedCloud {
    pub points: Vec<Point3>,
    pub stamps: Option<Vec<f64>>,
}

impl TimedCloud {
    pub fn into_map(self, stamp: f64) -> PointCloudMap {
        PointCloudMap { points: self.points, stamp }
    }
}

/// Reads `.ply` (ASCII or binary little-endian) or whitespace-separated
/// `x y z [stamp]` text.
pub fn read_cloud(path: &Path) -> AppResult<TimedCloud> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let is_ply = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply")) || bytes.starts_with(b"ply");
    let cloud = if is_ply { parse_ply(path, &bytes)? } else { parse_xyz(path, &bytes)? };
    if let Some((i, _)) = cloud.points.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(AppError::format(path, format!("point {i} is not finite")));
    }
    Ok(cloud)
}

fn parse_xyz(path: &Path, bytes: &[u8]) -> AppResult<TimedCloud> {
    let text = std::str::from_utf8(bytes).map_err(|_| AppError::format(path, "not UTF-8 text"))?;
    let mut points = Vec::new();
    let mut stamps = Vec::new();
    let mut width = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = parse_numbers(path, n + 1, line.split_whitespace())?;
        if !(vals.len() == 3 || vals.len() == 4) || width.is_some_and(|w| w != vals.len()) {
            return Err(AppError::parse(path, n + 1, "expected `x y z` or `x y z stamp` on every line"));
        }
        width = Some(vals.len());
        points.push(Point3::new(vals[0], vals[1], vals[2]));
        if vals.len() == 4 {
            stamps.push(vals[3]);
        }
    }
    Ok(TimedCloud { points, stamps: (width == Some(4)).then_some(stamps) })
}

fn parse_numbers<'a>(path: &Path, line: usize, it: impl Iterator<Item = &'a str>) -> AppResult<Vec<f64>> {
    it.map(|t| t.parse::<f64>().map_err(|_| AppError::parse(path, line, format!("bad number `{t}`"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
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
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

fn parse_ply(path: &Path, bytes: &[u8]) -> AppResult<TimedCloud> {
    let header_end = bytes
        .windows(11)
        .position(|w| w == b"end_header\n" || w.starts_with(b"end_header\r"))
        .ok_or_else(|| AppError::format(path, "PLY header has no end_header"))?;
    let body_start = header_end + bytes[header_end..].iter().position(|&b| b == b'\n').unwrap() + 1;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| AppError::format(path, "PLY header is not text"))?;

    let mut binary = false;
    let mut vertices: Option<usize> = None;
    let mut props: Vec<(String, Scalar)> = Vec::new();
    let mut in_vertex = false;
    let mut header_lines = 0;
    for (n, line) in header.lines().enumerate() {
        header_lines = n + 2;
        let t: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| AppError::parse(path, n + 1, m.to_string());
        match t.as_slice() {
            ["ply"] | [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => binary = false,
            ["format", "binary_little_endian", _] => binary = true,
            ["format", other, _] => return Err(bad(&format!("unsupported PLY format `{other}`"))),
            ["element", name, count] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    if vertices.is_some() {
                        return Err(bad("duplicate vertex element"));
                    }
                    vertices = Some(count.parse().map_err(|_| bad("bad vertex count"))?);
                    in_vertex = true;
                } else if vertices.is_none() {
                    return Err(bad("the vertex element must come first"));
                }
            }
            ["property", "list", ..] if in_vertex => return Err(bad("list properties on vertices are not supported")),
            ["property", ty, name] if in_vertex => {
                let s = Scalar::parse(ty).ok_or_else(|| bad(&format!("unknown property type `{ty}`")))?;
                props.push((name.to_string(), s));
            }
            ["property", ..] => {}
            _ => return Err(bad(&format!("unexpected header line `{line}`"))),
        }
    }
    let n = vertices.ok_or_else(|| AppError::format(path, "PLY has no vertex element"))?;
    let col = |name: &str| props.iter().position(|(p, _)| p == name);
    let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
        return Err(AppError::format(path, "PLY vertices need x, y and z properties"));
    };
    let it = col("stamp").or_else(|| col("time"));

    let mut points = Vec::with_capacity(n);
    let mut stamps = it.map(|_| Vec::with_capacity(n));
    let body = &bytes[body_start..];
    if binary {
        let stride: usize = props.iter().map(|(_, s)| s.size()).sum();
        let offsets: Vec<usize> = props
            .iter()
            .scan(0, |o, (_, s)| {
                let here = *o;
                *o += s.size();
                Some(here)
            })
            .collect();
        if body.len() < n * stride {
            return Err(AppError::format(path, format!("binary body holds fewer than {n} vertices")));
        }
        let get = |rec: &[u8], i: usize| props[i].1.read_le(&rec[offsets[i]..]);
        for rec in body.chunks_exact(stride).take(n) {
            points.push(Point3::new(get(rec, ix), get(rec, iy), get(rec, iz)));
            if let (Some(s), Some(i)) = (stamps.as_mut(), it) {
                s.push(get(rec, i));
            }
        }
    } else {
        let text = std::str::from_utf8(body).map_err(|_| AppError::format(path, "PLY body is not text"))?;
        let mut lines = text.lines().enumerate();
        for _ in 0..n {
            let (k, line) = lines
                .next()
                .ok_or_else(|| AppError::format(path, format!("PLY ends before {n} vertices")))?;
            let vals = parse_numbers(path, header_lines + k, line.split_whitespace())?;
            if vals.len() < props.len() {
                return Err(AppError::parse(path, header_lines + k, format!("expected {} values", props.len())));
            }
            points.push(Point3::new(vals[ix], vals[iy], vals[iz]));
            if let (Some(s), Some(i)) = (stamps.as_mut(), it) {
                s.push(vals[i]);
            }
        }
    }
    Ok(TimedCloud { points, stamps })
}

/// ASCII PLY with double `x y z` and, when given, a double `stamp`.
pub fn write_ply(path: &Path, points: &[Point3], stamps: Option<&[f64]>) -> AppResult<()> {
    if stamps.is_some_and(|s| s.len() != points.len()) {
        return Err(AppError::Usage("one stamp per point is required".into()));
    }
    write_with(path, |w| {
        writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", points.len())?;
        writeln!(w, "property double x\nproperty double y\nproperty double z")?;
        if stamps.is_some() {
            writeln!(w, "property double stamp")?;
        }
        writeln!(w, "end_header")?;
        for (i, p) in points.iter().enumerate() {
            match stamps {
                Some(s) => writeln!(w, "{} {} {} {}", p.x, p.y, p.z, s[i])?,
                None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
            }
        }
        Ok(())
    })
}

/// ASCII PLY with float `x y z` and uchar `red green blue`.
pub fn write_colored_ply(path: &Path, cloud: &ColoredCloud) -> AppResult<()> {
    write_with(path, |w| {
        writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", cloud.points.len())?;
        writeln!(w, "property float x\nproperty float y\nproperty float z")?;
        writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header")?;
        for (p, [r, g, b]) in cloud.points.iter().zip(&cloud.colors) {
            writeln!(w, "{} {} {} {r} {g} {b}", p.x as f32, p.y as f32, p.z as f32)?;
        }
        Ok(())
    })
}
