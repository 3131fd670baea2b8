use std::path::{Path, PathBuf};

use bimgraph_core::bev::BevImage;
use bimgraph_core::rooms::RoomMaskSet;
use bimgraph_core::{GrayImage, GridTransform};
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, write_with};
use crate::error::{AppError, AppResult};

/// Decoded binary PGM.
#[derive(Debug, Clone, PartialEq)]
pub enum Pgm {
    Gray8 { width: u32, height: u32, data: Vec<u8> },
    Gray16 { width: u32, height: u32, data: Vec<u16> },
}

impl Pgm {
    pub fn dims(&self) -> (u32, u32) {
        match self {
            Pgm::Gray8 { width, height, .. } | Pgm::Gray16 { width, height, .. } => (*width, *height),
        }
    }
}

/// Reads a binary (P5) PGM with maxval up to 65535; 16-bit samples are
/// big-endian.
pub fn read_pgm(path: &Path) -> AppResult<Pgm> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let bad = |m: &str| AppError::format(path, m.to_string());
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad("bad PGM header number"));
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("PGM dimensions or maxval out of range"));
    }
    let n = width as usize * height as usize;
    let body = bytes.get(pos..).unwrap_or_default();
    if maxval < 256 {
        if body.len() < n {
            return Err(bad("PGM body is shorter than its header says"));
        }
        Ok(Pgm::Gray8 { width, height, data: body[..n].to_vec() })
    } else {
        if body.len() < 2 * n {
            return Err(bad("PGM body is shorter than its header says"));
        }
        let data = body[..2 * n].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        Ok(Pgm::Gray16 { width, height, data })
    }
}

pub fn write_pgm8(path: &Path, img: &GrayImage) -> AppResult<()> {
    write_with(path, |w| {
        write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
        w.write_all(&img.data)
    })
}

fn write_pgm16(path: &Path, width: u32, height: u32, data: &[u16]) -> AppResult<()> {
    write_with(path, |w| {
        write!(w, "P5\n{width} {height}\n65535\n")?;
        let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_be_bytes()).collect();
        w.write_all(&bytes)
    })
}

/// Geometry and timestamp stored next to a BEV image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BevSidecar {
    pub origin_xy: [f64; 2],
    pub meters_per_pixel: f64,
    pub padding_px: u32,
    pub grid_dim: u32,
    pub stamp: f64,
}

impl BevSidecar {
    pub fn transform(&self) -> GridTransform {
        GridTransform {
            origin_xy: self.origin_xy,
            meters_per_pixel: self.meters_per_pixel,
            padding_px: self.padding_px,
            grid_dim: self.grid_dim,
        }
    }
}

pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

/// Writes `<name>.pgm` and its `<name>.json` sidecar.
pub fn write_bev(path: &Path, bev: &BevImage) -> AppResult<()> {
    write_pgm8(path, &bev.image)?;
    let t = bev.transform;
    let sidecar = BevSidecar {
        origin_xy: t.origin_xy,
        meters_per_pixel: t.meters_per_pixel,
        padding_px: t.padding_px,
        grid_dim: t.grid_dim,
        stamp: bev.stamp,
    };
    write_json(&sidecar_path(path), &sidecar)
}

pub fn read_bev(path: &Path) -> AppResult<BevImage> {
    let Pgm::Gray8 { width, height, data } = read_pgm(path)? else {
        return Err(AppError::format(path, "BEV images are 8-bit"));
    };
    let side: BevSidecar = read_json(&sidecar_path(path))?;
    let transform = side.transform();
    let dim = transform.image_dim();
    if width != dim || height != dim {
        return Err(AppError::format(path, format!("image is {width}x{height}, sidecar says {dim}x{dim}")));
    }
    let image = GrayImage::from_raw(width, height, data)?;
    Ok(BevImage { image, transform, stamp: side.stamp })
}

/// 16-bit label raster, 0 for background.
pub fn write_label_raster(path: &Path, masks: &RoomMaskSet) -> AppResult<()> {
    write_pgm16(path, masks.width, masks.height, &masks.labels)
}

/// Reads a label raster (8- or 16-bit). Ids are renumbered densely in their
/// original order.
pub fn read_label_raster(path: &Path, transform: Option<GridTransform>) -> AppResult<RoomMaskSet> {
    let (width, height, labels) = match read_pgm(path)? {
        Pgm::Gray8 { width, height, data } => (width, height, data.into_iter().map(u16::from).collect()),
        Pgm::Gray16 { width, height, data } => (width, height, data),
    };
    if let Some(t) = transform {
        if width != t.image_dim() || height != t.image_dim() {
            return Err(AppError::format(path, format!("label raster is {width}x{height}, expected {0}x{0}", t.image_dim())));
        }
    }
    Ok(RoomMaskSet::from_labels(width, height, labels, transform)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bev_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bev.pgm");
        let gt = GridTransform::new([-3.5, 2.0], 0.037).unwrap();
        let mut bev = BevImage::blank(gt, 12.5);
        bev.image.set(100, 200, 0);
        write_bev(&path, &bev).unwrap();
        assert!(dir.path().join("bev.json").exists());
        assert_eq!(read_bev(&path).unwrap(), bev);
    }

    #[test]
    fn label_raster_round_trip_keeps_large_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rooms.pgm");
        let labels: Vec<u16> = (0..64 * 64).map(|i| (i % 300) as u16).collect();
        let m = RoomMaskSet::from_labels(64, 64, labels, None).unwrap();
        write_label_raster(&path, &m).unwrap();
        assert_eq!(read_label_raster(&path, None).unwrap(), m);
    }

    #[test]
    fn malformed_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        std::fs::write(&path, b"P5\n4 4\n255\n\0\0").unwrap();
        assert!(read_pgm(&path).is_err());
        std::fs::write(&path, b"P2\n1 1\n255\n0").unwrap();
        assert!(read_pgm(&path).is_err());
        std::fs::write(&path, b"P5 # comment\n2 1\n255\n\x01\x02").unwrap();
        assert_eq!(read_pgm(&path).unwrap(), Pgm::Gray8 { width: 2, height: 1, data: vec![1, 2] });
    }
}
