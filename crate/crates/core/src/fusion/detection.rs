use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Run-length encoded binary mask over a whole camera image. Runs alternate
/// background/foreground in row-major order, starting with background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskRle {
    pub width: u32,
    pub height: u32,
    pub runs: Vec<u32>,
}

impl MaskRle {
    pub fn encode(width: u32, height: u32, mask: &[bool]) -> Self {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &m in mask {
            if m != current {
                runs.push(len);
                current = m;
                len = 0;
            }
            len += 1;
        }
        runs.push(len);
        Self { width, height, runs }
    }

    pub fn decode(&self) -> Result<Vec<bool>> {
        let total = self.width as usize * self.height as usize;
        let mut out = vec![false; total];
        let mut pos = 0usize;
        for (i, &r) in self.runs.iter().enumerate() {
            let end = pos + r as usize;
            if end > total {
                return Err(Error::Malformed("mask runs exceed the image size".into()));
            }
            if i % 2 == 1 {
                out[pos..end].fill(true);
            }
            pos = end;
        }
        if pos != total {
            return Err(Error::Malformed(alloc::format!(
                "mask runs cover {pos} of {total} pixels"
            )));
        }
        Ok(out)
    }

    pub fn area(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }
}

/// One 2D detection from an external detector. `bbox` is `[x, y, w, h]` in
/// pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub stamp: f64,
    pub class_id: u32,
    pub class_name: String,
    pub bbox: [u32; 4],
    #[serde(rename = "mask_rle")]
    pub mask: MaskRle,
    pub confidence: f64,
}

impl Detection {
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        let [x, y, w, h] = self.bbox;
        if w == 0 || h == 0 || x as u64 + w as u64 > width as u64 || y as u64 + h as u64 > height as u64 {
            return Err(Error::InvalidArgument(alloc::format!(
                "bbox {:?} outside a {width}x{height} image",
                self.bbox
            )));
        }
        if self.mask.width != width || self.mask.height != height {
            return Err(Error::DimensionMismatch(self.mask.width, self.mask.height, width, height));
        }
        if !(0.0..=1.0).contains(&self.confidence) || !self.stamp.is_finite() {
            return Err(Error::InvalidArgument("confidence or stamp out of range".into()));
        }
        let mask = self.mask.decode()?;
        for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let (u, v) = ((i % width as usize) as u32, (i / width as usize) as u32);
            if u < x || v < y || u >= x + w || v >= y + h {
                return Err(Error::InvalidArgument("mask extends beyond its bbox".into()));
            }
        }
        Ok(())
    }

    /// Bounding box `[x, y, w, h]` of the mask pixels.
    pub fn mask_bbox(mask: &[bool], width: u32) -> Option<[u32; 4]> {
        let mut b = [u32::MAX, u32::MAX, 0, 0];
        let mut any = false;
        for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let (u, v) = ((i % width as usize) as u32, (i / width as usize) as u32);
            b = [b[0].min(u), b[1].min(v), b[2].max(u), b[3].max(v)];
            any = true;
        }
        any.then(|| [b[0], b[1], b[2] - b[0] + 1, b[3] - b[1] + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rle_round_trip() {
        let mask = [true, true, false, false, false, true, false, true, true];
        let rle = MaskRle::encode(3, 3, &mask);
        assert_eq!(rle.runs, vec![0, 2, 3, 1, 1, 2]);
        assert_eq!(rle.decode().unwrap(), mask.to_vec());
        assert_eq!(rle.area(), 5);
    }

    #[test]
    fn short_runs_are_malformed() {
        let rle = MaskRle { width: 2, height: 2, runs: vec![1, 1] };
        assert!(rle.decode().is_err());
    }

    #[test]
    fn mask_outside_bbox_is_rejected() {
        let mut mask = vec![false; 16];
        mask[5] = true;
        mask[15] = true;
        let det = Detection {
            stamp: 0.0,
            class_id: 0,
            class_name: "chair".into(),
            bbox: [1, 1, 2, 2],
            mask: MaskRle::encode(4, 4, &mask),
            confidence: 0.9,
        };
        assert!(det.validate(4, 4).is_err());
        mask[15] = false;
        let det = Detection { mask: MaskRle::encode(4, 4, &mask), ..det };
        det.validate(4, 4).unwrap();
    }
}
