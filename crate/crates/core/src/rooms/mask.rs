use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GridTransform, Pixel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomInstance {
    pub id: u16,
    pub pixel_count: u32,
    /// Inclusive `[min_u, min_v, max_u, max_v]`.
    pub bbox: [u32; 4],
    /// Mean pixel index `(u, v)`.
    pub centroid_px: [f64; 2],
}

/// Room instances as a label raster; `0` is background or wall.
///
/// Ids are dense from 1. When produced from a BEV image the raster shares its
/// [`GridTransform`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoomMaskSet {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u16>,
    pub instances: Vec<RoomInstance>,
    pub transform: Option<GridTransform>,
}

impl RoomMaskSet {
    pub fn empty(width: u32, height: u32, transform: Option<GridTransform>) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width as usize * height as usize],
            instances: Vec::new(),
            transform,
        }
    }

    /// Builds the instance table from a label raster, renumbering ids densely
    /// from 1 while keeping their relative order.
    pub fn from_labels(
        width: u32,
        height: u32,
        mut labels: Vec<u16>,
        transform: Option<GridTransform>,
    ) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::Malformed(alloc::format!(
                "{} labels for a {width}x{height} raster",
                labels.len()
            )));
        }
        let mut present = vec![false; 1 << 16];
        for &l in &labels {
            present[l as usize] = true;
        }
        let mut remap = vec![0u16; 1 << 16];
        let mut next = 0u16;
        for (id, slot) in remap.iter_mut().enumerate().skip(1) {
            if present[id] {
                next += 1;
                *slot = next;
            }
        }
        if (1..=next as usize).any(|id| remap[id] != id as u16) {
            for l in labels.iter_mut() {
                *l = remap[*l as usize];
            }
        }
        let mut set = Self { width, height, labels, instances: Vec::new(), transform };
        set.instances = set.compute_instances(next);
        Ok(set)
    }

    fn compute_instances(&self, n: u16) -> Vec<RoomInstance> {
        let n = n as usize;
        let mut count = vec![0u32; n + 1];
        let mut sum = vec![[0.0f64; 2]; n + 1];
        let mut bbox = vec![[u32::MAX, u32::MAX, 0, 0]; n + 1];
        for v in 0..self.height {
            for u in 0..self.width {
                let l = self.labels[self.index(u, v)] as usize;
                if l == 0 {
                    continue;
                }
                count[l] += 1;
                sum[l][0] += u as f64;
                sum[l][1] += v as f64;
                let b = &mut bbox[l];
                b[0] = b[0].min(u);
                b[1] = b[1].min(v);
                b[2] = b[2].max(u);
                b[3] = b[3].max(v);
            }
        }
        (1..=n)
            .map(|l| RoomInstance {
                id: l as u16,
                pixel_count: count[l],
                bbox: bbox[l],
                centroid_px: [sum[l][0] / count[l] as f64, sum[l][1] / count[l] as f64],
            })
            .collect()
    }

    #[inline]
    pub fn index(&self, u: u32, v: u32) -> usize {
        v as usize * self.width as usize + u as usize
    }

    #[inline]
    pub fn label_at(&self, px: Pixel) -> u16 {
        if px.u >= self.width || px.v >= self.height {
            return 0;
        }
        self.labels[self.index(px.u, px.v)]
    }

    pub fn instance(&self, id: u16) -> Option<&RoomInstance> {
        id.checked_sub(1).and_then(|i| self.instances.get(i as usize))
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Pixels of one instance in row-major order.
    pub fn pixels_of(&self, id: u16) -> Vec<Pixel> {
        let Some(inst) = self.instance(id) else { return Vec::new() };
        let [u0, v0, u1, v1] = inst.bbox;
        let mut out = Vec::with_capacity(inst.pixel_count as usize);
        for v in v0..=v1 {
            for u in u0..=u1 {
                if self.labels[self.index(u, v)] == id {
                    out.push(Pixel::new(u, v));
                }
            }
        }
        out
    }

    /// Applies `map` to every instance id (0 stays 0) and rebuilds the table.
    pub fn relabeled(&self, map: &BTreeMap<u16, u16>) -> Result<Self> {
        let labels =
            self.labels.iter().map(|&l| if l == 0 { 0 } else { map.get(&l).copied().unwrap_or(0) });
        Self::from_labels(self.width, self.height, labels.collect(), self.transform)
    }

    /// Checks the raster invariants: dense ids and a consistent instance table.
    pub fn validate(&self) -> Result<()> {
        let max = self.labels.iter().copied().max().unwrap_or(0) as usize;
        if max != self.instances.len() {
            return Err(Error::Malformed("instance ids are not dense".into()));
        }
        if self.compute_instances(max as u16) != self.instances {
            return Err(Error::Malformed("instance table does not match raster".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_compacted_in_order() {
        let labels = vec![0, 7, 7, 3, 0, 3];
        let set = RoomMaskSet::from_labels(3, 2, labels, None).unwrap();
        assert_eq!(set.labels, vec![0, 2, 2, 1, 0, 1]);
        assert_eq!(set.len(), 2);
        assert_eq!(set.instance(1).unwrap().pixel_count, 2);
        assert_eq!(set.instance(2).unwrap().bbox, [1, 0, 2, 0]);
        assert_eq!(set.instance(1).unwrap().centroid_px, [1.0, 1.0]);
        set.validate().unwrap();
    }

    #[test]
    fn wrong_size_is_rejected() {
        assert!(RoomMaskSet::from_labels(3, 3, vec![0; 8], None).is_err());
    }
}
