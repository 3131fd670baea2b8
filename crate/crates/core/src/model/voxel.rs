use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::geometry::Point3;
use super::grid::{GridTransform, Pixel};
use crate::error::{Error, Result};
use crate::math::{ceil, floor};

/// Default voxel edge in meters.
pub const DEFAULT_VOXEL_SIZE: f64 = 0.10;

const PACK_BITS: u32 = 21;
const PACK_BIAS: i64 = 1 << (PACK_BITS - 1);

/// Order-preserving 63-bit encoding of a key whose indices fit in 21 bits.
fn pack(k: VoxelKey) -> Option<u64> {
    let f = |i: i32| {
        let b = i as i64 + PACK_BIAS;
        (0..1 << PACK_BITS).contains(&b).then_some(b as u64)
    };
    Some(f(k.ix)? << (2 * PACK_BITS) | f(k.iy)? << PACK_BITS | f(k.iz)?)
}

fn unpack(p: u64) -> VoxelKey {
    let mask = (1u64 << PACK_BITS) - 1;
    let f = |b: u64| ((b & mask) as i64 - PACK_BIAS) as i32;
    VoxelKey { ix: f(p >> (2 * PACK_BITS)), iy: f(p >> PACK_BITS), iz: f(p) }
}

/// Integer voxel index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VoxelKey {
    pub ix: i32,
    pub iy: i32,
    pub iz: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoxelCell {
    pub count: u32,
    pub min_z: f64,
    pub max_z: f64,
}

/// Sparse voxelization of a pointcloud.
///
/// The XY lattice is anchored at `origin_xy` and is built from `base` cells cut
/// into `subdivisions` voxels per side, so a grid aligned to a
/// [`GridTransform`] nests every voxel inside exactly one BEV pixel. Cells are
/// kept sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    origin_xy: [f64; 2],
    base: f64,
    subdivisions: u32,
    voxel_size: f64,
    cells: Vec<(VoxelKey, VoxelCell)>,
}

impl VoxelGrid {
    /// Voxel grid anchored at the world origin.
    pub fn from_points(points: &[Point3], voxel_size: f64) -> Result<Self> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::InvalidArgument("voxel_size must be positive".into()));
        }
        Ok(Self::build(points, [0.0, 0.0], voxel_size, 1))
    }

    /// Voxel grid whose XY cells subdivide the pixels of `gt`, with an edge no
    /// larger than `max_voxel_size`.
    pub fn aligned(points: &[Point3], gt: &GridTransform, max_voxel_size: f64) -> Result<Self> {
        if !(max_voxel_size > 0.0 && max_voxel_size.is_finite()) {
            return Err(Error::InvalidArgument("voxel_size must be positive".into()));
        }
        let k = ceil(gt.meters_per_pixel / max_voxel_size - 1e-9).max(1.0) as u32;
        Ok(Self::build(points, gt.origin_xy, gt.meters_per_pixel, k))
    }

    fn build(points: &[Point3], origin_xy: [f64; 2], base: f64, subdivisions: u32) -> Self {
        let mut grid = Self {
            origin_xy,
            base,
            subdivisions,
            voxel_size: base / subdivisions as f64,
            cells: Vec::new(),
        };
        let keys = points.iter().map(|p| grid.key_of(p));
        let keyed: Vec<(VoxelKey, f64)> = match keys.clone().map(pack).collect::<Option<Vec<u64>>>() {
            // Sorting packed integers is several times faster than tuples.
            Some(packed) => {
                let mut order: Vec<(u64, f64)> = packed.into_iter().zip(points.iter().map(|p| p.z)).collect();
                order.sort_unstable_by_key(|e| e.0);
                order.into_iter().map(|(k, z)| (unpack(k), z)).collect()
            }
            None => {
                let mut v: Vec<(VoxelKey, f64)> = keys.zip(points.iter().map(|p| p.z)).collect();
                v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
                v
            }
        };

        let mut cells: Vec<(VoxelKey, VoxelCell)> = Vec::new();
        for (key, z) in keyed {
            match cells.last_mut() {
                Some((k, c)) if *k == key => {
                    c.count += 1;
                    c.min_z = c.min_z.min(z);
                    c.max_z = c.max_z.max(z);
                }
                _ => cells.push((key, VoxelCell { count: 1, min_z: z, max_z: z })),
            }
        }
        grid.cells = cells;
        grid
    }

    #[inline]
    fn axis_index(&self, offset: f64) -> i32 {
        let t = offset / self.base;
        let whole = floor(t);
        let k = self.subdivisions as f64;
        let sub = floor((t - whole) * k).clamp(0.0, k - 1.0);
        (whole * k + sub) as i32
    }

    #[inline]
    pub fn key_of(&self, p: &Point3) -> VoxelKey {
        VoxelKey {
            ix: self.axis_index(p.x - self.origin_xy[0]),
            iy: self.axis_index(p.y - self.origin_xy[1]),
            iz: floor(p.z / self.voxel_size) as i32,
        }
    }

    /// Interior bin of the lattice cell containing `key`, when the grid was
    /// built with [`VoxelGrid::aligned`].
    #[inline]
    pub fn bin_of(&self, key: &VoxelKey) -> (i32, i32) {
        let k = self.subdivisions as i32;
        (key.ix.div_euclid(k), key.iy.div_euclid(k))
    }

    /// Pixel of `key` under `gt`, or `None` if the column is outside the grid.
    pub fn pixel_of(&self, key: &VoxelKey, gt: &GridTransform) -> Option<Pixel> {
        let (bx, by) = self.bin_of(key);
        let dim = gt.grid_dim as i32;
        if bx < 0 || by < 0 || bx >= dim || by >= dim {
            return None;
        }
        Some(Pixel::new(bx as u32 + gt.padding_px, by as u32 + gt.padding_px))
    }

    /// XY center of the voxel in world coordinates.
    pub fn center_xy(&self, key: &VoxelKey) -> [f64; 2] {
        [
            self.origin_xy[0] + (key.ix as f64 + 0.5) * self.voxel_size,
            self.origin_xy[1] + (key.iy as f64 + 0.5) * self.voxel_size,
        ]
    }

    pub fn is_aligned_with(&self, gt: &GridTransform) -> bool {
        self.origin_xy == gt.origin_xy && self.base == gt.meters_per_pixel
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn subdivisions(&self) -> u32 {
        self.subdivisions
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, key: &VoxelKey) -> Option<&VoxelCell> {
        self.cells.binary_search_by(|(k, _)| k.cmp(key)).ok().map(|i| &self.cells[i].1)
    }

    pub fn contains(&self, key: &VoxelKey) -> bool {
        self.get(key).is_some()
    }

    /// Cells in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (&VoxelKey, &VoxelCell)> {
        self.cells.iter().map(|(k, c)| (k, c))
    }

    pub fn total_points(&self) -> u64 {
        self.cells.iter().map(|(_, c)| c.count as u64).sum()
    }
}
