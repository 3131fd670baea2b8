//! Pixel ↔ voxel-column association, room colorization of the pointcloud
//! and room centroids in world coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{GridTransform, Pixel, Point3, PointCloudMap, VoxelGrid, VoxelKey};
use crate::rooms::RoomMaskSet;

/// Voxel columns per BEV pixel, stored compactly (CSR, row-major pixels).
#[derive(Debug, Clone, PartialEq)]
pub struct PixelVoxelIndex {
    pub transform: GridTransform,
    pub grid: VoxelGrid,
    offsets: Vec<u32>,
    keys: Vec<VoxelKey>,
    /// Lowest point per pixel column, infinite where the column is empty.
    floor_z: Vec<f64>,
}

/// Assigns every occupied voxel of a grid aligned with `gt` to the pixel
/// holding its XY center.
pub fn build_index(grid: VoxelGrid, gt: &GridTransform) -> Result<PixelVoxelIndex> {
    if grid.is_empty() {
        return Err(Error::EmptyMap);
    }
    if !grid.is_aligned_with(gt) {
        return Err(Error::TransformMismatch);
    }
    let dim = gt.image_dim() as usize;
    let mut pixel_of = Vec::with_capacity(grid.len());
    let mut offsets = vec![0u32; dim * dim + 1];
    let mut floor_z = vec![f64::INFINITY; dim * dim];
    for (key, cell) in grid.iter() {
        let [x, y] = grid.center_xy(key);
        let px = gt.xy_to_pixel(x, y).ok_or_else(|| {
            Error::InvariantViolation(alloc::format!("voxel {key:?} lies outside the BEV grid"))
        })?;
        let i = px.v as usize * dim + px.u as usize;
        pixel_of.push(i as u32);
        offsets[i + 1] += 1;
        floor_z[i] = floor_z[i].min(cell.min_z);
    }
    for i in 1..offsets.len() {
        offsets[i] += offsets[i - 1];
    }
    // Counting sort by pixel; keys stay ascending within a column.
    let mut fill = offsets.clone();
    let mut keys = vec![VoxelKey { ix: 0, iy: 0, iz: 0 }; grid.len()];
    for ((key, _), &p) in grid.iter().zip(&pixel_of) {
        keys[fill[p as usize] as usize] = *key;
        fill[p as usize] += 1;
    }
    Ok(PixelVoxelIndex { transform: *gt, grid, offsets, keys, floor_z })
}

impl PixelVoxelIndex {
    /// Voxels whose column maps to `px`; empty for padding or unmapped pixels.
    pub fn column(&self, px: Pixel) -> &[VoxelKey] {
        let dim = self.transform.image_dim();
        if px.u >= dim || px.v >= dim {
            return &[];
        }
        let i = (px.v * dim + px.u) as usize;
        &self.keys[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Lowest point in the column of `px`.
    pub fn column_floor(&self, px: Pixel) -> Option<f64> {
        let dim = self.transform.image_dim();
        if px.u >= dim || px.v >= dim {
            return None;
        }
        Some(self.floor_z[(px.v * dim + px.u) as usize]).filter(|z| z.is_finite())
    }

    pub fn voxel_count(&self) -> usize {
        self.keys.len()
    }

    /// Pixel of the voxel column holding `p`.
    pub fn pixel_of_point(&self, p: &Point3) -> Option<Pixel> {
        self.grid.pixel_of(&self.grid.key_of(p), &self.transform)
    }
}

/// RGB colors per room id; `neutral` is used for walls and background.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub neutral: [u8; 3],
    pub colors: Vec<[u8; 3]>,
}

impl Default for Palette {
    fn default() -> Self {
        // Evenly spread hues at full saturation, stepped by the golden angle.
        let colors = (0..32)
            .map(|i| {
                let h = (i as f64 * 0.618_033_988_75) % 1.0 * 6.0;
                let x = 1.0 - ((h % 2.0) - 1.0).abs();
                let (r, g, b) = match h as u32 {
                    0 => (1.0, x, 0.0),
                    1 => (x, 1.0, 0.0),
                    2 => (0.0, 1.0, x),
                    3 => (0.0, x, 1.0),
                    4 => (x, 0.0, 1.0),
                    _ => (1.0, 0.0, x),
                };
                let c = |v: f64| (40.0 + v * 215.0) as u8;
                [c(r), c(g), c(b)]
            })
            .collect();
        Self { neutral: [128, 128, 128], colors }
    }
}

impl Palette {
    pub fn color(&self, id: u16) -> [u8; 3] {
        if id == 0 || self.colors.is_empty() {
            self.neutral
        } else {
            self.colors[(id as usize - 1) % self.colors.len()]
        }
    }
}

/// Pointcloud with a room id and color attached to every point.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredCloud {
    pub points: Vec<Point3>,
    pub labels: Vec<u16>,
    pub colors: Vec<[u8; 3]>,
}

/// Labels every point with the room id of its voxel column's pixel.
pub fn colorize(
    map: &PointCloudMap,
    idx: &PixelVoxelIndex,
    masks: &RoomMaskSet,
    palette: &Palette,
) -> Result<ColoredCloud> {
    if masks.transform != Some(idx.transform) {
        return Err(Error::TransformMismatch);
    }
    let dim = idx.transform.image_dim();
    if masks.width != dim || masks.height != dim {
        return Err(Error::DimensionMismatch(masks.width, masks.height, dim, dim));
    }
    let labels: Vec<u16> = map
        .points
        .iter()
        .map(|p| idx.pixel_of_point(p).map_or(0, |px| masks.label_at(px)))
        .collect();
    let colors = labels.iter().map(|&l| palette.color(l)).collect();
    Ok(ColoredCloud { points: map.points.clone(), labels, colors })
}

/// World centroid of room `id`: the mean of its pixel centers, at the mean
/// floor height (lowest voxel) of its mapped columns, or 0 without data.
pub fn room_centroid(id: u16, masks: &RoomMaskSet, idx: &PixelVoxelIndex) -> Result<Point3> {
    let inst = masks.instance(id).ok_or(Error::UnknownMask(id))?;
    let [cu, cv] = inst.centroid_px;
    let [x, y] = idx.transform.pixel_center(cu, cv);
    let (mut sum, mut n) = (0.0, 0usize);
    let [u0, v0, u1, v1] = inst.bbox;
    for v in v0..=v1 {
        for u in u0..=u1 {
            let px = Pixel::new(u, v);
            if masks.label_at(px) != id {
                continue;
            }
            if let Some(floor) = idx.column_floor(px) {
                sum += floor;
                n += 1;
            }
        }
    }
    Ok(Point3::new(x, y, if n > 0 { sum / n as f64 } else { 0.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tenth() -> GridTransform {
        GridTransform::new([0.0, 0.0], 0.1).unwrap()
    }

    #[test]
    fn single_voxel_lands_on_first_interior_pixel() {
        let gt = tenth();
        let grid = VoxelGrid::aligned(&[Point3::new(0.05, 0.05, 0.3)], &gt, 0.1).unwrap();
        let idx = build_index(grid, &gt).unwrap();
        assert_eq!(idx.column(Pixel::new(12, 12)).len(), 1);
        assert_eq!(idx.voxel_count(), 1);
    }

    #[test]
    fn stacked_voxels_share_a_column() {
        let gt = tenth();
        let pts = [Point3::new(0.05, 0.05, 0.05), Point3::new(0.05, 0.05, 1.05)];
        let idx = build_index(VoxelGrid::aligned(&pts, &gt, 0.1).unwrap(), &gt).unwrap();
        assert_eq!(idx.column(Pixel::new(12, 12)).len(), 2);
    }

    #[test]
    fn misaligned_grid_is_rejected() {
        let gt = tenth();
        let grid = VoxelGrid::from_points(&[Point3::new(0.05, 0.05, 0.0)], 0.07).unwrap();
        assert!(matches!(build_index(grid, &gt), Err(Error::TransformMismatch)));
    }

    fn square_masks(gt: &GridTransform, u0: u32, v0: u32, u1: u32, v1: u32) -> RoomMaskSet {
        let dim = gt.image_dim();
        let mut labels = vec![0u16; (dim * dim) as usize];
        for v in v0..=v1 {
            for u in u0..=u1 {
                labels[(v * dim + u) as usize] = 1;
            }
        }
        RoomMaskSet::from_labels(dim, dim, labels, Some(*gt)).unwrap()
    }

    #[test]
    fn centroid_of_square_and_single_pixel() {
        let gt = tenth();
        let pts = [Point3::new(5.0, 5.0, 0.2)];
        let idx = build_index(VoxelGrid::aligned(&pts, &gt, 0.1).unwrap(), &gt).unwrap();
        // Pixels 42..=81 cover world [3.0, 7.0).
        let masks = square_masks(&gt, 42, 42, 81, 81);
        let c = room_centroid(1, &masks, &idx).unwrap();
        assert!((c.x - 5.0).abs() <= 0.1 && (c.y - 5.0).abs() <= 0.1);
        assert!((c.z - 0.2).abs() < 1e-12);
        let one = square_masks(&gt, 60, 70, 60, 70);
        let c = room_centroid(1, &one, &idx).unwrap();
        assert!((c.x - 4.85).abs() < 1e-9 && (c.y - 5.85).abs() < 1e-9);
        assert!(matches!(room_centroid(2, &one, &idx), Err(Error::UnknownMask(2))));
    }

    #[test]
    fn colorize_labels_and_neutral() {
        let gt = tenth();
        let pts = vec![Point3::new(5.0, 5.0, 0.0), Point3::new(20.0, 20.0, 1.0)];
        let map = PointCloudMap::new(pts, 0.0).unwrap();
        let idx = build_index(VoxelGrid::aligned(&map.points, &gt, 0.1).unwrap(), &gt).unwrap();
        let masks = square_masks(&gt, 42, 42, 81, 81);
        let pal = Palette::default();
        let out = colorize(&map, &idx, &masks, &pal).unwrap();
        assert_eq!(out.labels, vec![1, 0]);
        assert_eq!(out.colors[1], pal.neutral);
        assert_eq!(out.points, map.points);
        let empty = RoomMaskSet::empty(1024, 1024, Some(gt));
        let out = colorize(&map, &idx, &empty, &pal).unwrap();
        assert!(out.colors.iter().all(|c| *c == pal.neutral));
        let other = RoomMaskSet::empty(1024, 1024, Some(GridTransform::new([1.0, 0.0], 0.1).unwrap()));
        assert!(matches!(colorize(&map, &idx, &other, &pal), Err(Error::TransformMismatch)));
    }
}
