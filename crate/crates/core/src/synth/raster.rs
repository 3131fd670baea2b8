use alloc::vec;

use super::floorplan::FloorplanSpec;
use crate::error::Result;
use crate::math::floor;
use crate::model::{GrayImage, GridTransform, FREE, WALL};
use crate::rooms::RoomMaskSet;

/// Label raster of the room polygons: a pixel belongs to room `i + 1` when
/// its center lies inside polygon `i`.
pub fn ground_truth_raster(spec: &FloorplanSpec, gt: &GridTransform) -> Result<RoomMaskSet> {
    spec.validate()?;
    let dim = gt.image_dim();
    let mut labels = vec![0u16; dim as usize * dim as usize];
    let lo = gt.padding_px;
    let hi = gt.padding_px + gt.grid_dim;
    for (i, room) in spec.rooms.iter().enumerate() {
        let (blo, bhi) = room.bounds();
        let (u0, v0) = span_start(gt, blo);
        let (u1, v1) = span_start(gt, bhi);
        for v in v0.max(lo)..=v1.min(hi - 1) {
            for u in u0.max(lo)..=u1.min(hi - 1) {
                let [x, y] = gt.pixel_center(u as f64, v as f64);
                if room.contains(x, y) {
                    labels[v as usize * dim as usize + u as usize] = i as u16 + 1;
                }
            }
        }
    }
    RoomMaskSet::from_labels(dim, dim, labels, Some(*gt))
}

fn span_start(gt: &GridTransform, p: [f64; 2]) -> (u32, u32) {
    let (tx, ty) = gt.grid_coords(p[0], p[1]);
    let pad = gt.padding_px as f64;
    ((floor(tx) + pad).max(0.0) as u32, (floor(ty) + pad).max(0.0) as u32)
}

/// Reference wall image: a pixel is wall when its cell meets the band of
/// `half_width` meters around some wall segment.
pub fn wall_raster(spec: &FloorplanSpec, gt: &GridTransform, half_width: f64) -> GrayImage {
    let dim = gt.image_dim();
    let mut img = GrayImage::filled(dim, dim, FREE);
    let lo = gt.padding_px;
    let hi = gt.padding_px + gt.grid_dim;
    for w in spec.walls() {
        let xmin = w.a[0].min(w.b[0]) - half_width;
        let xmax = w.a[0].max(w.b[0]) + half_width;
        let ymin = w.a[1].min(w.b[1]) - half_width;
        let ymax = w.a[1].max(w.b[1]) + half_width;
        let (u0, v0) = span_start(gt, [xmin, ymin]);
        let (u1, v1) = span_start(gt, [xmax, ymax]);
        for v in v0.max(lo)..=v1.min(hi - 1) {
            for u in u0.max(lo)..=u1.min(hi - 1) {
                img.set(u, v, WALL);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::scenes;

    #[test]
    fn five_rooms_rasterize_to_five_instances_with_matching_area() {
        let spec = scenes::five_room_apartment(0);
        let (lo, hi) = spec.bounds();
        let gt = GridTransform::from_bounds(lo, hi);
        let masks = ground_truth_raster(&spec, &gt).unwrap();
        assert_eq!(masks.len(), 5);
        let m2 = gt.meters_per_pixel * gt.meters_per_pixel;
        for (inst, room) in masks.instances.iter().zip(&spec.rooms) {
            let area = inst.pixel_count as f64 * m2;
            assert!((area - room.area()).abs() <= 0.02 * room.area(), "{area} vs {}", room.area());
        }
    }

    #[test]
    fn empty_spec_is_rejected() {
        let mut spec = scenes::single_room(4.0, 4.0);
        spec.rooms.clear();
        let gt = GridTransform::from_bounds([0.0, 0.0], [4.0, 4.0]);
        assert!(ground_truth_raster(&spec, &gt).is_err());
    }

    #[test]
    fn wall_raster_outlines_a_single_room() {
        let spec = scenes::single_room(4.0, 4.0);
        let gt = GridTransform::from_bounds([0.0, 0.0], [4.0, 4.0]);
        let img = wall_raster(&spec, &gt, 0.0);
        let center = gt.xy_to_pixel(2.0, 2.0).unwrap();
        assert_eq!(img.get(center.u, center.v), FREE);
        let edge = gt.xy_to_pixel(0.0, 2.0).unwrap();
        assert_eq!(img.get(edge.u, edge.v), WALL);
    }
}
