use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fusion::{ObjectInstance, SceneLabel};
use crate::model::GridTransform;
use crate::rooms::RoomMaskSet;

/// Dilation radius (chessboard metric) that makes two room masks adjacent.
pub const BUILDING_DILATION_PX: u32 = 3;

/// Scene id for every object: the latest scene generated at or before the
/// object's first sighting, or the first scene for objects seen earlier.
/// `None` everywhere while there are no scenes.
pub fn link_objects_to_scenes(scenes: &[SceneLabel], objects: &[ObjectInstance]) -> Vec<Option<u64>> {
    let mut order: Vec<&SceneLabel> = scenes.iter().collect();
    order.sort_by(|a, b| a.stamp.total_cmp(&b.stamp).then(a.id.cmp(&b.id)));
    objects
        .iter()
        .map(|o| {
            let i = order.partition_point(|s| s.stamp <= o.first_seen);
            order.get(i.saturating_sub(1)).map(|s| s.id)
        })
        .collect()
}

/// Room mask id for every scene: the instance under the scene position, or
/// the instance with the nearest pixel center. `None` when no room exists.
pub fn link_scenes_to_rooms(
    scenes: &[SceneLabel],
    masks: &RoomMaskSet,
    gt: &GridTransform,
) -> Result<Vec<Option<u16>>> {
    let dim = gt.image_dim();
    if masks.width != dim || masks.height != dim {
        return Err(Error::DimensionMismatch(masks.width, masks.height, dim, dim));
    }
    if masks.is_empty() {
        return Ok(vec![None; scenes.len()]);
    }
    Ok(scenes
        .iter()
        .map(|s| {
            let (tx, ty) = gt.grid_coords(s.position.x, s.position.y);
            let pad = gt.padding_px as f64;
            nearest_label(masks, tx + pad, ty + pad)
        })
        .collect())
}

/// Nearest labeled pixel center to the continuous image position `(x, y)`,
/// by expanding square rings around the containing pixel.
fn nearest_label(masks: &RoomMaskSet, x: f64, y: f64) -> Option<u16> {
    let (w, h) = (masks.width as i64, masks.height as i64);
    let cu = (crate::math::floor(x) as i64).clamp(0, w - 1);
    let cv = (crate::math::floor(y) as i64).clamp(0, h - 1);
    let mut best: Option<(f64, u16)> = None;
    let max_r = w.max(h);
    for r in 0..=max_r {
        if let Some((d, _)) = best {
            if r as f64 - 1.0 > d {
                break;
            }
        }
        let mut visit = |u: i64, v: i64| {
            if u < 0 || v < 0 || u >= w || v >= h {
                return;
            }
            let l = masks.labels[(v * w + u) as usize];
            if l == 0 {
                return;
            }
            let (dx, dy) = (u as f64 + 0.5 - x, v as f64 + 0.5 - y);
            let d = crate::math::sqrt(dx * dx + dy * dy);
            if best.is_none_or(|(bd, bl)| d < bd || (d == bd && l < bl)) {
                best = Some((d, l));
            }
        };
        if r == 0 {
            visit(cu, cv);
            continue;
        }
        for k in -r..=r {
            visit(cu + k, cv - r);
            visit(cu + k, cv + r);
        }
        for k in -r + 1..r {
            visit(cu - r, cv + k);
            visit(cu + r, cv + k);
        }
    }
    best.map(|(_, l)| l)
}

/// Building index (from 1) of every room, indexed by mask id − 1. Rooms are
/// adjacent when their masks dilated by [`BUILDING_DILATION_PX`] overlap;
/// buildings are the connected components, numbered by their smallest id.
pub fn cluster_buildings(masks: &RoomMaskSet) -> Vec<u32> {
    let n = masks.len();
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let (w, h) = (masks.width as i64, masks.height as i64);
    let reach = 2 * BUILDING_DILATION_PX as i64;
    let at = |u: i64, v: i64| masks.labels[(v * w + u) as usize];
    // The closest pair of pixels between two masks always includes a pixel
    // with a 4-neighbor outside its own mask, so only those are scanned.
    for v in 0..h {
        for u in 0..w {
            let a = at(u, v);
            if a == 0 {
                continue;
            }
            let edge = [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|(du, dv)| {
                let (x, y) = (u + du, v + dv);
                x < 0 || y < 0 || x >= w || y >= h || at(x, y) != a
            });
            if !edge {
                continue;
            }
            for y in (v - reach).max(0)..=(v + reach).min(h - 1) {
                for x in (u - reach).max(0)..=(u + reach).min(w - 1) {
                    let b = at(x, y);
                    if b != 0 && b != a {
                        let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
    }
    let mut index = vec![0u32; n + 1];
    let mut next = 0;
    let mut out = Vec::with_capacity(n);
    for id in 1..=n {
        let root = find(&mut parent, id);
        if index[root] == 0 {
            next += 1;
            index[root] = next;
        }
        out.push(index[root]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::IndoorOutdoor;
    use crate::model::Point3;
    use alloc::string::String;

    fn scene(id: u64, stamp: f64, x: f64, y: f64) -> SceneLabel {
        SceneLabel {
            id,
            stamp,
            position: Point3::new(x, y, 0.0),
            indoor_outdoor: IndoorOutdoor::Indoor,
            scene_type: String::from("office"),
            contributing_objects: Vec::new(),
        }
    }

    fn object(id: u64, first_seen: f64) -> ObjectInstance {
        ObjectInstance {
            id,
            class_id: 0,
            class_name: String::from("chair"),
            position: Point3::default(),
            support: 1,
            first_seen,
            last_seen: first_seen,
        }
    }

    #[test]
    fn objects_follow_scene_intervals() {
        let scenes = [scene(1, 10.0, 0.0, 0.0), scene(2, 20.0, 0.0, 0.0)];
        let objs = [object(1, 12.0), object(2, 3.0), object(3, 20.0), object(4, 99.0)];
        assert_eq!(link_objects_to_scenes(&scenes, &objs), vec![Some(1), Some(1), Some(2), Some(2)]);
        assert_eq!(link_objects_to_scenes(&[], &objs), vec![None; 4]);
    }

    fn rects(rects: &[[u32; 4]]) -> (RoomMaskSet, GridTransform) {
        let gt = GridTransform::new([0.0, 0.0], 0.1).unwrap();
        let dim = gt.image_dim();
        let mut labels = vec![0u16; (dim * dim) as usize];
        for (i, [u0, v0, u1, v1]) in rects.iter().enumerate() {
            for v in *v0..=*v1 {
                for u in *u0..=*u1 {
                    labels[(v * dim + u) as usize] = i as u16 + 1;
                }
            }
        }
        (RoomMaskSet::from_labels(dim, dim, labels, Some(gt)).unwrap(), gt)
    }

    #[test]
    fn scenes_link_to_containing_or_nearest_room() {
        // Room 1 spans world x in [1.0, 3.0); room 2 starts 0.4 m further right.
        let (masks, gt) = rects(&[[22, 22, 41, 41], [46, 22, 60, 41]]);
        let s = [scene(1, 0.0, 2.0, 2.0), scene(2, 0.0, 3.1, 2.0), scene(3, 0.0, 3.3, 2.0), scene(4, 0.0, -50.0, 2.0)];
        let links = link_scenes_to_rooms(&s, &masks, &gt).unwrap();
        assert_eq!(links, vec![Some(1), Some(1), Some(2), Some(1)]);
        let empty = RoomMaskSet::empty(masks.width, masks.height, Some(gt));
        assert_eq!(link_scenes_to_rooms(&s, &empty, &gt).unwrap(), vec![None; 4]);
    }

    #[test]
    fn adjacency_respects_the_dilation_bound() {
        // Five background columns: the dilated masks share column 43.
        let (near, _) = rects(&[[20, 20, 40, 40], [46, 20, 60, 40]]);
        assert_eq!(cluster_buildings(&near), vec![1, 1]);
        for start in [47, 48] {
            let (far, _) = rects(&[[20, 20, 40, 40], [start, 20, 60, 40]]);
            assert_eq!(cluster_buildings(&far), vec![1, 2]);
        }
        let (one, _) = rects(&[[20, 20, 40, 40]]);
        assert_eq!(cluster_buildings(&one), vec![1]);
    }

    #[test]
    fn chain_of_rooms_is_one_building() {
        let (m, _) = rects(&[
            [20, 20, 30, 30],
            [33, 20, 43, 30],
            [46, 20, 56, 30],
            [20, 33, 30, 43],
            [100, 100, 110, 110],
        ]);
        assert_eq!(cluster_buildings(&m), vec![1, 1, 1, 1, 2]);
    }
}
