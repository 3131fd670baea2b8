use alloc::vec;
use alloc::vec::Vec;

use serde_json::Value;

use super::link::{cluster_buildings, link_objects_to_scenes, link_scenes_to_rooms};
use super::{GraphNode, Layer, NodeId, SceneGraph};
use crate::error::{Error, Result};
use crate::fusion::{ObjectInstance, SceneLabel};
use crate::model::Point3;
use crate::rooms::{eval_segmentation, RoomMaskSet, MATCH_IOU};

/// Everything one tick contributes to the graph.
#[derive(Debug, Clone, Copy)]
pub struct GraphInputs<'a> {
    pub masks: &'a RoomMaskSet,
    /// World centroid of every room, indexed by mask id − 1.
    pub room_centroids: &'a [Point3],
    pub scenes: &'a [SceneLabel],
    pub objects: &'a [ObjectInstance],
}

/// Rebuilds the graph from each tick's inputs while keeping room node ids
/// stable: a room inherits the id of the previous tick's room it overlaps
/// with IoU ≥ 0.5 (greedy, best pairs first); other rooms get fresh ids.
///
/// Scenes and objects keep the ids assigned by the fusion layer. Orphans
/// hang off a placeholder chain `building/0 → room/0 → scene/0`.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    graph: SceneGraph,
    prev_masks: Option<RoomMaskSet>,
    room_ids: Vec<u64>,
    next_room: u64,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn graph(&self) -> &SceneGraph {
        &self.graph
    }

    /// Room node for a mask id of the latest tick.
    pub fn room_node(&self, mask_id: u16) -> Option<NodeId> {
        let i = usize::from(mask_id).checked_sub(1)?;
        self.room_ids.get(i).map(|&r| NodeId::new(Layer::Room, r))
    }

    pub fn update(&mut self, inp: &GraphInputs<'_>) -> Result<&SceneGraph> {
        let masks = inp.masks;
        if inp.room_centroids.len() != masks.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} centroids for {} rooms",
                inp.room_centroids.len(),
                masks.len()
            )));
        }
        if masks.transform.is_none() && !masks.is_empty() {
            return Err(Error::TransformMismatch);
        }
        let room_ids = self.match_rooms(masks)?;

        let mut g = SceneGraph { revision: self.graph.revision + 1, ..SceneGraph::default() };

        let buildings = cluster_buildings(masks);
        let n_buildings = buildings.iter().copied().max().unwrap_or(0) as usize;
        let mut sums = vec![(Point3::default(), 0usize); n_buildings + 1];
        for (b, c) in buildings.iter().zip(inp.room_centroids) {
            let s = &mut sums[*b as usize];
            s.0 = s.0 + *c;
            s.1 += 1;
        }
        for (b, (sum, n)) in sums.iter().enumerate().skip(1) {
            let id = NodeId::new(Layer::Building, b as u64);
            g.add_node(
                GraphNode::new(id, *sum * (1.0 / *n as f64))
                    .with("building_index", b as u64)
                    .with("room_count", *n as u64),
            );
        }

        let area_px = masks.transform.map_or(0.0, |t| t.meters_per_pixel * t.meters_per_pixel);
        for (i, inst) in masks.instances.iter().enumerate() {
            let id = NodeId::new(Layer::Room, room_ids[i]);
            g.add_node(
                GraphNode::new(id, inp.room_centroids[i])
                    .with("mask_id", inst.id)
                    .with("area_m2", inst.pixel_count as f64 * area_px)
                    .with("pixel_count", inst.pixel_count),
            );
            g.add_edge(NodeId::new(Layer::Building, buildings[i] as u64), id);
        }

        let scene_rooms = match &masks.transform {
            Some(gt) => link_scenes_to_rooms(inp.scenes, masks, gt)?,
            None => vec![None; inp.scenes.len()],
        };
        for (s, room) in inp.scenes.iter().zip(&scene_rooms) {
            let id = NodeId::new(Layer::Scene, s.id);
            let contributing: Vec<Value> =
                s.contributing_objects.iter().map(|o| Value::from(*o)).collect();
            g.add_node(
                GraphNode::new(id, s.position)
                    .with("scene_type", s.scene_type.as_str())
                    .with("indoor_outdoor", indoor_name(s))
                    .with("stamp", s.stamp)
                    .with("contributing_objects", contributing),
            );
            let parent = match room {
                Some(m) => NodeId::new(Layer::Room, room_ids[*m as usize - 1]),
                None => ensure_placeholders(&mut g, Layer::Room),
            };
            g.add_edge(parent, id);
        }

        let object_scenes = link_objects_to_scenes(inp.scenes, inp.objects);
        for (o, scene) in inp.objects.iter().zip(&object_scenes) {
            let id = NodeId::new(Layer::Object, o.id);
            g.add_node(
                GraphNode::new(id, o.position)
                    .with("class_name", o.class_name.as_str())
                    .with("class_id", o.class_id)
                    .with("support", o.support)
                    .with("first_seen", o.first_seen)
                    .with("last_seen", o.last_seen),
            );
            let parent = match scene {
                Some(s) => NodeId::new(Layer::Scene, *s),
                None => ensure_placeholders(&mut g, Layer::Scene),
            };
            g.add_edge(parent, id);
        }

        g.validate()?;
        self.graph = g;
        self.prev_masks = Some(masks.clone());
        self.room_ids = room_ids;
        Ok(&self.graph)
    }

    fn match_rooms(&mut self, masks: &RoomMaskSet) -> Result<Vec<u64>> {
        let mut ids = vec![0u64; masks.len()];
        if let Some(prev) = &self.prev_masks {
            if prev.width == masks.width && prev.height == masks.height {
                for m in eval_segmentation(masks, prev)?.matches {
                    if m.iou >= MATCH_IOU {
                        ids[m.pred_id as usize - 1] = self.room_ids[m.gt_id as usize - 1];
                    }
                }
            }
        }
        for id in ids.iter_mut().filter(|id| **id == 0) {
            self.next_room += 1;
            *id = self.next_room;
        }
        Ok(ids)
    }
}

fn indoor_name(s: &SceneLabel) -> Value {
    serde_json::to_value(s.indoor_outdoor).unwrap_or(Value::Null)
}

/// Adds the placeholder chain down to `layer` and returns its node there.
fn ensure_placeholders(g: &mut SceneGraph, layer: Layer) -> NodeId {
    let b = NodeId::placeholder(Layer::Building);
    g.add_node(GraphNode::new(b, Point3::default()).with("building_index", 0u64).with("room_count", 0u64));
    let r = NodeId::placeholder(Layer::Room);
    g.add_node(GraphNode::new(r, Point3::default()).with("mask_id", 0u64).with("area_m2", 0.0));
    g.add_edge(b, r);
    if layer == Layer::Room {
        return r;
    }
    let s = NodeId::placeholder(Layer::Scene);
    g.add_node(
        GraphNode::new(s, Point3::default())
            .with("scene_type", "unassigned")
            .with("indoor_outdoor", "unknown")
            .with("stamp", 0.0),
    );
    g.add_edge(r, s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::IndoorOutdoor;
    use crate::model::GridTransform;
    use alloc::string::String;

    fn masks(rects: &[[u32; 4]]) -> (RoomMaskSet, Vec<Point3>) {
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
        let m = RoomMaskSet::from_labels(dim, dim, labels, Some(gt)).unwrap();
        let c = m
            .instances
            .iter()
            .map(|i| {
                let [x, y] = gt.pixel_center(i.centroid_px[0], i.centroid_px[1]);
                Point3::new(x, y, 0.0)
            })
            .collect();
        (m, c)
    }

    fn scene(id: u64, stamp: f64, x: f64, y: f64) -> SceneLabel {
        SceneLabel {
            id,
            stamp,
            position: Point3::new(x, y, 0.8),
            indoor_outdoor: IndoorOutdoor::Indoor,
            scene_type: String::from("office"),
            contributing_objects: vec![1],
        }
    }

    fn object(id: u64, first_seen: f64) -> ObjectInstance {
        ObjectInstance {
            id,
            class_id: 3,
            class_name: String::from("desk"),
            position: Point3::new(2.0, 2.0, 0.4),
            support: 12,
            first_seen,
            last_seen: first_seen,
        }
    }

    #[test]
    fn identical_inputs_only_bump_the_revision() {
        let (m, c) = masks(&[[20, 20, 60, 60], [62, 20, 90, 60]]);
        let scenes = [scene(1, 5.0, 2.0, 2.0)];
        let objects = [object(1, 1.0), object(2, 6.0)];
        let inp = GraphInputs { masks: &m, room_centroids: &c, scenes: &scenes, objects: &objects };
        let mut b = GraphBuilder::new();
        let first = b.update(&inp).unwrap().clone();
        let second = b.update(&inp).unwrap().clone();
        assert_eq!((first.revision, second.revision), (1, 2));
        assert!(first.nodes().eq(second.nodes()));
        assert!(first.edges().eq(second.edges()));
        assert_eq!(first.count(Layer::Building), 1);
        assert_eq!(first.count(Layer::Room), 2);
        assert_eq!(first.node_count(), 1 + 2 + 1 + 2);
    }

    #[test]
    fn new_object_adds_one_node_and_edge() {
        let (m, c) = masks(&[[20, 20, 60, 60]]);
        let scenes = [scene(1, 5.0, 2.0, 2.0)];
        let mut b = GraphBuilder::new();
        let before = b
            .update(&GraphInputs { masks: &m, room_centroids: &c, scenes: &scenes, objects: &[object(1, 1.0)] })
            .unwrap()
            .clone();
        let objects = [object(1, 1.0), object(2, 7.0)];
        let after = b
            .update(&GraphInputs { masks: &m, room_centroids: &c, scenes: &scenes, objects: &objects })
            .unwrap();
        assert_eq!(after.node_count(), before.node_count() + 1);
        assert_eq!(after.edge_count(), before.edge_count() + 1);
    }

    #[test]
    fn orphans_use_placeholders() {
        let (m, c) = masks(&[[20, 20, 60, 60]]);
        let mut b = GraphBuilder::new();
        let g = b
            .update(&GraphInputs { masks: &m, room_centroids: &c, scenes: &[], objects: &[object(1, 1.0)] })
            .unwrap();
        let o = NodeId::new(Layer::Object, 1);
        assert_eq!(g.parent_of(&o), Some(NodeId::placeholder(Layer::Scene)));
        assert_eq!(g.count(Layer::Scene), 0);
        g.to_json().unwrap();

        let empty = RoomMaskSet::empty(m.width, m.height, None);
        let scenes = [scene(4, 1.0, 2.0, 2.0)];
        let g = b
            .update(&GraphInputs { masks: &empty, room_centroids: &[], scenes: &scenes, objects: &[] })
            .unwrap();
        assert_eq!(g.parent_of(&NodeId::new(Layer::Scene, 4)), Some(NodeId::placeholder(Layer::Room)));
    }

    #[test]
    fn room_ids_survive_small_changes_and_renumbering() {
        let (m1, c1) = masks(&[[20, 20, 60, 60], [70, 20, 90, 60]]);
        let mut b = GraphBuilder::new();
        b.update(&GraphInputs { masks: &m1, room_centroids: &c1, scenes: &[], objects: &[] }).unwrap();
        let (r1, r2) = (b.room_node(1).unwrap(), b.room_node(2).unwrap());
        // A new room appears first in row-major order, shifting mask ids.
        let (m2, c2) = masks(&[[20, 5, 30, 15], [20, 20, 61, 60], [70, 20, 90, 62]]);
        b.update(&GraphInputs { masks: &m2, room_centroids: &c2, scenes: &[], objects: &[] }).unwrap();
        assert_eq!(b.room_node(2), Some(r1));
        assert_eq!(b.room_node(3), Some(r2));
        assert_eq!(b.room_node(1), Some(NodeId::new(Layer::Room, 3)));
    }
}
