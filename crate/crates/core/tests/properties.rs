use bimgraph_core::bev::{generate_bev, update_threshold, BevConfig, BevState};
use bimgraph_core::graph::{GraphBuilder, GraphInputs, SceneGraph};
use bimgraph_core::pix2vox::{build_index, colorize, Palette};
use bimgraph_core::rooms::{eval_segmentation, RoomMaskSet};
use bimgraph_core::{GridTransform, Point3, PointCloudMap, VoxelGrid};
use proptest::prelude::*;

fn labels(n: usize, max_id: u16) -> impl Strategy<Value = Vec<u16>> {
    prop::collection::vec(0..=max_id, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ema_is_convex(prev in 0.0f64..100.0, scores in prop::collection::vec(0.0f64..100.0, 1..50)) {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let t = update_threshold(BevState { threshold: prev, initialized: true }, &scores, 0.85).unwrap().threshold;
        prop_assert!(t >= prev.min(mean) - 1e-12 && t <= prev.max(mean) + 1e-12);
    }

    #[test]
    fn metrics_ignore_id_permutation(l in labels(24 * 24, 4), g in labels(24 * 24, 4), swap in 1u16..=4) {
        let set = |v: Vec<u16>| RoomMaskSet::from_labels(24, 24, v, None).unwrap();
        let base = eval_segmentation(&set(l.clone()), &set(g.clone())).unwrap();
        // Exchanging two ids renames instances without changing any region.
        let permuted: Vec<u16> = l.iter().map(|&x| if x == 1 { swap } else if x == swap { 1 } else { x }).collect();
        let p = eval_segmentation(&set(permuted), &set(g)).unwrap();
        prop_assert_eq!((base.miou, base.precision, base.recall), (p.miou, p.precision, p.recall));
    }

    #[test]
    fn self_evaluation_is_perfect(l in labels(16 * 16, 3)) {
        let set = RoomMaskSet::from_labels(16, 16, l, None).unwrap();
        let m = eval_segmentation(&set, &set).unwrap();
        if set.is_empty() {
            prop_assert_eq!(m.miou, 0.0);
        } else {
            prop_assert_eq!((m.miou, m.precision, m.recall), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn mask_sets_are_dense_and_consistent(l in labels(20 * 12, 9)) {
        let set = RoomMaskSet::from_labels(20, 12, l.clone(), None).unwrap();
        set.validate().unwrap();
        let total: u32 = set.instances.iter().map(|i| i.pixel_count).sum();
        prop_assert_eq!(total as usize, l.iter().filter(|&&x| x != 0).count());
    }

    #[test]
    fn colorize_partitions_points(
        pts in prop::collection::vec((0.0f64..8.0, 0.0f64..6.0, 0.0f64..2.5), 10..300),
        cut in 0.5f64..7.5,
    ) {
        let points: Vec<Point3> = pts.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
        let map = PointCloudMap { points: points.clone(), stamp: 0.0 };
        let gt = GridTransform::from_bounds([0.0, 0.0], [8.0, 6.0]);
        let dim = gt.image_dim();
        // Two rooms split at x = cut.
        let labels: Vec<u16> = (0..dim * dim)
            .map(|i| {
                let (u, v) = (i % dim, i / dim);
                if !gt.is_interior(bimgraph_core::Pixel::new(u, v)) {
                    return 0;
                }
                if gt.pixel_center(u as f64, v as f64)[0] < cut { 1 } else { 2 }
            })
            .collect();
        let masks = RoomMaskSet::from_labels(dim, dim, labels, Some(gt)).unwrap();
        let idx = build_index(VoxelGrid::aligned(&points, &gt, 0.04).unwrap(), &gt).unwrap();
        let c = colorize(&map, &idx, &masks, &Palette::default()).unwrap();
        prop_assert_eq!(c.labels.len(), points.len());
        for (p, &l) in points.iter().zip(&c.labels) {
            prop_assert_eq!(l, masks.label_at(gt.xy_to_pixel(p.x, p.y).unwrap()));
        }
    }

    #[test]
    fn graph_json_round_trips(rects in prop::collection::vec((0u32..30, 0u32..30, 1u32..10, 1u32..10), 0..5)) {
        let gt = GridTransform::new([0.0, 0.0], 0.1).unwrap();
        let dim = gt.image_dim();
        let mut l = vec![0u16; (dim * dim) as usize];
        for (i, (u, v, w, h)) in rects.iter().enumerate() {
            for y in *v..v + h {
                for x in *u..u + w {
                    l[(y * dim + x) as usize] = i as u16 + 1;
                }
            }
        }
        let masks = RoomMaskSet::from_labels(dim, dim, l, Some(gt)).unwrap();
        let c: Vec<Point3> = masks
            .instances
            .iter()
            .map(|i| {
                let [x, y] = gt.pixel_center(i.centroid_px[0], i.centroid_px[1]);
                Point3::new(x, y, 0.0)
            })
            .collect();
        let mut b = GraphBuilder::new();
        let g = b.update(&GraphInputs { masks: &masks, room_centroids: &c, scenes: &[], objects: &[] }).unwrap();
        g.validate().unwrap();
        let json = g.to_json().unwrap();
        prop_assert_eq!(&json, &g.to_json().unwrap());
        prop_assert_eq!(SceneGraph::from_json(&json).unwrap().to_json().unwrap(), json);
    }
}

#[test]
fn raising_the_threshold_never_adds_walls() {
    let mut pts = Vec::new();
    for i in 0..4000 {
        let f = i as f64;
        pts.push(Point3::new((f * 0.37) % 6.0, (f * 0.53) % 5.0, (f * 0.11) % 2.5));
    }
    let map = PointCloudMap { points: pts, stamp: 0.0 };
    let cfg = BevConfig::default();
    let mut prev: Option<Vec<bool>> = None;
    for t in [0.0, 0.2, 0.4, 0.8, 1.6, 3.2] {
        let (bev, _) = generate_bev(&map, BevState { threshold: t, initialized: true }, &cfg).unwrap();
        let walls = bev.image.wall_mask();
        if let Some(p) = &prev {
            assert!(walls.iter().zip(p).all(|(&now, &before)| !now || before));
        }
        prev = Some(walls);
    }
}
