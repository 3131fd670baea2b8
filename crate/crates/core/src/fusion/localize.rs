use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::dbscan::dbscan;
use super::detection::Detection;
use crate::error::{Error, Result};
use crate::model::{CameraModel, Point3, PointCloudMap, Pose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    /// Map points farther than this from the camera are ignored.
    pub max_range: f64,
    /// Largest accepted gap between a detection and its pose, seconds.
    pub max_stamp_gap: f64,
    /// Same-class instances closer than this are the same object.
    pub dedup_radius: f64,
    /// Per-class constant `k` (pixel·meters) for `depth = k / bbox_height`.
    pub depth_k: BTreeMap<String, f64>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        let k = [
            ("box", 400.0),
            ("car", 500.0),
            ("chair", 480.0),
            ("desk", 400.0),
            ("monitor", 250.0),
            ("person", 1000.0),
            ("sofa", 400.0),
            ("toolbox", 250.0),
            ("tv", 300.0),
        ];
        Self {
            dbscan_eps: 0.3,
            dbscan_min_pts: 5,
            max_range: 15.0,
            max_stamp_gap: 0.5,
            dedup_radius: 1.0,
            depth_k: k.iter().map(|(c, v)| (String::from(*c), *v)).collect(),
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dbscan_eps > 0.0 && self.max_range > 0.0 && self.max_stamp_gap >= 0.0)
            || self.dbscan_min_pts == 0
            || !(self.dedup_radius >= 0.0)
            || self.depth_k.values().any(|k| !(*k > 0.0))
        {
            return Err(Error::InvalidArgument("invalid fusion configuration".into()));
        }
        Ok(())
    }
}

/// One physical object in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: u64,
    pub class_id: u32,
    pub class_name: String,
    pub position: Point3,
    /// Map points behind the estimate; 0 when it came from the size heuristic.
    pub support: u32,
    pub first_seen: f64,
    pub last_seen: f64,
}

/// World position of a detected object: the cluster of in-mask map points
/// nearest to the camera, or a bbox-size depth guess along the bbox-center
/// ray when no cluster exists. `cam` carries the body→optical mount.
pub fn localize_object(
    det: &Detection,
    map: &PointCloudMap,
    pose: &Pose,
    cam: &CameraModel,
    cfg: &FusionConfig,
) -> Result<ObjectInstance> {
    if (det.stamp - pose.stamp).abs() > cfg.max_stamp_gap {
        return Err(Error::StampMismatch {
            detection: det.stamp,
            pose: pose.stamp,
            tolerance: cfg.max_stamp_gap,
        });
    }
    let cam = cam.at_pose(pose);
    let mask = det.mask.decode()?;
    if det.mask.width != cam.width || det.mask.height != cam.height {
        return Err(Error::DimensionMismatch(det.mask.width, det.mask.height, cam.width, cam.height));
    }
    let eye = cam.center();
    let r2 = cfg.max_range * cfg.max_range;
    let w = cam.width as usize;
    let selected: Vec<Point3> = map
        .points
        .iter()
        .filter(|p| p.distance_squared(&eye) <= r2)
        .filter(|p| match cam.project_point(p) {
            Ok(ip) if cam.in_image(&ip) => mask[ip.v as usize * w + ip.u as usize],
            _ => false,
        })
        .copied()
        .collect();

    let labels = dbscan(&selected, cfg.dbscan_eps, cfg.dbscan_min_pts);
    let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut sums = alloc::vec![(Point3::default(), 0u32); n_clusters];
    for (p, l) in selected.iter().zip(&labels) {
        if let Some(c) = l {
            sums[*c].0 = sums[*c].0 + *p;
            sums[*c].1 += 1;
        }
    }
    let nearest = sums
        .iter()
        .map(|(s, n)| (*s * (1.0 / *n as f64), *n))
        .min_by(|a, b| a.0.distance_squared(&eye).total_cmp(&b.0.distance_squared(&eye)));

    let (position, support) = match nearest {
        Some(found) => found,
        None => {
            let k = cfg
                .depth_k
                .get(&det.class_name)
                .ok_or_else(|| Error::NoSupport(det.class_name.clone()))?;
            let [x, y, bw, bh] = det.bbox;
            let depth = k / bh as f64;
            let (u, v) = (x as f64 + bw as f64 * 0.5, y as f64 + bh as f64 * 0.5);
            (cam.unproject(u, v, depth), 0)
        }
    };
    Ok(ObjectInstance {
        id: 0,
        class_id: det.class_id,
        class_name: det.class_name.clone(),
        position,
        support,
        first_seen: det.stamp,
        last_seen: det.stamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::MaskRle;
    use alloc::vec;

    const IDENTITY: [[f64; 4]; 4] =
        [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

    fn cam() -> CameraModel {
        CameraModel::new(500.0, 500.0, 320.0, 240.0, IDENTITY, 640, 480).unwrap()
    }

    fn full_mask_det(class: &str, bbox: [u32; 4]) -> Detection {
        let mut mask = vec![false; 640 * 480];
        for v in bbox[1]..bbox[1] + bbox[3] {
            for u in bbox[0]..bbox[0] + bbox[2] {
                mask[v as usize * 640 + u as usize] = true;
            }
        }
        Detection {
            stamp: 0.0,
            class_id: 1,
            class_name: class.into(),
            bbox,
            mask: MaskRle::encode(640, 480, &mask),
            confidence: 0.8,
        }
    }

    #[test]
    fn heuristic_depth_along_center_ray() {
        let map = PointCloudMap::new(vec![Point3::new(0.0, 0.0, -5.0)], 0.0).unwrap();
        let mut cfg = FusionConfig::default();
        cfg.depth_k.insert("thing".into(), 1000.0);
        let det = full_mask_det("thing", [220, 140, 200, 200]);
        let obj = localize_object(&det, &map, &Pose::identity(0.0), &cam(), &cfg).unwrap();
        assert!(obj.position.distance(&Point3::new(0.0, 0.0, 5.0)) < 1e-9);
        assert_eq!(obj.support, 0);
    }

    #[test]
    fn unknown_class_without_points_has_no_support() {
        let map = PointCloudMap::new(vec![Point3::new(0.0, 0.0, -5.0)], 0.0).unwrap();
        let det = full_mask_det("dragon", [220, 140, 200, 200]);
        let r = localize_object(&det, &map, &Pose::identity(0.0), &cam(), &FusionConfig::default());
        assert!(matches!(r, Err(Error::NoSupport(_))));
    }

    #[test]
    fn stale_pose_is_rejected() {
        let map = PointCloudMap::new(vec![Point3::new(0.0, 0.0, 5.0)], 0.0).unwrap();
        let det = full_mask_det("chair", [0, 0, 10, 10]);
        let r = localize_object(&det, &map, &Pose::identity(0.7), &cam(), &FusionConfig::default());
        assert!(matches!(r, Err(Error::StampMismatch { .. })));
    }

    #[test]
    fn nearest_cluster_wins() {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let (x, y) = (i as f64 * 0.05 - 0.1, j as f64 * 0.05 - 0.1);
                pts.push(Point3::new(x, y, 2.0));
                pts.push(Point3::new(x * 2.0, y * 2.0, 6.0));
            }
        }
        let map = PointCloudMap::new(pts, 0.0).unwrap();
        let det = full_mask_det("chair", [0, 0, 640, 480]);
        let obj = localize_object(&det, &map, &Pose::identity(0.0), &cam(), &FusionConfig::default()).unwrap();
        assert!(obj.position.distance(&Point3::new(0.0, 0.0, 2.0)) < 1e-9);
        assert_eq!(obj.support, 25);
    }
}
