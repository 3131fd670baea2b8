use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cloud::{generate_pointcloud, SynthCloud};
use super::floorplan::{FloorplanSpec, RoomPolygon};
use super::scenes::class_id;
use crate::error::{Error, Result};
use crate::fusion::{Detection, MaskRle};
use crate::math::{atan2, ceil, sqrt};
use crate::model::{CameraModel, Point3, PointCloudMap, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    /// Points within this XY distance of the robot become visible.
    pub sensor_radius: f64,
    /// Spacing of trajectory poses in seconds.
    pub pose_period: f64,
    /// Spacing of detector frames in seconds.
    pub detection_period: f64,
    pub speed: f64,
    /// Turn rate while spinning in place, rad/s.
    pub spin_rate: f64,
    /// Dwell at the end of the tour, seconds.
    pub final_dwell: f64,
    pub sensor_height: f64,
    /// Smallest mask area, in pixels, that yields a detection.
    pub min_mask_px: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            sensor_radius: 10.0,
            pose_period: 0.2,
            detection_period: 1.0,
            speed: 1.0,
            spin_rate: 2.0,
            final_dwell: 2.0,
            sensor_height: 0.8,
            min_mask_px: 150,
        }
    }
}

/// Camera mounted at the robot origin looking along body +x.
pub fn mount_extrinsic() -> CameraModel {
    let e = [
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    CameraModel { fx: 320.0, fy: 320.0, cx: 320.0, cy: 240.0, extrinsic: e, width: 640, height: 480 }
}

/// Replayable recording: the full cloud, when each point was first seen,
/// the trajectory and the detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub cloud: SynthCloud,
    /// Stamp at which each point entered the map; `None` if never seen.
    pub reveal: Vec<Option<f64>>,
    pub poses: Vec<Pose>,
    pub detections: Vec<Detection>,
    /// Intrinsics plus the body→optical mount.
    pub camera: CameraModel,
}

/// Everything that happened during one tick `(prev, stamp]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionTick {
    pub stamp: f64,
    pub pose: Pose,
    pub detections: Vec<Detection>,
}

impl Session {
    /// Map as known at time `t`.
    pub fn snapshot(&self, t: f64) -> PointCloudMap {
        let points = self
            .cloud
            .map
            .points
            .iter()
            .zip(&self.reveal)
            .filter(|(_, r)| r.is_some_and(|s| s <= t))
            .map(|(p, _)| *p)
            .collect();
        PointCloudMap { points, stamp: t }
    }

    pub fn duration(&self) -> f64 {
        self.poses.last().map_or(0.0, |p| p.stamp)
    }

    /// Tick boundaries every `period` seconds, the last one at the end of
    /// the trajectory.
    pub fn ticks(&self, period: f64) -> Vec<SessionTick> {
        let end = self.duration();
        let n = ceil(end / period).max(1.0) as usize;
        let mut out = Vec::with_capacity(n);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=n {
            let stamp = (k as f64 * period).min(end);
            let pose = *self
                .poses
                .iter()
                .rev()
                .find(|p| p.stamp <= stamp + 1e-9)
                .unwrap_or(&self.poses[0]);
            let detections = self
                .detections
                .iter()
                .filter(|d| d.stamp > prev && d.stamp <= stamp + 1e-9)
                .cloned()
                .collect();
            out.push(SessionTick { stamp, pose, detections });
            prev = stamp + 1e-9;
        }
        out
    }
}

/// Room-to-room route through doorways visiting every reachable room once,
/// as XY waypoints; room centers are marked with `true`.
pub fn plan_tour(spec: &FloorplanSpec) -> Vec<([f64; 2], bool)> {
    let n = spec.rooms.len();
    let mut links: Vec<Vec<(usize, [f64; 2])>> = vec![Vec::new(); n];
    for d in &spec.doorways {
        let c = d.center;
        let probe = |dx: f64, dy: f64| spec.room_at(c[0] + dx, c[1] + dy);
        let pair = [probe(0.05, 0.0), probe(-0.05, 0.0), probe(0.0, 0.05), probe(0.0, -0.05)];
        let rooms: BTreeSet<u16> = pair.iter().flatten().copied().collect();
        let rooms: Vec<usize> = rooms.into_iter().map(|r| r as usize - 1).collect();
        if let [a, b] = rooms[..] {
            links[a].push((b, c));
            links[b].push((a, c));
        }
    }
    let centers: Vec<[f64; 2]> = spec.rooms.iter().map(interior_point).collect();
    let mut out = vec![(centers[0], true)];
    sweep(spec, 0, centers[0], &mut out);
    let mut seen = vec![false; n];
    seen[0] = true;
    fn visit(
        r: usize,
        spec: &FloorplanSpec,
        links: &[Vec<(usize, [f64; 2])>],
        centers: &[[f64; 2]],
        seen: &mut [bool],
        out: &mut Vec<([f64; 2], bool)>,
    ) {
        for &(next, door) in &links[r] {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            let (near, far) = door_approach(spec, door, r);
            out.push((near, false));
            out.push((door, false));
            out.push((far, false));
            out.push((centers[next], true));
            sweep(spec, next, centers[next], out);
            visit(next, spec, links, centers, seen, out);
            out.push((far, false));
            out.push((door, false));
            out.push((near, false));
            out.push((centers[r], false));
        }
    }
    visit(0, spec, &links, &centers, &mut seen, &mut out);
    // Drop the final walk back to the start.
    while out.len() > 1 && !out[out.len() - 1].1 {
        out.pop();
    }
    out
}

const SWEEP_SPACING: f64 = 8.0;

/// Out-and-back trips from a room's center to lattice points far from it, so
/// that large rooms are seen in full.
fn sweep(spec: &FloorplanSpec, room: usize, center: [f64; 2], out: &mut Vec<([f64; 2], bool)>) {
    let r = &spec.rooms[room];
    let (lo, hi) = r.bounds();
    let nx = ceil((hi[0] - lo[0]) / SWEEP_SPACING) as usize;
    let ny = ceil((hi[1] - lo[1]) / SWEEP_SPACING) as usize;
    let (sx, sy) = ((hi[0] - lo[0]) / nx as f64, (hi[1] - lo[1]) / ny as f64);
    for j in 0..ny {
        for i in 0..nx {
            let p = [lo[0] + (i as f64 + 0.5) * sx, lo[1] + (j as f64 + 0.5) * sy];
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            if dx * dx + dy * dy < 0.25 * SWEEP_SPACING * SWEEP_SPACING
                || !r.contains(p[0], p[1])
                || !spec.line_of_sight(center, p)
            {
                continue;
            }
            out.push((p, false));
            out.push((center, false));
        }
    }
}

/// Points half a meter either side of a door, the first inside room `from`.
fn door_approach(spec: &FloorplanSpec, door: [f64; 2], from: usize) -> ([f64; 2], [f64; 2]) {
    let offsets = [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]];
    let room = &spec.rooms[from];
    for o in offsets {
        let a = [door[0] + o[0], door[1] + o[1]];
        let b = [door[0] - o[0], door[1] - o[1]];
        if room.contains(a[0], a[1]) && !room.contains(b[0], b[1]) {
            return (a, b);
        }
    }
    (door, door)
}

/// Point of a room farthest from its outline on a 0.1 m lattice.
fn interior_point(room: &RoomPolygon) -> [f64; 2] {
    let (lo, hi) = room.bounds();
    let center = [(lo[0] + hi[0]) * 0.5, (lo[1] + hi[1]) * 0.5];
    let mut best = (f64::NEG_INFINITY, center);
    let nx = ((hi[0] - lo[0]) / 0.1) as usize;
    let ny = ((hi[1] - lo[1]) / 0.1) as usize;
    for j in 0..ny {
        for i in 0..nx {
            let p = [lo[0] + (i as f64 + 0.5) * 0.1, lo[1] + (j as f64 + 0.5) * 0.1];
            if !room.contains(p[0], p[1]) {
                continue;
            }
            let d = edge_distance(room, p);
            if d > best.0 + 1e-9 {
                best = (d, p);
            }
        }
    }
    best.1
}

fn edge_distance(room: &RoomPolygon, p: [f64; 2]) -> f64 {
    let v = &room.vertices;
    (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
            sqrt(q[0] * q[0] + q[1] * q[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Timed poses along the tour: drive between waypoints facing the direction
/// of travel, spin once at every room center, then dwell.
pub fn tour_trajectory(waypoints: &[([f64; 2], bool)], cfg: &SessionConfig) -> Vec<Pose> {
    // (time, x, y, yaw) keyframes, densified below.
    let mut keys: Vec<(f64, f64, f64, f64)> = Vec::new();
    let Some(&(start, _)) = waypoints.first() else {
        return Vec::new();
    };
    let mut t = 0.0;
    let mut yaw = 0.0;
    let mut pos = start;
    keys.push((t, pos[0], pos[1], yaw));
    let spin = |t: &mut f64, keys: &mut Vec<(f64, f64, f64, f64)>, pos: [f64; 2], yaw: f64| {
        let dur = core::f64::consts::TAU / cfg.spin_rate;
        *t += dur;
        keys.push((*t, pos[0], pos[1], yaw + core::f64::consts::TAU));
    };
    spin(&mut t, &mut keys, pos, yaw);
    for &(wp, is_center) in &waypoints[1..] {
        let (dx, dy) = (wp[0] - pos[0], wp[1] - pos[1]);
        let dist = sqrt(dx * dx + dy * dy);
        if dist > 1e-9 {
            yaw = atan2(dy, dx);
            keys.push((t, pos[0], pos[1], yaw));
            t += dist / cfg.speed;
            keys.push((t, wp[0], wp[1], yaw));
            pos = wp;
        }
        if is_center {
            spin(&mut t, &mut keys, pos, yaw);
        }
    }
    keys.push((t + cfg.final_dwell, pos[0], pos[1], yaw));

    let end = t + cfg.final_dwell;
    let n = ceil(end / cfg.pose_period) as usize;
    let mut poses = Vec::with_capacity(n + 1);
    let mut k = 0;
    for i in 0..=n {
        let s = (i as f64 * cfg.pose_period).min(end);
        while k + 2 < keys.len() && keys[k + 1].0 <= s {
            k += 1;
        }
        let (t0, x0, y0, a0) = keys[k];
        let (t1, x1, y1, a1) = keys[(k + 1).min(keys.len() - 1)];
        let f = if t1 > t0 { ((s - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 1.0 };
        let p = Point3::new(x0 + f * (x1 - x0), y0 + f * (y1 - y0), cfg.sensor_height);
        poses.push(Pose::from_yaw(s, p, a0 + f * (a1 - a0)));
        if s >= end {
            break;
        }
    }
    poses
}

/// Replays `trajectory` through `spec`: grows the map around each pose and
/// emits a detection for every clutter item the camera sees.
pub fn generate_session(
    spec: &FloorplanSpec,
    trajectory: &[Pose],
    cfg: &SessionConfig,
) -> Result<Session> {
    if trajectory.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    if trajectory.windows(2).any(|w| w[1].stamp < w[0].stamp) {
        return Err(Error::InvalidArgument("trajectory stamps decrease".into()));
    }
    let cloud = generate_pointcloud(spec)?;
    let r2 = cfg.sensor_radius * cfg.sensor_radius;
    let mut reveal = vec![None; cloud.map.len()];
    let mut pending: Vec<usize> = (0..cloud.map.len()).collect();
    for pose in trajectory {
        let (x, y) = (pose.translation.x, pose.translation.y);
        pending.retain(|&i| {
            let p = &cloud.map.points[i];
            let d2 = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
            if d2 <= r2 {
                reveal[i] = Some(pose.stamp);
                false
            } else {
                true
            }
        });
    }

    let camera = mount_extrinsic();
    let walls = spec.walls();
    let mut detections = Vec::new();
    let mut next_frame = trajectory[0].stamp;
    for pose in trajectory {
        if pose.stamp + 1e-9 < next_frame {
            continue;
        }
        next_frame += cfg.detection_period;
        let cam = camera.at_pose(pose);
        let eye = [pose.translation.x, pose.translation.y];
        for c in &spec.clutter {
            let target = c.center;
            let (dx, dy) = (target[0] - eye[0], target[1] - eye[1]);
            if dx * dx + dy * dy > r2 {
                continue;
            }
            if walls.iter().any(|w| w.blocks(eye, target)) {
                continue;
            }
            let Some(mask) = project_box(&cam, &c.corners(spec.wall_height)) else {
                continue;
            };
            let area = mask.iter().filter(|&&m| m).count() as u64;
            if area < cfg.min_mask_px {
                continue;
            }
            let bbox = Detection::mask_bbox(&mask, cam.width).expect("mask is non-empty");
            detections.push(Detection {
                stamp: pose.stamp,
                class_id: class_id(&c.class_name),
                class_name: c.class_name.clone(),
                bbox,
                mask: MaskRle::encode(cam.width, cam.height, &mask),
                confidence: 0.9,
            });
        }
    }
    Ok(Session { cloud, reveal, poses: trajectory.to_vec(), detections, camera })
}

/// Image mask of the convex hull of projected corners; `None` when any
/// corner is behind the camera.
fn project_box(cam: &CameraModel, corners: &[[f64; 3]; 8]) -> Option<Vec<bool>> {
    let mut pts = Vec::with_capacity(8);
    for c in corners {
        let ip = cam.project_point(&Point3::new(c[0], c[1], c[2])).ok()?;
        if ip.depth < 0.1 {
            return None;
        }
        pts.push([ip.u, ip.v]);
    }
    let hull = convex_hull(pts);
    let (w, h) = (cam.width as usize, cam.height as usize);
    let mut mask = vec![false; w * h];
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &hull {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    let u0 = lo[0].max(0.0) as usize;
    let v0 = lo[1].max(0.0) as usize;
    let u1 = (hi[0].min(w as f64 - 1.0)).max(0.0) as usize;
    let v1 = (hi[1].min(h as f64 - 1.0)).max(0.0) as usize;
    if lo[0] >= w as f64 || lo[1] >= h as f64 || hi[0] < 0.0 || hi[1] < 0.0 {
        return Some(mask);
    }
    for v in v0..=v1 {
        for u in u0..=u1 {
            let p = [u as f64 + 0.5, v as f64 + 0.5];
            if inside_convex(&hull, p) {
                mask[v * w + u] = true;
            }
        }
    }
    Some(mask)
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull (monotone chain).
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: &mut dyn Iterator<Item = &[f64; 2]> =
            if pass == 0 { &mut pts.iter() } else { &mut pts.iter().rev() };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn inside_convex(hull: &[[f64; 2]], p: [f64; 2]) -> bool {
    hull.len() >= 3
        && (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::scenes;

    fn apartment_session() -> (FloorplanSpec, Session) {
        let spec = scenes::five_room_apartment(2);
        let cfg = SessionConfig::default();
        let traj = tour_trajectory(&plan_tour(&spec), &cfg);
        let s = generate_session(&spec, &traj, &cfg).unwrap();
        (spec, s)
    }

    #[test]
    fn tour_visits_every_room_center() {
        let spec = scenes::five_room_apartment(0);
        let tour = plan_tour(&spec);
        let rooms: BTreeSet<u16> =
            tour.iter().filter(|w| w.1).filter_map(|w| spec.room_at(w.0[0], w.0[1])).collect();
        assert_eq!(rooms.len(), 5);
    }

    #[test]
    fn full_tour_reveals_the_whole_cloud_monotonically() {
        let (_, s) = apartment_session();
        assert!(s.reveal.iter().all(|r| r.is_some()));
        let end = s.snapshot(s.duration());
        assert_eq!(end.points, s.cloud.map.points);
        let ticks = s.ticks(1.0);
        let mut last = 0;
        for t in &ticks {
            let n = s.snapshot(t.stamp).len();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn stationary_robot_stops_growing_after_first_pose() {
        let spec = scenes::five_room_apartment(0);
        let traj: Vec<Pose> =
            (0..10).map(|i| Pose::from_yaw(i as f64 * 0.5, Point3::new(1.0, 1.0, 0.8), 0.0)).collect();
        let s = generate_session(&spec, &traj, &SessionConfig::default()).unwrap();
        let first = s.snapshot(0.0).len();
        assert!(first > 0);
        assert_eq!(s.snapshot(4.5).len(), first);
    }

    #[test]
    fn detections_name_visible_objects() {
        let (spec, s) = apartment_session();
        assert!(!s.detections.is_empty());
        for d in &s.detections {
            d.validate(s.camera.width, s.camera.height).unwrap();
            assert!(spec.clutter.iter().any(|c| c.class_name == d.class_name));
            assert_eq!(d.class_id, class_id(&d.class_name));
        }
    }

    #[test]
    fn object_straight_ahead_is_detected() {
        let mut spec = scenes::single_room(6.0, 6.0);
        spec.clutter.push(scenes::furniture("chair", [4.0, 3.0]));
        let traj = [Pose::from_yaw(0.0, Point3::new(1.0, 3.0, 0.8), 0.0)];
        let s = generate_session(&spec, &traj, &SessionConfig::default()).unwrap();
        assert_eq!(s.detections.len(), 1);
        assert_eq!(s.detections[0].class_name, "chair");
        let behind = [Pose::from_yaw(0.0, Point3::new(1.0, 3.0, 0.8), core::f64::consts::PI)];
        let s = generate_session(&spec, &behind, &SessionConfig::default()).unwrap();
        assert!(s.detections.is_empty());
    }
}
