//! Writing synthetic worlds and sessions as input files for the pipelines.

use std::path::Path;

use bimgraph_core::synth::{
    generate_pointcloud, generate_session, ground_truth_raster, plan_tour, tour_trajectory, FloorplanSpec,
    Session, SessionConfig,
};
use bimgraph_core::{GridTransform, Point3};

use crate::error::{AppError, AppResult};
use crate::io;

fn transform_of(points: &[Point3]) -> AppResult<GridTransform> {
    let map = bimgraph_core::PointCloudMap { points: points.to_vec(), stamp: 0.0 };
    let (lo, hi) = map.xy_bounds().ok_or(bimgraph_core::Error::EmptyMap)?;
    Ok(GridTransform::from_bounds(lo, hi))
}

/// Writes `spec.json`, `map.ply` and `gt_rooms.pgm` (ground-truth rooms on
/// the grid the pipeline derives from `map.ply`).
pub fn write_world(dir: &Path, spec: &FloorplanSpec) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let cloud = generate_pointcloud(spec)?;
    io::write_json(&dir.join("spec.json"), spec)?;
    io::write_ply(&dir.join("map.ply"), &cloud.map.points, None)?;
    let gt = ground_truth_raster(spec, &transform_of(&cloud.map.points)?)?;
    io::write_label_raster(&dir.join("gt_rooms.pgm"), &gt)
}

/// Simulates a tour of `spec` and writes it as a session directory:
/// `map.ply` with per-point reveal stamps, `poses.tum`, `detections.jsonl`,
/// `camera.txt`, plus `spec.json` and `gt_rooms.pgm` for the final map.
pub fn write_session(dir: &Path, spec: &FloorplanSpec, cfg: &SessionConfig) -> AppResult<Session> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let trajectory = tour_trajectory(&plan_tour(spec), cfg);
    let session = generate_session(spec, &trajectory, cfg)?;
    let mut seen: Vec<(f64, Point3)> = session
        .cloud
        .map
        .points
        .iter()
        .zip(&session.reveal)
        .filter_map(|(p, r)| r.map(|s| (s, *p)))
        .collect();
    seen.sort_by(|a, b| a.0.total_cmp(&b.0));
    let points: Vec<Point3> = seen.iter().map(|(_, p)| *p).collect();
    let stamps: Vec<f64> = seen.iter().map(|(s, _)| *s).collect();
    io::write_json(&dir.join("spec.json"), spec)?;
    io::write_ply(&dir.join("map.ply"), &points, Some(&stamps))?;
    io::write_tum(&dir.join("poses.tum"), &session.poses)?;
    io::write_detections(&dir.join("detections.jsonl"), &session.detections)?;
    io::write_calibration(&dir.join("camera.txt"), &session.camera)?;
    let gt = ground_truth_raster(spec, &transform_of(&points)?)?;
    io::write_label_raster(&dir.join("gt_rooms.pgm"), &gt)?;
    Ok(session)
}
