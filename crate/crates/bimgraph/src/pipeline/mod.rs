//! Offline and online pipelines. Each run has two branches that execute
//! concurrently and join at the graph update: structure (BEV, denoise,
//! segmentation, pix2vox) and semantics (object localization, scenes).

mod offline;
mod online;

use std::time::Instant;

use bimgraph_core::bev::{generate_bev, remove_floor, BevImage, BevState};
use bimgraph_core::config::{PipelineConfig, SegmenterBackend};
use bimgraph_core::fusion::{nearest_pose, Detection, ObjectSceneTracker, SceneTrigger};
use bimgraph_core::pix2vox::{build_index, room_centroid, PixelVoxelIndex};
use bimgraph_core::rooms::{segment_rooms, RoomMaskSet};
use bimgraph_core::{CameraModel, Point3, PointCloudMap, Pose, VoxelGrid};
use serde::Serialize;

pub use offline::{run_offline, write_offline, OfflineInputs, OfflineOutputs};
pub use online::{run_online, OnlineInputs, OnlineOptions, OnlineSummary, TickReport};

use crate::denoise::denoise;
use crate::error::{AppError, AppResult};

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageTimes {
    pub bev_ms: f64,
    pub denoise_ms: f64,
    pub segment_ms: f64,
    pub pix2vox_ms: f64,
    pub fusion_ms: f64,
    pub graph_ms: f64,
    pub total_ms: f64,
}

pub(crate) fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Output of the structure branch for one map.
#[derive(Debug, Clone)]
pub struct Structure {
    pub bev: BevImage,
    pub denoised: BevImage,
    pub masks: RoomMaskSet,
    pub index: PixelVoxelIndex,
    pub centroids: Vec<Point3>,
    pub state: BevState,
}

/// BEV → denoise → rooms → voxel index and room centroids.
pub fn run_structure(
    map: &PointCloudMap,
    state: BevState,
    cfg: &PipelineConfig,
    imported: Option<&RoomMaskSet>,
    times: &mut StageTimes,
) -> AppResult<Structure> {
    let t = Instant::now();
    let (bev, state) = generate_bev(map, state, &cfg.bev)?;
    times.bev_ms = ms_since(t);

    let t = Instant::now();
    let denoised = denoise(&bev, &cfg.denoise)?;
    times.denoise_ms = ms_since(t);

    let t = Instant::now();
    let masks = match (&cfg.segmenter_backend, imported) {
        (SegmenterBackend::BuiltIn, _) => segment_rooms(&denoised, &cfg.segmenter)?,
        (SegmenterBackend::Import { .. }, Some(m)) => {
            let dim = bev.transform.image_dim();
            if m.width != dim || m.height != dim {
                return Err(bimgraph_core::Error::DimensionMismatch(m.width, m.height, dim, dim).into());
            }
            RoomMaskSet { transform: Some(bev.transform), ..m.clone() }
        }
        (SegmenterBackend::Import { path }, None) => {
            return Err(AppError::Usage(format!("imported masks `{path}` were not loaded")))
        }
    };
    times.segment_ms = ms_since(t);

    let t = Instant::now();
    let grid = VoxelGrid::aligned(&map.points, &bev.transform, cfg.bev.voxel_size)?;
    let index = build_index(grid, &bev.transform)?;
    let centroids = masks
        .instances
        .iter()
        .map(|i| room_centroid(i.id, &masks, &index))
        .collect::<Result<Vec<_>, _>>()?;
    times.pix2vox_ms = ms_since(t);
    Ok(Structure { bev, denoised, masks, index, centroids, state })
}

/// Object and scene layers fed by a detection stream.
#[derive(Debug, Clone)]
pub struct Semantics {
    pub tracker: ObjectSceneTracker,
    pub camera: Option<CameraModel>,
    /// Detections dropped because they could not be localized.
    pub skipped: usize,
}

impl Semantics {
    pub fn new(cfg: &PipelineConfig, camera: Option<CameraModel>) -> Self {
        let trigger = SceneTrigger::new(cfg.scene_trigger.min_detections, cfg.scene_trigger.max_interval);
        Self {
            tracker: ObjectSceneTracker::new(cfg.fusion.clone(), cfg.scene_rules.clone(), trigger),
            camera,
            skipped: 0,
        }
    }

    /// Localizes `dets` against the structure points of `map` (floor band
    /// removed), then polls the time trigger at `stamp`.
    pub fn advance(
        &mut self,
        dets: &[Detection],
        map: &PointCloudMap,
        poses: &[Pose],
        stamp: f64,
        cfg: &PipelineConfig,
    ) {
        let Some(cam) = self.camera else {
            self.skipped += dets.len();
            return;
        };
        let structure = if dets.is_empty() || map.is_empty() {
            PointCloudMap::default()
        } else {
            remove_floor(map, &cfg.bev).unwrap_or_default()
        };
        for d in dets {
            let Some(pose) = nearest_pose(poses, d.stamp) else {
                self.skipped += 1;
                continue;
            };
            match self.tracker.process(d, &structure, pose, &cam) {
                Ok(_) => {}
                Err(e) => {
                    log::debug!("detection at {} skipped: {e}", d.stamp);
                    self.skipped += 1;
                }
            }
        }
        if let Some(pose) = nearest_pose(poses, stamp) {
            self.tracker.poll(stamp, pose);
        }
    }

    pub fn finish(&mut self, stamp: f64, poses: &[Pose]) {
        if let Some(pose) = nearest_pose(poses, stamp) {
            self.tracker.flush(stamp, pose);
        }
    }
}
