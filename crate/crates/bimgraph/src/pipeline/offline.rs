use std::path::Path;
use std::time::Instant;

use bimgraph_core::bev::BevState;
use bimgraph_core::config::{PipelineConfig, SegmenterBackend};
use bimgraph_core::fusion::Detection;
use bimgraph_core::graph::{GraphBuilder, GraphInputs, SceneGraph};
use bimgraph_core::pix2vox::{colorize, ColoredCloud, Palette};
use bimgraph_core::rooms::{eval_segmentation, RoomMaskSet, SegMetrics};
use bimgraph_core::{CameraModel, PointCloudMap, Pose};
use serde::Serialize;

use super::{ms_since, run_structure, Semantics, StageTimes, Structure};
use crate::error::{AppError, AppResult};
use crate::io;

/// Everything an offline run consumes.
#[derive(Debug, Clone, Default)]
pub struct OfflineInputs {
    pub map: PointCloudMap,
    pub detections: Vec<Detection>,
    pub poses: Vec<Pose>,
    pub camera: Option<CameraModel>,
    /// Reference label raster for `metrics.json`.
    pub ground_truth: Option<RoomMaskSet>,
    /// Masks for the import segmenter backend.
    pub imported_masks: Option<RoomMaskSet>,
}

impl OfflineInputs {
    /// Loads the map and whichever optional inputs are given.
    pub fn load(
        map: &Path,
        detections: Option<&Path>,
        poses: Option<&Path>,
        camera: Option<&Path>,
        ground_truth: Option<&Path>,
        cfg: &PipelineConfig,
    ) -> AppResult<Self> {
        let cloud = io::read_cloud(map)?;
        if cloud.points.is_empty() {
            return Err(AppError::format(map, "the map has no points"));
        }
        let stamp = cloud.stamps.as_ref().and_then(|s| s.iter().copied().reduce(f64::max)).unwrap_or(0.0);
        let mut inputs = Self { map: cloud.into_map(stamp), ..Self::default() };
        if let Some(p) = detections {
            inputs.detections = io::read_detections(p)?.detections;
        }
        if let Some(p) = poses {
            inputs.poses = io::read_tum(p)?;
        }
        if let Some(p) = camera {
            inputs.camera = Some(io::read_calibration(p)?);
        }
        if let Some(p) = ground_truth {
            inputs.ground_truth = Some(io::read_label_raster(p, None)?);
        }
        if let SegmenterBackend::Import { path } = &cfg.segmenter_backend {
            inputs.imported_masks = Some(io::read_label_raster(Path::new(path), None)?);
        }
        if !inputs.detections.is_empty() && (inputs.poses.is_empty() || inputs.camera.is_none()) {
            log::warn!("detections need poses and a camera calibration; ignoring them");
            inputs.detections.clear();
        }
        Ok(inputs)
    }
}

#[derive(Debug, Clone)]
pub struct OfflineOutputs {
    pub structure: Structure,
    pub colored: ColoredCloud,
    pub graph: SceneGraph,
    pub metrics: Option<SegMetrics>,
    pub times: StageTimes,
    pub skipped_detections: usize,
}

/// Full-map run: one BEV, one segmentation, one graph revision.
pub fn run_offline(inputs: &OfflineInputs, cfg: &PipelineConfig) -> AppResult<OfflineOutputs> {
    cfg.validate()?;
    let start = Instant::now();
    let mut times = StageTimes::default();
    let end = inputs
        .detections
        .last()
        .map(|d| d.stamp)
        .into_iter()
        .chain(inputs.poses.last().map(|p| p.stamp))
        .fold(inputs.map.stamp, f64::max);

    let mut semantics = Semantics::new(cfg, inputs.camera);
    let (structure, fusion_ms) = std::thread::scope(|s| {
        let branch = s.spawn(|| {
            let t = Instant::now();
            semantics.advance(&inputs.detections, &inputs.map, &inputs.poses, end, cfg);
            semantics.finish(end, &inputs.poses);
            ms_since(t)
        });
        let structure = run_structure(
            &inputs.map,
            BevState::default(),
            cfg,
            inputs.imported_masks.as_ref(),
            &mut times,
        );
        (structure, branch.join().expect("semantic branch panicked"))
    });
    let structure = structure?;
    times.fusion_ms = fusion_ms;

    let t = Instant::now();
    let colored = colorize(&inputs.map, &structure.index, &structure.masks, &Palette::default())?;
    times.pix2vox_ms += ms_since(t);

    let t = Instant::now();
    let mut builder = GraphBuilder::new();
    let graph = builder
        .update(&GraphInputs {
            masks: &structure.masks,
            room_centroids: &structure.centroids,
            scenes: &semantics.tracker.scenes,
            objects: semantics.tracker.registry.objects(),
        })?
        .clone();
    times.graph_ms = ms_since(t);

    let metrics = match &inputs.ground_truth {
        Some(gt) => Some(eval_segmentation(&structure.masks, gt)?),
        None => None,
    };
    times.total_ms = ms_since(start);
    Ok(OfflineOutputs {
        structure,
        colored,
        graph,
        metrics,
        times,
        skipped_detections: semantics.skipped,
    })
}

#[derive(Serialize)]
struct Timing<'a> {
    stages: &'a StageTimes,
    points: usize,
    rooms: usize,
    objects: usize,
    skipped_detections: usize,
}

/// Writes `bev.pgm`/`bev.json`, `bev_denoised.pgm`/`.json`, `rooms.pgm`,
/// `colored.ply`, `graph.json`, `timing.json` and, with ground truth,
/// `metrics.json`.
pub fn write_offline(dir: &Path, out: &OfflineOutputs) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    io::write_bev(&dir.join("bev.pgm"), &out.structure.bev)?;
    io::write_bev(&dir.join("bev_denoised.pgm"), &out.structure.denoised)?;
    io::write_label_raster(&dir.join("rooms.pgm"), &out.structure.masks)?;
    io::write_colored_ply(&dir.join("colored.ply"), &out.colored)?;
    let graph = out.graph.to_json()?;
    let path = dir.join("graph.json");
    io::write_with(&path, |w| writeln!(w, "{graph}"))?;
    if let Some(m) = &out.metrics {
        io::write_json(&dir.join("metrics.json"), m)?;
    }
    io::write_json(
        &dir.join("timing.json"),
        &Timing {
            stages: &out.times,
            points: out.colored.points.len(),
            rooms: out.structure.masks.len(),
            objects: out.graph.count(bimgraph_core::graph::Layer::Object),
            skipped_detections: out.skipped_detections,
        },
    )
}
