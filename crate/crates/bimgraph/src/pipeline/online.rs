use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use bimgraph_core::bev::BevState;
use bimgraph_core::config::PipelineConfig;
use bimgraph_core::fusion::Detection;
use bimgraph_core::graph::{diff, GraphBuilder, GraphInputs, SceneGraph};
use bimgraph_core::rooms::RoomMaskSet;
use bimgraph_core::model::BEV_IMAGE_DIM;
use bimgraph_core::{CameraModel, Error as CoreError, Point3, PointCloudMap, Pose};
use serde::Serialize;

use super::{ms_since, run_structure, Semantics, StageTimes, Structure};
use crate::error::{AppError, AppResult};
use crate::io;

/// A recorded session: every map point with the time it entered the map,
/// the trajectory, detections and the camera.
#[derive(Debug, Clone, Default)]
pub struct OnlineInputs {
    /// Points sorted by `stamps`.
    pub points: Vec<Point3>,
    pub stamps: Vec<f64>,
    pub poses: Vec<Pose>,
    pub detections: Vec<Detection>,
    pub camera: Option<CameraModel>,
    /// The detection stream ended mid-record.
    pub truncated: bool,
}

impl OnlineInputs {
    pub fn new(points: Vec<Point3>, stamps: Vec<f64>, poses: Vec<Pose>, detections: Vec<Detection>, camera: Option<CameraModel>) -> AppResult<Self> {
        if points.len() != stamps.len() {
            return Err(AppError::Usage("every session point needs a stamp".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| stamps[a].total_cmp(&stamps[b]).then(a.cmp(&b)));
        let mut detections = detections;
        detections.sort_by(|a, b| a.stamp.total_cmp(&b.stamp));
        Ok(Self {
            points: order.iter().map(|&i| points[i]).collect(),
            stamps: order.iter().map(|&i| stamps[i]).collect(),
            poses,
            detections,
            camera,
            truncated: false,
        })
    }

    /// Reads a session directory: `map.ply` (with a per-point `stamp`),
    /// `poses.tum`, and optionally `detections.jsonl` and `camera.txt`.
    pub fn load(dir: &Path) -> AppResult<Self> {
        let map_path = dir.join("map.ply");
        let cloud = io::read_cloud(&map_path)?;
        let stamps = cloud
            .stamps
            .ok_or_else(|| AppError::format(&map_path, "session maps need a per-point `stamp` property"))?;
        let poses = io::read_tum(&dir.join("poses.tum"))?;
        let det_path = dir.join("detections.jsonl");
        let stream = if det_path.exists() { io::read_detections(&det_path)? } else { Default::default() };
        let cam_path = dir.join("camera.txt");
        let camera = if cam_path.exists() { Some(io::read_calibration(&cam_path)?) } else { None };
        let mut inputs = Self::new(cloud.points, stamps, poses, stream.detections, camera)?;
        inputs.truncated = stream.truncated;
        Ok(inputs)
    }

    /// Last moment with data.
    pub fn end(&self) -> f64 {
        [
            self.stamps.last().copied(),
            self.poses.last().map(|p| p.stamp),
            self.detections.last().map(|d| d.stamp),
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }

    /// Map as known at `t`.
    pub fn snapshot(&self, t: f64) -> PointCloudMap {
        let n = self.stamps.partition_point(|s| *s <= t);
        PointCloudMap { points: self.points[..n].to_vec(), stamp: t }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OnlineOptions {
    /// Directory for revisioned graphs, the event log and timings.
    pub out_dir: Option<PathBuf>,
    pub max_ticks: Option<usize>,
}

/// State visible after each tick.
pub struct TickReport<'a> {
    pub index: usize,
    pub stamp: f64,
    pub map_points: usize,
    pub graph: &'a SceneGraph,
    pub masks: &'a RoomMaskSet,
    pub times: StageTimes,
}

#[derive(Debug, Clone)]
pub struct OnlineSummary {
    pub ticks: usize,
    pub graph: SceneGraph,
    /// Structure of the last tick that had enough map to segment.
    pub structure: Option<Structure>,
    pub interrupted: bool,
    pub times: Vec<StageTimes>,
}

#[derive(Serialize)]
struct TickTiming<'a> {
    tick: usize,
    stamp: f64,
    revision: u64,
    map_points: usize,
    rooms: usize,
    #[serde(flatten)]
    stages: &'a StageTimes,
}

#[derive(Serialize)]
struct Latest<'a> {
    revision: u64,
    path: &'a str,
}

struct Sinks {
    dir: PathBuf,
    events: BufWriter<File>,
    timing: BufWriter<File>,
}

impl Sinks {
    fn open(dir: &Path) -> AppResult<Self> {
        std::fs::create_dir_all(dir.join("graphs")).map_err(|e| AppError::io(dir, e))?;
        let create = |name: &str| {
            let p = dir.join(name);
            File::create(&p).map(BufWriter::new).map_err(|e| AppError::io(&p, e))
        };
        Ok(Self { dir: dir.to_path_buf(), events: create("events.ndjson")?, timing: create("timing.jsonl")? })
    }

    fn write_tick(&mut self, prev: &SceneGraph, graph: &SceneGraph, timing: &TickTiming) -> AppResult<()> {
        let json = graph.to_json()?;
        let name = format!("graphs/graph_{:06}.json", graph.revision);
        io::write_with(&self.dir.join(&name), |w| writeln!(w, "{json}"))?;
        io::write_json(&self.dir.join("latest.json"), &Latest { revision: graph.revision, path: &name })?;
        let events = &self.dir.join("events.ndjson");
        for ev in diff(prev, graph) {
            serde_json::to_writer(&mut self.events, &ev).map_err(|e| AppError::format(events, e.to_string()))?;
            self.events.write_all(b"\n").map_err(|e| AppError::io(events, e))?;
        }
        self.events.flush().map_err(|e| AppError::io(events, e))?;
        let tpath = &self.dir.join("timing.jsonl");
        serde_json::to_writer(&mut self.timing, timing).map_err(|e| AppError::format(tpath, e.to_string()))?;
        self.timing.write_all(b"\n").and_then(|_| self.timing.flush()).map_err(|e| AppError::io(tpath, e))
    }
}

/// Errors that only mean the map is still too small to have structure.
fn is_immature(e: &AppError) -> bool {
    matches!(
        e,
        AppError::Core(
            CoreError::EmptyMap | CoreError::EmptyAfterFloorFilter | CoreError::NoOccupiedBins | CoreError::NoFreeSpace
        )
    )
}

/// Replays a session tick by tick: every `cfg.tick_period` seconds of
/// session time the map snapshot is rebuilt into BEV, rooms and a new graph
/// revision while the tick's detections are fused concurrently. Setting
/// `stop` ends the replay after the current tick; outputs written so far
/// stay consistent.
pub fn run_online(
    inputs: &OnlineInputs,
    cfg: &PipelineConfig,
    opts: &OnlineOptions,
    stop: Option<&AtomicBool>,
    mut on_tick: impl FnMut(&TickReport<'_>),
) -> AppResult<OnlineSummary> {
    cfg.validate()?;
    let mut sinks = opts.out_dir.as_deref().map(Sinks::open).transpose()?;
    let end = inputs.end();
    let n_ticks = ((end / cfg.tick_period).ceil() as usize).max(1);

    let mut semantics = Semantics::new(cfg, inputs.camera);
    let mut builder = GraphBuilder::new();
    let mut state = BevState::default();
    let mut structure: Option<Structure> = None;
    let mut all_times = Vec::new();
    let mut det_cursor = 0;
    let mut interrupted = false;
    let mut ticks = 0;

    for k in 1..=n_ticks {
        if stop.is_some_and(|s| s.load(Ordering::Relaxed)) || opts.max_ticks.is_some_and(|m| ticks >= m) {
            interrupted = true;
            break;
        }
        let tick_start = Instant::now();
        let stamp = (k as f64 * cfg.tick_period).min(end);
        let last = k == n_ticks;
        let map = inputs.snapshot(stamp);
        let det_end = det_cursor + inputs.detections[det_cursor..].partition_point(|d| d.stamp <= stamp);
        let dets = &inputs.detections[det_cursor..det_end];
        det_cursor = det_end;

        let mut times = StageTimes::default();
        let (result, fusion_ms) = std::thread::scope(|s| {
            let branch = s.spawn(|| {
                let t = Instant::now();
                semantics.advance(dets, &map, &inputs.poses, stamp, cfg);
                if last {
                    semantics.finish(stamp, &inputs.poses);
                }
                ms_since(t)
            });
            let r = run_structure(&map, state, cfg, None, &mut times);
            (r, branch.join().expect("semantic branch panicked"))
        });
        times.fusion_ms = fusion_ms;
        match result {
            Ok(s) => {
                state = s.state;
                structure = Some(s);
            }
            Err(e) if is_immature(&e) => {}
            Err(e) => return Err(e),
        }

        let t = Instant::now();
        let empty;
        let (masks, centroids) = match &structure {
            Some(s) => (&s.masks, s.centroids.as_slice()),
            None => {
                empty = RoomMaskSet::empty(BEV_IMAGE_DIM, BEV_IMAGE_DIM, None);
                (&empty, &[][..])
            }
        };
        let prev = builder.graph().clone();
        let graph = builder.update(&GraphInputs {
            masks,
            room_centroids: centroids,
            scenes: &semantics.tracker.scenes,
            objects: semantics.tracker.registry.objects(),
        })?;
        times.graph_ms = ms_since(t);
        times.total_ms = ms_since(tick_start);

        if let Some(sinks) = sinks.as_mut() {
            let timing = TickTiming {
                tick: k,
                stamp,
                revision: graph.revision,
                map_points: map.len(),
                rooms: masks.len(),
                stages: &times,
            };
            sinks.write_tick(&prev, graph, &timing)?;
        }
        on_tick(&TickReport { index: k, stamp, map_points: map.len(), graph, masks, times });
        all_times.push(times);
        ticks += 1;
    }

    if let (Some(dir), Some(s)) = (opts.out_dir.as_deref(), structure.as_ref()) {
        io::write_bev(&dir.join("bev.pgm"), &s.bev)?;
        io::write_bev(&dir.join("bev_denoised.pgm"), &s.denoised)?;
        io::write_label_raster(&dir.join("rooms.pgm"), &s.masks)?;
    }
    Ok(OnlineSummary {
        ticks,
        graph: builder.graph().clone(),
        structure,
        interrupted: interrupted || inputs.truncated,
        times: all_times,
    })
}
