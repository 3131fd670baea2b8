//! Stage timings against map size.

use std::time::Instant;

use bimgraph_core::bev::{generate_bev, BevState};
use bimgraph_core::config::PipelineConfig;
use bimgraph_core::graph::{GraphBuilder, GraphInputs};
use bimgraph_core::pix2vox::{build_index, colorize, room_centroid, Palette};
use bimgraph_core::rooms::segment_rooms;
use bimgraph_core::synth::{generate_pointcloud, scenes, FloorplanSpec};
use bimgraph_core::VoxelGrid;
use serde::Serialize;

use crate::denoise::denoise;
use crate::error::{AppError, AppResult};
use crate::pipeline::ms_since;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub requested: usize,
    pub points: usize,
    /// Rooms found by the segmenter.
    pub rooms: usize,
    pub bev_ms: f64,
    pub segment_ms: f64,
    pub colorize_ms: f64,
    pub graph_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Coefficient of determination of a straight-line fit of time against
    /// point count; absent for fewer than two sizes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bev_r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colorize_r2: Option<f64>,
    /// Slowest over fastest time across sizes.
    pub segment_spread: f64,
    pub graph_spread: f64,
}

/// R² of the least-squares line through `(x, y)`.
pub fn linear_r2(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    if syy == 0.0 {
        return Some(1.0);
    }
    let slope = sxy / sxx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (my + slope * (a - mx))).powi(2)).sum();
    Some(1.0 - ss_res / syy)
}

fn spread(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, 0.0f64), |(lo, hi), t| (lo.min(t), hi.max(t)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// The 5-room apartment with its sampling density scaled so the cloud holds
/// about `points` points.
pub fn sized_world(points: usize, seed: u64) -> AppResult<FloorplanSpec> {
    let mut spec = scenes::five_room_apartment(seed);
    let base = generate_pointcloud(&spec)?.map.len();
    spec.density *= points as f64 / base as f64;
    Ok(spec)
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> AppResult<T>) -> AppResult<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        let v = f()?;
        best = best.min(ms_since(t));
        out = Some(v);
    }
    Ok((out.expect("at least one repetition"), best))
}

/// Times BEV generation, segmentation, colorization and one graph update on
/// synthetic maps of the requested sizes.
pub fn bench(cfg: &PipelineConfig, sizes: &[usize], seed: u64) -> AppResult<BenchReport> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(AppError::Usage("benchmark sizes must be positive".into()));
    }
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in sizes {
        let spec = sized_world(n, seed)?;
        let map = generate_pointcloud(&spec)?.map;
        let reps = if map.len() <= 1_000_000 { 3 } else { 1 };
        let ((bev, _), bev_ms) = best_of(reps, || Ok(generate_bev(&map, BevState::default(), &cfg.bev)?))?;
        let denoised = denoise(&bev, &cfg.denoise)?;
        let (masks, segment_ms) = best_of(reps, || Ok(segment_rooms(&denoised, &cfg.segmenter)?))?;
        let (colored, colorize_ms) = best_of(reps, || {
            let grid = VoxelGrid::aligned(&map.points, &bev.transform, cfg.bev.voxel_size)?;
            let idx = build_index(grid, &bev.transform)?;
            let c = colorize(&map, &idx, &masks, &Palette::default())?;
            let cent = masks
                .instances
                .iter()
                .map(|i| room_centroid(i.id, &masks, &idx))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((c, cent))
        })?;
        let (_, graph_ms) = best_of(reps, || {
            let mut b = GraphBuilder::new();
            b.update(&GraphInputs { masks: &masks, room_centroids: &colored.1, scenes: &[], objects: &[] })?;
            Ok(())
        })?;
        log::info!("{} points: bev {bev_ms:.1} ms, segment {segment_ms:.1} ms", map.len());
        rows.push(BenchRow { requested: n, points: map.len(), rooms: masks.len(), bev_ms, segment_ms, colorize_ms, graph_ms });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.points as f64).collect();
    let col = |f: fn(&BenchRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(BenchReport {
        bev_r2: linear_r2(&x, &col(|r| r.bev_ms)),
        colorize_r2: linear_r2(&x, &col(|r| r.colorize_ms)),
        segment_spread: spread(rows.iter().map(|r| r.segment_ms)),
        graph_spread: spread(rows.iter().map(|r| r.graph_ms)),
        rows,
    })
}
