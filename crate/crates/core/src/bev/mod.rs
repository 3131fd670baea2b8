//! Top-down structural (BEV) image generation.
//!
//! Each interior bin collects the voxel columns that fall in it. A bin is
//! scored from its point count and its vertical extent,
//!
//! `S = w_density · count + w_height · (max_z − min_z)`,
//!
//! and marked as wall when the score reaches a running threshold that tracks
//! the mean occupied-bin score with an exponential moving average. Tall dense
//! columns (walls) pass; thin dense layers (ceiling fixtures) and short
//! clutter do not.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GrayImage, GridTransform, PointCloudMap, VoxelGrid, FREE, WALL};

/// Density weight of the bin score.
pub const DENSITY_WEIGHT: f64 = 0.4;
/// Height-extent weight of the bin score.
pub const HEIGHT_WEIGHT: f64 = 0.6;
/// Weight of the previous threshold in the moving average.
pub const EMA_ALPHA: f64 = 0.85;

/// Per-bin column statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub count: u64,
    pub min_z: f64,
    pub max_z: f64,
}

impl BinStats {
    pub fn height_range(&self) -> f64 {
        self.max_z - self.min_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Weights applied to the raw count and the extent in meters.
    Raw,
    /// Count and extent divided by their per-frame maxima first.
    #[default]
    Normalized,
}

/// Largest count and extent over the occupied bins of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMaxima {
    pub count_max: f64,
    pub range_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BevConfig {
    /// Upper bound on the voxel edge; the actual edge divides the pixel size.
    pub voxel_size: f64,
    /// Percentile of z taken as the floor level.
    pub floor_percentile: f64,
    /// Thickness of the band above the floor level that is discarded.
    pub floor_band: f64,
    pub score_mode: ScoreMode,
    pub density_weight: f64,
    pub height_weight: f64,
    pub ema_alpha: f64,
}

impl Default for BevConfig {
    fn default() -> Self {
        Self {
            voxel_size: crate::model::DEFAULT_VOXEL_SIZE,
            floor_percentile: 1.0,
            floor_band: 0.20,
            score_mode: ScoreMode::Normalized,
            density_weight: DENSITY_WEIGHT,
            height_weight: HEIGHT_WEIGHT,
            ema_alpha: EMA_ALPHA,
        }
    }
}

impl BevConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.voxel_size > 0.0) {
            return bad("bev.voxel_size must be positive");
        }
        if !(0.0..=100.0).contains(&self.floor_percentile) {
            return bad("bev.floor_percentile must be in [0, 100]");
        }
        if !(self.floor_band >= 0.0) {
            return bad("bev.floor_band must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.ema_alpha) {
            return bad("bev.ema_alpha must be in [0, 1]");
        }
        if !(self.density_weight >= 0.0 && self.height_weight >= 0.0) {
            return bad("bev score weights must be non-negative");
        }
        Ok(())
    }
}

/// Running wall threshold carried between frames.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BevState {
    pub threshold: f64,
    pub initialized: bool,
}

/// Structural image with its pixel↔world mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct BevImage {
    pub image: GrayImage,
    pub transform: GridTransform,
    pub stamp: f64,
}

impl BevImage {
    pub fn blank(transform: GridTransform, stamp: f64) -> Self {
        let dim = transform.image_dim();
        Self { image: GrayImage::filled(dim, dim, FREE), transform, stamp }
    }
}

pub fn bin_score(bin: &BinStats, cfg: &BevConfig, maxima: &FrameMaxima) -> f64 {
    let range = bin.height_range();
    match cfg.score_mode {
        ScoreMode::Raw => cfg.density_weight * bin.count as f64 + cfg.height_weight * range,
        ScoreMode::Normalized => {
            let density = if maxima.count_max > 0.0 { bin.count as f64 / maxima.count_max } else { 0.0 };
            let height = if maxima.range_max > 0.0 { range / maxima.range_max } else { 0.0 };
            cfg.density_weight * density + cfg.height_weight * height
        }
    }
}

/// Folds the mean of this frame's scores into the running threshold.
pub fn update_threshold(state: BevState, scores: &[f64], alpha: f64) -> Result<BevState> {
    if scores.is_empty() {
        return Err(Error::NoOccupiedBins);
    }
    let current = scores.iter().sum::<f64>() / scores.len() as f64;
    let threshold = if state.initialized {
        alpha * state.threshold + (1.0 - alpha) * current
    } else {
        current
    };
    Ok(BevState { threshold, initialized: true })
}

/// Splits off the floor band; returns the remaining map and the floor level.
pub fn split_floor(map: &PointCloudMap, cfg: &BevConfig) -> Result<(PointCloudMap, f64)> {
    if map.is_empty() {
        return Err(Error::EmptyMap);
    }
    let mut zs: Vec<f64> = map.points.iter().map(|p| p.z).collect();
    let rank = (cfg.floor_percentile / 100.0 * (zs.len() - 1) as f64) as usize;
    let (_, floor_z, _) = zs.select_nth_unstable_by(rank, |a, b| a.total_cmp(b));
    let floor_z = *floor_z;
    let cut = floor_z + cfg.floor_band;
    let points: Vec<_> = map.points.iter().copied().filter(|p| p.z >= cut).collect();
    if points.is_empty() {
        return Err(Error::EmptyAfterFloorFilter);
    }
    Ok((PointCloudMap { points, stamp: map.stamp }, floor_z))
}

/// Drops points lower than the floor level plus the floor band.
pub fn remove_floor(map: &PointCloudMap, cfg: &BevConfig) -> Result<PointCloudMap> {
    split_floor(map, cfg).map(|(m, _)| m)
}

/// Occupied bins of a frame in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    pub transform: GridTransform,
    /// `(row-major interior index, stats)` for each occupied bin.
    pub bins: Vec<(u32, BinStats)>,
}

impl BinGrid {
    /// Voxelizes `points` on a lattice nested in the pixels of `gt` and sums
    /// each voxel column into its bin.
    pub fn from_map(map: &PointCloudMap, gt: &GridTransform, voxel_size: f64) -> Result<Self> {
        let voxels = VoxelGrid::aligned(&map.points, gt, voxel_size)?;
        let dim = gt.grid_dim as usize;
        let mut count = vec![0u64; dim * dim];
        let mut lo = vec![f64::INFINITY; dim * dim];
        let mut hi = vec![f64::NEG_INFINITY; dim * dim];
        for (key, cell) in voxels.iter() {
            let (bx, by) = voxels.bin_of(key);
            if bx < 0 || by < 0 || bx as usize >= dim || by as usize >= dim {
                continue;
            }
            let i = by as usize * dim + bx as usize;
            count[i] += cell.count as u64;
            lo[i] = lo[i].min(cell.min_z);
            hi[i] = hi[i].max(cell.max_z);
        }
        let bins = (0..dim * dim)
            .filter(|&i| count[i] > 0)
            .map(|i| (i as u32, BinStats { count: count[i], min_z: lo[i], max_z: hi[i] }))
            .collect();
        Ok(Self { transform: *gt, bins })
    }

    pub fn maxima(&self) -> FrameMaxima {
        self.bins.iter().fold(FrameMaxima { count_max: 0.0, range_max: 0.0 }, |m, (_, b)| {
            FrameMaxima {
                count_max: m.count_max.max(b.count as f64),
                range_max: m.range_max.max(b.height_range()),
            }
        })
    }

    pub fn scores(&self, cfg: &BevConfig) -> Vec<f64> {
        let maxima = self.maxima();
        self.bins.iter().map(|(_, b)| bin_score(b, cfg, &maxima)).collect()
    }

    /// Image with every bin whose `keep` predicate holds drawn as wall.
    pub fn render(&self, stamp: f64, mut keep: impl FnMut(usize, &BinStats) -> bool) -> BevImage {
        let mut bev = BevImage::blank(self.transform, stamp);
        let dim = self.transform.grid_dim;
        let pad = self.transform.padding_px;
        for (n, (i, b)) in self.bins.iter().enumerate() {
            if keep(n, b) {
                bev.image.set(i % dim + pad, i / dim + pad, WALL);
            }
        }
        bev
    }
}

/// Wall image of `scores` at threshold `t`: a bin is wall iff its score ≥ `t`.
pub fn render_scores(grid: &BinGrid, scores: &[f64], t: f64, stamp: f64) -> BevImage {
    grid.render(stamp, |n, _| scores[n] >= t)
}

fn map_transform(map: &PointCloudMap) -> Result<GridTransform> {
    let (lo, hi) = map.xy_bounds().ok_or(Error::EmptyMap)?;
    Ok(GridTransform::from_bounds(lo, hi))
}

/// Adaptive-threshold BEV of `map`; the grid covers the map's full XY bounds.
pub fn generate_bev(
    map: &PointCloudMap,
    state: BevState,
    cfg: &BevConfig,
) -> Result<(BevImage, BevState)> {
    let gt = map_transform(map)?;
    generate_bev_with_transform(map, &gt, state, cfg)
}

pub fn generate_bev_with_transform(
    map: &PointCloudMap,
    gt: &GridTransform,
    state: BevState,
    cfg: &BevConfig,
) -> Result<(BevImage, BevState)> {
    let structure = remove_floor(map, cfg)?;
    let grid = BinGrid::from_map(&structure, gt, cfg.voxel_size)?;
    let scores = grid.scores(cfg);
    let state = update_threshold(state, &scores, cfg.ema_alpha)?;
    Ok((render_scores(&grid, &scores, state.threshold, map.stamp), state))
}

/// Baseline: a bin is wall iff some point in it stands at least `z_thresh`
/// above the floor level.
pub fn generate_bev_fixed_threshold(
    map: &PointCloudMap,
    z_thresh: f64,
    cfg: &BevConfig,
) -> Result<BevImage> {
    let gt = map_transform(map)?;
    let (structure, floor_z) = split_floor(map, cfg)?;
    let grid = BinGrid::from_map(&structure, &gt, cfg.voxel_size)?;
    Ok(grid.render(map.stamp, |_, b| b.max_z - floor_z >= z_thresh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point3;

    fn raw() -> BevConfig {
        BevConfig { score_mode: ScoreMode::Raw, ..Default::default() }
    }

    const NO_NORM: FrameMaxima = FrameMaxima { count_max: 1.0, range_max: 1.0 };

    #[test]
    fn raw_score_substitution() {
        let b = BinStats { count: 10, min_z: 0.0, max_z: 2.5 };
        assert!((bin_score(&b, &raw(), &NO_NORM) - 5.5).abs() < 1e-12);
    }

    #[test]
    fn normalized_score_of_frame_maximum_is_one() {
        let b = BinStats { count: 7, min_z: 0.3, max_z: 2.1 };
        let m = FrameMaxima { count_max: 7.0, range_max: 1.8 };
        assert!((bin_score(&b, &BevConfig::default(), &m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ema_update_and_initialization() {
        let s = update_threshold(BevState::default(), &[3.0], EMA_ALPHA).unwrap();
        assert_eq!(s, BevState { threshold: 3.0, initialized: true });
        let s = update_threshold(BevState { threshold: 1.0, initialized: true }, &[2.0], EMA_ALPHA)
            .unwrap();
        assert!((s.threshold - 1.15).abs() < 1e-12);
        assert_eq!(update_threshold(s, &[], EMA_ALPHA), Err(Error::NoOccupiedBins));
    }

    #[test]
    fn ema_converges_geometrically() {
        let mut s = BevState { threshold: 0.0, initialized: true };
        for k in 1..=40 {
            s = update_threshold(s, &[2.0], EMA_ALPHA).unwrap();
            let expected = 2.0 * (1.0 - EMA_ALPHA.powi(k));
            assert!((s.threshold - expected).abs() < 1e-12);
        }
    }

    fn wall_and_floor() -> PointCloudMap {
        let mut pts = Vec::new();
        for i in 0..50 {
            for j in 0..50 {
                pts.push(Point3::new(i as f64 * 0.1, j as f64 * 0.1, 0.0));
            }
        }
        for i in 0..50 {
            for k in 0..=25 {
                pts.push(Point3::new(i as f64 * 0.1, 2.5, k as f64 * 0.1));
            }
        }
        PointCloudMap::new(pts, 0.0).unwrap()
    }

    #[test]
    fn floor_band_is_removed() {
        let m = remove_floor(&wall_and_floor(), &BevConfig::default()).unwrap();
        assert!(m.points.iter().all(|p| p.z >= 0.2 && p.y == 2.5));
        assert_eq!(m.len(), 50 * 24);
    }

    #[test]
    fn flat_map_is_empty_after_floor_removal() {
        let pts = (0..10).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let m = PointCloudMap::new(pts, 0.0).unwrap();
        assert_eq!(remove_floor(&m, &BevConfig::default()), Err(Error::EmptyAfterFloorFilter));
        assert_eq!(
            generate_bev(&PointCloudMap::default(), BevState::default(), &BevConfig::default())
                .unwrap_err(),
            Error::EmptyMap
        );
    }

    #[test]
    fn fixed_threshold_extremes() {
        let map = wall_and_floor();
        let cfg = BevConfig::default();
        let none = generate_bev_fixed_threshold(&map, 10.0, &cfg).unwrap();
        assert_eq!(none.image.count_walls(), 0);
        let all = generate_bev_fixed_threshold(&map, 0.0, &cfg).unwrap();
        let structure = remove_floor(&map, &cfg).unwrap();
        let grid = BinGrid::from_map(&structure, &all.transform, cfg.voxel_size).unwrap();
        assert_eq!(all.image.count_walls(), grid.bins.len());
    }

    #[test]
    fn padding_stays_white() {
        let (bev, _) = generate_bev(&wall_and_floor(), BevState::default(), &BevConfig::default())
            .unwrap();
        let dim = bev.image.width;
        assert_eq!(dim, 1024);
        for v in 0..dim {
            for u in 0..dim {
                if !bev.transform.is_interior(crate::model::Pixel::new(u, v)) {
                    assert_eq!(bev.image.get(u, v), FREE);
                }
            }
        }
        assert!(bev.image.count_walls() > 0);
    }
}
