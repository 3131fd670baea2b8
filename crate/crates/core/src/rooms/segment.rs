use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::mask::RoomMaskSet;
use crate::bev::BevImage;
use crate::error::{Error, Result};
use crate::math::ceil;

/// Parameters of the built-in distance-transform watershed segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmenterConfig {
    /// Minimum wall clearance of a seed, in pixels.
    pub r_min_px: u32,
    /// Regions smaller than this many square meters are merged away.
    pub min_area_m2: f64,
    /// Two basins merge when the clearance at their saddle reaches this
    /// fraction of the lower basin peak.
    pub merge_ratio: f64,
    /// How far, in meters, a small region may look across walls for a
    /// neighbor to merge into.
    pub merge_reach_m: f64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self { r_min_px: 5, min_area_m2: 1.0, merge_ratio: 0.85, merge_reach_m: 0.3 }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_min_px == 0
            || !(self.min_area_m2 >= 0.0)
            || !(self.merge_ratio > 0.0 && self.merge_ratio <= 1.0)
            || !(self.merge_reach_m >= 0.0)
        {
            return Err(Error::InvalidArgument("invalid segmenter configuration".into()));
        }
        Ok(())
    }
}

const FAR: f64 = 1e20;

/// Exact squared Euclidean distance transform (lower envelope of parabolas),
/// distances measured to the nearest `true` cell of `feature`.
pub(crate) fn squared_edt(feature: &[bool], width: usize, height: usize) -> Vec<f64> {
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut out: Vec<f64> = feature.iter().map(|&b| if b { 0.0 } else { FAR }).collect();
    for x in 0..width {
        for y in 0..height {
            f[y] = out[y * width + x];
        }
        edt_1d(&f[..height], &mut d[..height], &mut v, &mut z);
        for y in 0..height {
            out[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        let row = &mut out[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        edt_1d(&f[..width], &mut d[..width], &mut v, &mut z);
        row.copy_from_slice(&d[..width]);
    }
    out
}

fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let sq = |q: usize| (q * q) as f64;
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + sq(q)) - (f[p] + sq(p))) / (2.0 * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                v[0] = q;
                z[1] = f64::INFINITY;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
            }
            break;
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

struct Basins {
    parent: Vec<u32>,
    peak: Vec<f64>,
}

impl Basins {
    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let up = self.parent[self.parent[a as usize] as usize];
            self.parent[a as usize] = up;
            a = up;
        }
        a
    }

    fn create(&mut self, peak: f64) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.peak.push(peak);
        id
    }

    /// Attaches `b` under `a`; `a` keeps its (higher) peak.
    fn absorb(&mut self, a: u32, b: u32) {
        self.parent[b as usize] = a;
    }
}

const NONE: u32 = u32::MAX;

/// Segments the enclosed free space of a BEV image into room instances.
///
/// Basins of the wall-clearance map grow from their peaks in order of
/// decreasing clearance, with the image border seeding an outside basin; two
/// basins fuse when the clearance where they meet is at least `merge_ratio`
/// of the lower peak, and basins whose peak is under `r_min_px` fuse with
/// whatever they touch first. Whatever ends up in the outside basin is not a
/// room. Regions under `min_area_m2` are
/// merged into the largest region within `merge_reach_m`.
pub fn segment_rooms(img: &BevImage, cfg: &SegmenterConfig) -> Result<RoomMaskSet> {
    cfg.validate()?;
    let image = &img.image;
    let (w, h) = (image.width as usize, image.height as usize);
    let walls = image.wall_mask();
    if walls.iter().all(|&b| b) {
        return Err(Error::NoFreeSpace);
    }

    if !walls.iter().any(|&b| b) {
        return Ok(RoomMaskSet::empty(image.width, image.height, Some(img.transform)));
    }

    let dist = squared_edt(&walls, w, h);
    let r_min2 = (cfg.r_min_px as f64) * (cfg.r_min_px as f64);
    let ratio2 = cfg.merge_ratio * cfg.merge_ratio;

    // The border starts as an outside basin with an unbounded peak, so free
    // space joins it through the same saddle rule that merges rooms.
    let mut basin = vec![NONE; w * h];
    let mut basins = Basins { parent: Vec::new(), peak: Vec::new() };
    let outside = basins.create(f64::INFINITY);
    for i in 0..w * h {
        let (x, y) = (i % w, i / w);
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) && !walls[i] {
            basin[i] = outside;
        }
    }

    // Counting sort of the remaining free pixels by decreasing squared clearance.
    let inside: Vec<usize> = (0..w * h).filter(|&i| !walls[i] && basin[i] == NONE).collect();
    let max_d = inside.iter().map(|&i| dist[i] as usize).max().unwrap_or(0);
    let mut bucket_start = vec![0usize; max_d + 2];
    for &i in &inside {
        bucket_start[max_d - dist[i] as usize + 1] += 1;
    }
    for k in 1..bucket_start.len() {
        bucket_start[k] += bucket_start[k - 1];
    }
    let mut order = vec![0usize; inside.len()];
    for &i in &inside {
        let b = max_d - dist[i] as usize;
        order[bucket_start[b]] = i;
        bucket_start[b] += 1;
    }

    let mut touching: Vec<u32> = Vec::with_capacity(4);
    for &i in &order {
        let d = dist[i];
        touching.clear();
        for j in neighbors4(i, w, h).into_iter().flatten() {
            if basin[j] != NONE {
                let r = basins.find(basin[j]);
                if !touching.contains(&r) {
                    touching.push(r);
                }
            }
        }
        if touching.is_empty() {
            basin[i] = basins.create(d);
            continue;
        }
        touching.sort_by(|&a, &b| {
            basins.peak[b as usize].total_cmp(&basins.peak[a as usize]).then(a.cmp(&b))
        });
        let primary = touching[0];
        for &other in &touching[1..] {
            let low = basins.peak[other as usize];
            if low < r_min2 || d >= ratio2 * low {
                basins.absorb(primary, other);
            }
        }
        basin[i] = primary;
    }

    // Resolve basins; the outside and unseeded basins are not rooms.
    let outside = basins.find(outside);
    let mut region = vec![NONE; w * h];
    for &i in &inside {
        let r = basins.find(basin[i]);
        if r != outside && basins.peak[r as usize] >= r_min2 {
            region[i] = r;
        }
    }

    let min_px = cfg.min_area_m2 / (img.transform.meters_per_pixel * img.transform.meters_per_pixel);
    let reach = ceil(cfg.merge_reach_m / img.transform.meters_per_pixel) as usize;
    merge_small_regions(&mut region, &walls, w, h, min_px, reach);

    // Number rooms in row-major order of their first pixel.
    let mut ids: BTreeMap<u32, u16> = BTreeMap::new();
    let mut labels = vec![0u16; w * h];
    for i in 0..w * h {
        let r = region[i];
        if r == NONE {
            continue;
        }
        let next = ids.len() + 1;
        let id = *ids.entry(r).or_insert(next.min(u16::MAX as usize) as u16);
        if next > u16::MAX as usize {
            return Err(Error::InvariantViolation("more than 65535 room regions".into()));
        }
        labels[i] = id;
    }
    RoomMaskSet::from_labels(image.width, image.height, labels, Some(img.transform))
}

fn neighbors4(i: usize, w: usize, h: usize) -> [Option<usize>; 4] {
    let (x, y) = (i % w, i / w);
    [
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y > 0).then(|| i - w),
        (y + 1 < h).then(|| i + w),
    ]
}

/// Folds every region smaller than `min_px` into the largest region reached
/// by walking at most `reach` pixels from it (through walls or free space);
/// regions with nothing in reach stay as they are.
fn merge_small_regions(region: &mut [u32], walls: &[bool], w: usize, h: usize, min_px: f64, reach: usize) {
    let mut area: BTreeMap<u32, usize> = BTreeMap::new();
    for &r in region.iter() {
        if r != NONE {
            *area.entry(r).or_default() += 1;
        }
    }
    let mut small: Vec<(usize, u32)> =
        area.iter().filter(|(_, &a)| (a as f64) < min_px).map(|(&r, &a)| (a, r)).collect();
    small.sort();
    if small.is_empty() {
        return;
    }
    let small_ids: BTreeSet<u32> = small.iter().map(|s| s.1).collect();
    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &r) in region.iter().enumerate() {
        if small_ids.contains(&r) {
            members.entry(r).or_default().push(i);
        }
    }
    let mut steps = vec![u32::MAX; w * h];
    let mut touched = Vec::new();
    for (_, r) in small {
        let Some(pixels) = members.remove(&r) else { continue };
        let current = region[pixels[0]];
        if (area[&current] as f64) >= min_px {
            continue;
        }
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &i in &pixels {
            steps[i] = 0;
            touched.push(i);
            queue.push_back(i);
        }
        let mut best: Option<(usize, u32)> = None;
        while let Some(i) = queue.pop_front() {
            let s = steps[i] as usize;
            for j in neighbors4(i, w, h).into_iter().flatten() {
                if steps[j] != u32::MAX {
                    continue;
                }
                let rj = region[j];
                if rj != NONE && rj != current {
                    let a = area[&rj];
                    if best.is_none_or(|(ba, br)| a > ba || (a == ba && rj < br)) {
                        best = Some((a, rj));
                    }
                    continue;
                }
                if s < reach && (walls[j] || rj == NONE) {
                    steps[j] = s as u32 + 1;
                    touched.push(j);
                    queue.push_back(j);
                }
            }
        }
        for i in touched.drain(..) {
            steps[i] = u32::MAX;
        }
        if let Some((_, target)) = best {
            for &i in &pixels {
                region[i] = target;
            }
            *area.get_mut(&target).unwrap() += pixels.len();
            area.insert(current, 0);
            if let Some(m) = members.get_mut(&target) {
                m.extend_from_slice(&pixels);
            }
        }
    }
}
