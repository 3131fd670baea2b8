use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bev::BevImage;
use crate::error::{Error, Result};
use crate::math::floor;
use crate::model::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorruptConfig {
    /// Percent of wall pixels turned free.
    pub salt_pct: f64,
    /// Percent of free interior pixels turned wall.
    pub pepper_pct: f64,
    pub gap_count: u32,
    pub gap_len: u32,
    pub seed: u64,
}

impl Default for CorruptConfig {
    fn default() -> Self {
        Self { salt_pct: 0.0, pepper_pct: 0.0, gap_count: 0, gap_len: 5, seed: 0 }
    }
}

/// Widest wall band a gap may be cut through.
const MAX_BAND: usize = 8;

/// Seeded degradation of a BEV image: salt removes wall pixels, pepper adds
/// wall pixels in free interior space, and gaps cut `gap_len`-pixel openings
/// across straight wall stretches away from junctions.
pub fn corrupt(img: &BevImage, cfg: &CorruptConfig) -> Result<BevImage> {
    for pct in [cfg.salt_pct, cfg.pepper_pct] {
        if !(0.0..=20.0).contains(&pct) {
            return Err(Error::InvalidArgument(alloc::format!(
                "noise percentage {pct} outside [0, 20]"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = (img.image.width as usize, img.image.height as usize);
    let t = &img.transform;
    let (lo, hi) = (t.padding_px as usize, (t.padding_px + t.grid_dim) as usize);
    let interior = |i: usize| {
        let (x, y) = (i % w, i / w);
        x >= lo && y >= lo && x < hi.min(w) && y < hi.min(h)
    };
    let mut mask = img.image.wall_mask();

    if cfg.gap_count > 0 && cfg.gap_len > 0 {
        cut_gaps(&mut mask, w, h, cfg.gap_count as usize, cfg.gap_len as usize, &mut rng);
    }

    let walls: Vec<usize> = (0..w * h).filter(|&i| mask[i]).collect();
    let free: Vec<usize> = (0..w * h).filter(|&i| !mask[i] && interior(i)).collect();
    let n_salt = floor(cfg.salt_pct / 100.0 * walls.len() as f64) as usize;
    let n_pepper = floor(cfg.pepper_pct / 100.0 * free.len() as f64) as usize;
    for k in sample(&mut rng, walls.len(), n_salt) {
        mask[walls[k]] = false;
    }
    for k in sample(&mut rng, free.len(), n_pepper) {
        mask[free[k]] = true;
    }
    Ok(BevImage {
        image: GrayImage::from_wall_mask(img.image.width, img.image.height, &mask),
        transform: img.transform,
        stamp: img.stamp,
    })
}

/// Extent `(start, end)` of the wall run through `(x, y)` across the wall
/// direction (vertical run for a horizontal wall).
fn cross_run(mask: &[bool], w: usize, h: usize, x: usize, y: usize, horizontal: bool) -> (usize, usize) {
    let (len, pos) = if horizontal { (h, y) } else { (w, x) };
    let at = |k: usize| if horizontal { k * w + x } else { y * w + k };
    let mut s = pos;
    while s > 0 && mask[at(s - 1)] {
        s -= 1;
    }
    let mut e = pos + 1;
    while e < len && mask[at(e)] {
        e += 1;
    }
    (s, e)
}

fn cut_gaps(mask: &mut [bool], w: usize, h: usize, count: usize, len: usize, rng: &mut ChaCha8Rng) {
    let margin = MAX_BAND;
    let mut starts: Vec<(usize, bool)> = (0..w * h)
        .filter(|&i| mask[i])
        .flat_map(|i| [(i, true), (i, false)])
        .collect();
    starts.shuffle(rng);
    let mut cut = 0;
    for (i, horizontal) in starts {
        if cut == count {
            break;
        }
        let (x, y) = (i % w, i / w);
        let along = if horizontal { x } else { y };
        let limit = if horizontal { w } else { h };
        if along < margin || along + len + margin >= limit || !mask[i] {
            continue;
        }
        // The band must keep the same narrow cross-section over the gap and
        // a margin on both sides, i.e. be a plain straight wall there.
        let (s0, e0) = cross_run(mask, w, h, x, y, horizontal);
        if e0 - s0 > MAX_BAND {
            continue;
        }
        let straight = (along - margin..along + len + margin).all(|a| {
            let (px, py) = if horizontal { (a, y) } else { (x, a) };
            if !mask[py * w + px] {
                return false;
            }
            let (s, e) = cross_run(mask, w, h, px, py, horizontal);
            s + 1 >= s0 && e <= e0 + 1 && e - s <= MAX_BAND && s > 0 && e < if horizontal { h } else { w }
        });
        if !straight {
            continue;
        }
        // Clear the band one step wider than its extent so no diagonal
        // contact survives across the gap.
        for a in along..along + len {
            let (px, py) = if horizontal { (a, y) } else { (x, a) };
            let (s, e) = cross_run(mask, w, h, px, py, horizontal);
            for k in s.saturating_sub(1)..(e + 1).min(if horizontal { h } else { w }) {
                let j = if horizontal { k * w + a } else { a * w + k };
                mask[j] = false;
            }
        }
        cut += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::morph::count_components;
    use crate::model::{GridTransform, WALL};

    fn frame() -> BevImage {
        let mut img = BevImage::blank(GridTransform::new([0.0, 0.0], 0.05).unwrap(), 0.0);
        for u in 100..900 {
            for t in 0..3 {
                img.image.set(u, 100 + t, WALL);
                img.image.set(u, 897 + t, WALL);
                img.image.set(100 + t, u, WALL);
                img.image.set(897 + t, u, WALL);
            }
        }
        img
    }

    #[test]
    fn zero_corruption_is_identity() {
        let img = frame();
        let out = corrupt(&img, &CorruptConfig::default()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn salt_flips_exact_count() {
        let img = frame();
        let walls = img.image.count_walls();
        let out = corrupt(&img, &CorruptConfig { salt_pct: 2.0, seed: 9, ..Default::default() }).unwrap();
        assert_eq!(walls - out.image.count_walls(), walls * 2 / 100);
    }

    #[test]
    fn gaps_add_at_most_one_component_each() {
        let img = frame();
        let before = count_components(&img.image.wall_mask(), 1024, 1024);
        let out = corrupt(&img, &CorruptConfig { gap_count: 3, gap_len: 5, seed: 4, ..Default::default() })
            .unwrap();
        let after = count_components(&out.image.wall_mask(), 1024, 1024);
        assert!(after <= before + 3, "{before} -> {after}");
        assert!(out.image.count_walls() < img.image.count_walls());
    }

    #[test]
    fn out_of_range_percentages_are_rejected() {
        assert!(corrupt(&frame(), &CorruptConfig { pepper_pct: 25.0, ..Default::default() }).is_err());
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let cfg = CorruptConfig { salt_pct: 3.0, pepper_pct: 1.0, gap_count: 2, gap_len: 6, seed: 11 };
        assert_eq!(corrupt(&frame(), &cfg).unwrap(), corrupt(&frame(), &cfg).unwrap());
    }
}
