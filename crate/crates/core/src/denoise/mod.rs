//! BEV clean-up: speckle removal and wall gap closing behind a pluggable
//! [`Denoiser`] interface, plus the seeded [`corrupt`] augmentation.

mod corrupt;
pub mod morph;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bev::BevImage;
use crate::error::{Error, Result};
use crate::model::GrayImage;

pub use corrupt::{corrupt, CorruptConfig};

/// Which implementation cleans the image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum DenoiseBackend {
    #[default]
    BuiltIn,
    /// Program called as `command… <in.pgm> <out.pgm>`.
    External { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DenoiserConfig {
    /// Half-size of the majority (median) window.
    pub median_radius: u32,
    /// Length of the horizontal and vertical closing lines.
    pub close_lengths: u32,
    pub bridge_gap_max: u32,
    /// Shortest wall run accepted on either side of a bridged gap.
    pub bridge_min_run: u32,
    /// Wall components at least this large survive speckle removal even
    /// when the majority filter thins them away.
    pub keep_component_px: u32,
    pub backend: DenoiseBackend,
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        Self {
            median_radius: 1,
            close_lengths: 9,
            bridge_gap_max: 8,
            bridge_min_run: 3,
            keep_component_px: 12,
            backend: DenoiseBackend::BuiltIn,
        }
    }
}

impl DenoiserConfig {
    pub fn validate(&self) -> Result<()> {
        if self.median_radius == 0
            || self.close_lengths == 0
            || self.bridge_gap_max == 0
            || self.bridge_min_run == 0
        {
            return Err(Error::InvalidArgument("denoiser radii and lengths must be ≥ 1".into()));
        }
        if let DenoiseBackend::External { command } = &self.backend {
            if command.is_empty() {
                return Err(Error::InvalidArgument("external denoiser command is empty".into()));
            }
        }
        Ok(())
    }
}

pub trait Denoiser {
    fn denoise(&self, img: &BevImage) -> Result<BevImage>;
}

/// Classical baseline: majority filter with connectivity-based restoration,
/// directional closing, then collinear gap bridging.
#[derive(Debug, Clone, Default)]
pub struct BuiltInDenoiser {
    pub cfg: DenoiserConfig,
}

impl Denoiser for BuiltInDenoiser {
    fn denoise(&self, img: &BevImage) -> Result<BevImage> {
        denoise_builtin(img, &self.cfg)
    }
}

pub fn denoise_builtin(img: &BevImage, cfg: &DenoiserConfig) -> Result<BevImage> {
    cfg.validate()?;
    let (w, h) = (img.image.width as usize, img.image.height as usize);
    let walls = img.image.wall_mask();

    let smooth = morph::majority(&walls, w, h, cfg.median_radius as usize);
    // Wall pixels at most one free pixel apart group together, so dotted
    // walls of sparse maps count as one long structure.
    let (comp, grown) = morph::components8(&morph::dilate(&walls, w, h, 1), w, h);
    let mut sizes = alloc::vec![0usize; grown.len()];
    for i in 0..w * h {
        if walls[i] {
            sizes[comp[i] as usize] += 1;
        }
    }
    let mut seed = smooth.clone();
    let mut within = smooth;
    for i in 0..w * h {
        if walls[i] {
            within[i] = true;
            if sizes[comp[i] as usize] >= cfg.keep_component_px as usize {
                seed[i] = true;
            }
        }
    }
    let kept = morph::reconstruct(&seed, &within, w, h);

    let len = cfg.close_lengths as usize;
    let ch = morph::close_line(&kept, w, h, len, true);
    let cv = morph::close_line(&kept, w, h, len, false);
    let closed: Vec<bool> = ch.iter().zip(&cv).map(|(a, b)| *a || *b).collect();
    let mut out = morph::bridge_gaps(
        &closed,
        w,
        h,
        cfg.bridge_gap_max as usize,
        cfg.bridge_min_run as usize,
    );

    // Padding never carries walls.
    let t = &img.transform;
    let (lo, hi) = (t.padding_px as usize, (t.padding_px + t.grid_dim) as usize);
    if w == t.image_dim() as usize && h == t.image_dim() as usize {
        for y in 0..h {
            for x in 0..w {
                if x < lo || y < lo || x >= hi || y >= hi {
                    out[y * w + x] = false;
                }
            }
        }
    }
    Ok(BevImage {
        image: GrayImage::from_wall_mask(img.image.width, img.image.height, &out),
        transform: img.transform,
        stamp: img.stamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GridTransform, FREE, WALL};

    fn canvas() -> BevImage {
        BevImage::blank(GridTransform::new([0.0, 0.0], 0.05).unwrap(), 3.0)
    }

    fn hline(img: &mut BevImage, v: u32, u0: u32, u1: u32, thick: u32) {
        for t in 0..thick {
            for u in u0..u1 {
                img.image.set(u, v + t, WALL);
            }
        }
    }

    #[test]
    fn keeps_dimensions_and_transform() {
        let mut img = canvas();
        hline(&mut img, 100, 100, 300, 2);
        let out = denoise_builtin(&img, &DenoiserConfig::default()).unwrap();
        assert_eq!(out.transform, img.transform);
        assert_eq!((out.image.width, out.image.height), (1024, 1024));
        assert_eq!(out.stamp, 3.0);
    }

    #[test]
    fn five_pixel_gap_is_closed() {
        let mut img = canvas();
        hline(&mut img, 100, 100, 300, 2);
        for u in 200..205 {
            img.image.set(u, 100, FREE);
            img.image.set(u, 101, FREE);
        }
        let m = img.image.wall_mask();
        assert_eq!(morph::count_components(&m, 1024, 1024), 2);
        let out = denoise_builtin(&img, &DenoiserConfig::default()).unwrap();
        let m = out.image.wall_mask();
        assert_eq!(morph::count_components(&m, 1024, 1024), 1);
    }

    #[test]
    fn isolated_speckles_vanish_thin_walls_stay() {
        let mut img = canvas();
        hline(&mut img, 100, 100, 300, 1);
        img.image.set(500, 500, WALL);
        img.image.set(600, 610, WALL);
        img.image.set(601, 610, WALL);
        let out = denoise_builtin(&img, &DenoiserConfig::default()).unwrap();
        assert_eq!(out.image.get(500, 500), FREE);
        assert_eq!(out.image.get(600, 610), FREE);
        assert!((100..300).all(|u| out.image.get(u, 100) == WALL));
    }

    #[test]
    fn zero_lengths_are_rejected() {
        let cfg = DenoiserConfig { close_lengths: 0, ..Default::default() };
        assert!(denoise_builtin(&canvas(), &cfg).is_err());
    }
}
