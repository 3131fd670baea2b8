use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intensity of wall (occupied structure) pixels.
pub const WALL: u8 = 0;
/// Intensity of free or unknown pixels, and of the padding border.
pub const FREE: u8 = 255;

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::Malformed(alloc::format!(
                "{} bytes for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn index(&self, u: u32, v: u32) -> usize {
        v as usize * self.width as usize + u as usize
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> u8 {
        self.data[self.index(u, v)]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, value: u8) {
        let i = self.index(u, v);
        self.data[i] = value;
    }

    /// Wall mask using the mid-gray cut: `true` where intensity < 128.
    pub fn wall_mask(&self) -> Vec<bool> {
        self.data.iter().map(|&p| p < 128).collect()
    }

    pub fn from_wall_mask(width: u32, height: u32, mask: &[bool]) -> Self {
        let data = mask.iter().map(|&w| if w { WALL } else { FREE }).collect();
        Self { width, height, data }
    }

    pub fn count_walls(&self) -> usize {
        self.data.iter().filter(|&&p| p < 128).count()
    }
}
