use serde::{Deserialize, Serialize};

use super::geometry::Point3;
use crate::error::{Error, Result};
use crate::math::floor;

/// Interior BEV resolution (bins per side).
pub const BEV_GRID_DIM: u32 = 1000;
/// White border added on every side of the interior grid.
pub const BEV_PADDING_PX: u32 = 12;
/// Side of the padded BEV image fed to room segmentation.
pub const BEV_IMAGE_DIM: u32 = BEV_GRID_DIM + 2 * BEV_PADDING_PX;

/// Smallest map extent a transform is built for; degenerate maps get this span.
const MIN_EXTENT_M: f64 = 1e-3;
/// Relative inflation of the pixel size so the map's max corner stays inside
/// the last interior bin.
const EXTENT_MARGIN: f64 = 1e-9;

/// Integer pixel coordinates in the padded image: `u` is the column (x), `v`
/// the row (y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub u: u32,
    pub v: u32,
}

impl Pixel {
    pub const fn new(u: u32, v: u32) -> Self {
        Self { u, v }
    }
}

/// Half-open world XY square `[min_x, max_x) × [min_y, max_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl CellBounds {
    pub fn center(&self) -> [f64; 2] {
        [(self.min_x + self.max_x) * 0.5, (self.min_y + self.max_y) * 0.5]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x < self.max_x && y >= self.min_y && y < self.max_y
    }
}

/// Mapping between world XY and BEV pixels.
///
/// `origin_xy` is the world position of the corner of the first interior pixel
/// `(padding_px, padding_px)`. Padding pixels never carry map data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridTransform {
    pub origin_xy: [f64; 2],
    pub meters_per_pixel: f64,
    pub padding_px: u32,
    pub grid_dim: u32,
}

impl GridTransform {
    pub fn new(origin_xy: [f64; 2], meters_per_pixel: f64) -> Result<Self> {
        if !(meters_per_pixel > 0.0 && meters_per_pixel.is_finite()) {
            return Err(Error::InvalidArgument("meters_per_pixel must be positive".into()));
        }
        if !(origin_xy[0].is_finite() && origin_xy[1].is_finite()) {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        Ok(Self { origin_xy, meters_per_pixel, padding_px: BEV_PADDING_PX, grid_dim: BEV_GRID_DIM })
    }

    /// Isotropic transform that centers the XY box `[lo, hi]` in the interior
    /// grid, scaled by its longer side.
    pub fn from_bounds(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(MIN_EXTENT_M);
        let mpp = extent / BEV_GRID_DIM as f64 * (1.0 + EXTENT_MARGIN);
        let half = BEV_GRID_DIM as f64 * 0.5 * mpp;
        let center = [(lo[0] + hi[0]) * 0.5, (lo[1] + hi[1]) * 0.5];
        Self {
            origin_xy: [center[0] - half, center[1] - half],
            meters_per_pixel: mpp,
            padding_px: BEV_PADDING_PX,
            grid_dim: BEV_GRID_DIM,
        }
    }

    pub fn image_dim(&self) -> u32 {
        self.grid_dim + 2 * self.padding_px
    }

    /// Continuous interior-grid coordinates of a world XY position.
    #[inline]
    pub fn grid_coords(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_xy[0]) / self.meters_per_pixel,
            (y - self.origin_xy[1]) / self.meters_per_pixel,
        )
    }

    /// Interior bin `(col, row)` without padding, or `None` outside the grid.
    #[inline]
    pub fn bin_of(&self, x: f64, y: f64) -> Option<(u32, u32)> {
        let (tx, ty) = self.grid_coords(x, y);
        let (bx, by) = (floor(tx), floor(ty));
        let dim = self.grid_dim as f64;
        if bx >= 0.0 && by >= 0.0 && bx < dim && by < dim {
            Some((bx as u32, by as u32))
        } else {
            None
        }
    }

    /// Pixel containing `p`, or `None` when it falls outside the interior
    /// (padding counts as out of bounds).
    #[inline]
    pub fn world_to_pixel(&self, p: &Point3) -> Option<Pixel> {
        self.xy_to_pixel(p.x, p.y)
    }

    #[inline]
    pub fn xy_to_pixel(&self, x: f64, y: f64) -> Option<Pixel> {
        self.bin_of(x, y)
            .map(|(bx, by)| Pixel::new(bx + self.padding_px, by + self.padding_px))
    }

    pub fn is_interior(&self, px: Pixel) -> bool {
        let lo = self.padding_px;
        let hi = self.padding_px + self.grid_dim;
        px.u >= lo && px.u < hi && px.v >= lo && px.v < hi
    }

    /// World XY square covered by an interior pixel.
    pub fn pixel_to_world_column(&self, px: Pixel) -> Result<CellBounds> {
        if !self.is_interior(px) {
            return Err(Error::PixelInPadding { u: px.u, v: px.v });
        }
        let m = self.meters_per_pixel;
        let cx = (px.u - self.padding_px) as f64;
        let cy = (px.v - self.padding_px) as f64;
        Ok(CellBounds {
            min_x: self.origin_xy[0] + cx * m,
            min_y: self.origin_xy[1] + cy * m,
            max_x: self.origin_xy[0] + (cx + 1.0) * m,
            max_y: self.origin_xy[1] + (cy + 1.0) * m,
        })
    }

    /// World XY of a pixel center; also defined for padding pixels.
    pub fn pixel_center(&self, u: f64, v: f64) -> [f64; 2] {
        let m = self.meters_per_pixel;
        [
            self.origin_xy[0] + (u - self.padding_px as f64 + 0.5) * m,
            self.origin_xy[1] + (v - self.padding_px as f64 + 0.5) * m,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> GridTransform {
        GridTransform::new([0.0, 0.0], 0.1).unwrap()
    }

    #[test]
    fn origin_maps_to_first_interior_pixel() {
        let gt = unit_grid();
        assert_eq!(gt.world_to_pixel(&Point3::new(0.0, 0.0, 3.0)), Some(Pixel::new(12, 12)));
        assert_eq!(gt.world_to_pixel(&Point3::new(50.0, 50.0, 0.0)), Some(Pixel::new(512, 512)));
    }

    #[test]
    fn negative_offset_lands_in_padding() {
        assert_eq!(unit_grid().world_to_pixel(&Point3::new(-1.0, 0.0, 0.0)), None);
        assert_eq!(unit_grid().world_to_pixel(&Point3::new(100.0, 0.0, 0.0)), None);
    }

    #[test]
    fn column_bounds() {
        let gt = unit_grid();
        let c = gt.pixel_to_world_column(Pixel::new(12, 12)).unwrap();
        assert_eq!((c.min_x, c.min_y, c.max_x, c.max_y), (0.0, 0.0, 0.1, 0.1));
        let c = gt.pixel_to_world_column(Pixel::new(511, 511)).unwrap();
        assert!((c.min_x - 49.9).abs() < 1e-9 && (c.max_x - 50.0).abs() < 1e-9);
        assert!((c.min_y - 49.9).abs() < 1e-9 && (c.max_y - 50.0).abs() < 1e-9);
        assert_eq!(
            gt.pixel_to_world_column(Pixel::new(5, 5)),
            Err(Error::PixelInPadding { u: 5, v: 5 })
        );
    }

    #[test]
    fn bounds_transform_keeps_extremes_inside() {
        let gt = GridTransform::from_bounds([-3.0, 2.0], [17.0, 8.0]);
        assert!(gt.world_to_pixel(&Point3::new(-3.0, 2.0, 0.0)).is_some());
        assert!(gt.world_to_pixel(&Point3::new(17.0, 8.0, 0.0)).is_some());
        // longer side spans the whole interior
        let lo = gt.world_to_pixel(&Point3::new(-3.0, 5.0, 0.0)).unwrap();
        let hi = gt.world_to_pixel(&Point3::new(17.0, 5.0, 0.0)).unwrap();
        assert_eq!((lo.u, hi.u), (12, 1011));
    }

    #[test]
    fn degenerate_bounds_have_positive_scale() {
        let gt = GridTransform::from_bounds([1.0, 1.0], [1.0, 1.0]);
        assert!(gt.meters_per_pixel > 0.0);
        assert!(gt.world_to_pixel(&Point3::new(1.0, 1.0, 0.0)).is_some());
    }
}
