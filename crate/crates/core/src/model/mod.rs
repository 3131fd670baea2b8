//! Geometric and raster types shared by every stage of the pipeline.

mod camera;
mod geometry;
mod grid;
mod image;
mod voxel;

pub use camera::{CameraModel, ImagePoint};
pub use geometry::{Point3, PointCloudMap, Pose};
pub use grid::{
    CellBounds, GridTransform, Pixel, BEV_GRID_DIM, BEV_IMAGE_DIM, BEV_PADDING_PX,
};
pub use image::{GrayImage, FREE, WALL};
pub use voxel::{VoxelCell, VoxelGrid, VoxelKey, DEFAULT_VOXEL_SIZE};
