//! Algorithms for turning LiDAR pointcloud maps and object detections into a
//! structural top-down map, room instances, a room-colorized pointcloud and a
//! four-layer (object, scene, room, building) scene graph.
//!
//! The crate is `no_std` and only needs an allocator. File formats, external
//! model backends and the command-line driver live in the `bimgraph` crate.

#![no_std]

extern crate alloc;

pub mod bev;
pub mod config;
pub mod denoise;
pub mod error;
pub mod fusion;
pub mod graph;
pub mod model;
pub mod pix2vox;
pub mod rooms;
pub mod synth;

mod math;

pub use error::{Error, Result};
pub use model::{
    CameraModel, CellBounds, GrayImage, GridTransform, ImagePoint, Pixel, Point3, PointCloudMap,
    Pose, VoxelCell, VoxelGrid, VoxelKey,
};
