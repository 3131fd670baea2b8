//! Deterministic synthetic indoor worlds used as ground truth: floorplans,
//! labeled pointclouds, reference rasters, and replayable sessions.

mod cloud;
mod floorplan;
mod raster;
pub mod scenes;
mod session;

pub use cloud::{generate_pointcloud, PointLabel, SurfaceKind, SynthCloud, VENT_DENSITY_FACTOR};
pub use floorplan::{Clutter, ClutterKind, Doorway, FloorplanSpec, RoomPolygon, WallSegment};
pub use raster::{ground_truth_raster, wall_raster};
pub use session::{
    generate_session, mount_extrinsic, plan_tour, tour_trajectory, Session, SessionConfig,
    SessionTick,
};
