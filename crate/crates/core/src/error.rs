use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point cloud is empty")]
    EmptyMap,
    #[error("no points left after floor removal")]
    EmptyAfterFloorFilter,
    #[error("no occupied bins to compute a threshold from")]
    NoOccupiedBins,
    #[error("pixel ({u}, {v}) lies in the image padding")]
    PixelInPadding { u: u32, v: u32 },
    #[error("point is behind the camera")]
    BehindCamera,
    #[error("image has no free space to segment")]
    NoFreeSpace,
    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("grid transforms differ between inputs")]
    TransformMismatch,
    #[error("unknown mask id {0}")]
    UnknownMask(u16),
    #[error("detection at {detection} has no pose within {tolerance} s (closest pose at {pose})")]
    StampMismatch { detection: f64, pose: f64, tolerance: f64 },
    #[error("no map support and no depth prior for class `{0}`")]
    NoSupport(String),
    #[error("scene graph invariant violated: {0}")]
    InvariantViolation(String),
    #[error("invalid floorplan: {0}")]
    InvalidFloorplan(String),
    #[error("malformed data: {0}")]
    Malformed(String),
}
