//! Room instance rasters, the built-in segmenter and evaluation metrics.

mod mask;
mod metrics;
mod segment;

pub use mask::{RoomInstance, RoomMaskSet};
pub use metrics::{eval_segmentation, pair_ious, SegMatch, SegMetrics, MATCH_IOU};
pub use segment::{segment_rooms, SegmenterConfig};
