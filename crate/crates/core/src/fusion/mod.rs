//! Object and scene layers: detection masks are lifted into the map,
//! clustered, deduplicated, and grouped into rule-classified scenes.

mod dbscan;
mod detection;
mod localize;
mod registry;
mod scene;
mod tracker;

pub use dbscan::dbscan;
pub use detection::{Detection, MaskRle};
pub use localize::{localize_object, FusionConfig, ObjectInstance};
pub use registry::{DedupOutcome, ObjectRegistry};
pub use scene::{classify_scene, IndoorOutdoor, SceneLabel, SceneRule, SceneRuleTable, SceneTrigger};
pub use tracker::{nearest_pose, ObjectSceneTracker};
