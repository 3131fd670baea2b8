use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::detection::Detection;
use super::localize::{localize_object, FusionConfig, ObjectInstance};
use super::registry::{DedupOutcome, ObjectRegistry};
use super::scene::{classify_scene, SceneLabel, SceneRuleTable, SceneTrigger};
use crate::error::Result;
use crate::model::{CameraModel, PointCloudMap, Pose};

/// Pose closest in time to `stamp` from a stamp-sorted trajectory.
pub fn nearest_pose(poses: &[Pose], stamp: f64) -> Option<&Pose> {
    let i = poses.partition_point(|p| p.stamp < stamp);
    let after = poses.get(i);
    let before = i.checked_sub(1).and_then(|j| poses.get(j));
    match (before, after) {
        (Some(b), Some(a)) => Some(if stamp - b.stamp <= a.stamp - stamp { b } else { a }),
        (b, a) => b.or(a),
    }
}

/// Object and scene layers fed one detection at a time.
#[derive(Debug, Clone)]
pub struct ObjectSceneTracker {
    pub cfg: FusionConfig,
    pub rules: SceneRuleTable,
    pub registry: ObjectRegistry,
    pub trigger: SceneTrigger,
    pub scenes: Vec<SceneLabel>,
    window: BTreeSet<u64>,
}

impl ObjectSceneTracker {
    pub fn new(cfg: FusionConfig, rules: SceneRuleTable, trigger: SceneTrigger) -> Self {
        Self {
            cfg,
            rules,
            registry: ObjectRegistry::new(),
            trigger,
            scenes: Vec::new(),
            window: BTreeSet::new(),
        }
    }

    /// Localizes and registers one detection; returns the registry outcome
    /// and the scene it completed, if any.
    pub fn process(
        &mut self,
        det: &Detection,
        map: &PointCloudMap,
        pose: &Pose,
        cam: &CameraModel,
    ) -> Result<(DedupOutcome, Option<&SceneLabel>)> {
        let obj = localize_object(det, map, pose, cam, &self.cfg)?;
        let outcome = self.registry.dedup(obj, self.cfg.dedup_radius);
        self.window.insert(outcome.id());
        let fired = self.trigger.observe(det.stamp) && self.emit(det.stamp, pose);
        Ok((outcome, if fired { self.scenes.last() } else { None }))
    }

    /// Emits a time-triggered scene when the window has been open too long.
    pub fn poll(&mut self, stamp: f64, pose: &Pose) -> Option<&SceneLabel> {
        if self.trigger.poll(stamp) && self.emit(stamp, pose) {
            self.scenes.last()
        } else {
            None
        }
    }

    /// Classifies whatever is left in the open window, e.g. at the end of a
    /// recording.
    pub fn flush(&mut self, stamp: f64, pose: &Pose) -> Option<&SceneLabel> {
        if self.window.is_empty() {
            return None;
        }
        self.trigger.reset();
        if self.emit(stamp, pose) {
            self.scenes.last()
        } else {
            None
        }
    }

    fn emit(&mut self, stamp: f64, pose: &Pose) -> bool {
        let window: Vec<ObjectInstance> =
            self.window.iter().filter_map(|id| self.registry.get(*id)).cloned().collect();
        self.window.clear();
        match classify_scene(&window, &self.rules, stamp, pose.translation) {
            Some(mut s) => {
                s.id = self.scenes.len() as u64 + 1;
                self.scenes.push(s);
                true
            }
            None => false,
        }
    }
}
