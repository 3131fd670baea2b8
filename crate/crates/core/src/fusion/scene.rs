use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::localize::ObjectInstance;
use crate::error::{Error, Result};
use crate::model::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IndoorOutdoor {
    Indoor,
    Outdoor,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRule {
    pub scene_type: String,
    pub indoor_outdoor: IndoorOutdoor,
    /// Object classes that vote for this scene type.
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRuleTable {
    pub rules: Vec<SceneRule>,
}

impl Default for SceneRuleTable {
    fn default() -> Self {
        let rule = |name: &str, io: IndoorOutdoor, classes: &[&str]| SceneRule {
            scene_type: name.into(),
            indoor_outdoor: io,
            classes: classes.iter().map(|c| String::from(*c)).collect(),
        };
        Self {
            rules: alloc::vec![
                rule("office", IndoorOutdoor::Indoor, &["desk", "chair", "monitor"]),
                rule("garage", IndoorOutdoor::Indoor, &["car", "toolbox"]),
                rule("living_room", IndoorOutdoor::Indoor, &["sofa", "tv"]),
                rule("storage", IndoorOutdoor::Indoor, &["box"]),
                rule("street", IndoorOutdoor::Outdoor, &["person", "traffic_light", "bicycle"]),
            ],
        }
    }
}

impl SceneRuleTable {
    pub fn validate(&self) -> Result<()> {
        for r in &self.rules {
            if r.scene_type.is_empty() || r.classes.is_empty() {
                return Err(Error::InvalidArgument("scene rules need a name and classes".into()));
            }
        }
        Ok(())
    }
}

/// A scene classification and the objects that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneLabel {
    pub id: u64,
    pub stamp: f64,
    /// Robot position when the classification fired.
    pub position: Point3,
    pub indoor_outdoor: IndoorOutdoor,
    pub scene_type: String,
    pub contributing_objects: Vec<u64>,
}

/// Scores every rule by the number of window objects of its classes; the
/// best rule wins, then higher matched support, then the smaller name.
/// Returns `None` for an empty window.
pub fn classify_scene(
    window: &[ObjectInstance],
    rules: &SceneRuleTable,
    stamp: f64,
    position: Point3,
) -> Option<SceneLabel> {
    if window.is_empty() {
        return None;
    }
    let mut histogram: BTreeMap<&str, (usize, u64)> = BTreeMap::new();
    for o in window {
        let e = histogram.entry(o.class_name.as_str()).or_default();
        e.0 += 1;
        e.1 += o.support as u64;
    }
    let best = rules
        .rules
        .iter()
        .map(|r| {
            let (n, s) = r.classes.iter().fold((0, 0), |acc, c| {
                let (n, s) = histogram.get(c.as_str()).copied().unwrap_or_default();
                (acc.0 + n, acc.1 + s)
            });
            (r, n, s)
        })
        .filter(|(_, n, _)| *n > 0)
        .max_by(|a, b| {
            a.1.cmp(&b.1).then(a.2.cmp(&b.2)).then(b.0.scene_type.cmp(&a.0.scene_type))
        });
    let (scene_type, indoor_outdoor) = match best {
        Some((r, _, _)) => (r.scene_type.clone(), r.indoor_outdoor),
        None => (String::from("unknown"), IndoorOutdoor::Unknown),
    };
    let mut contributing: Vec<u64> = window.iter().map(|o| o.id).collect();
    contributing.sort_unstable();
    contributing.dedup();
    Some(SceneLabel {
        id: 0,
        stamp,
        position,
        indoor_outdoor,
        scene_type,
        contributing_objects: contributing,
    })
}

/// Fires a classification after `min_detections` detections or once
/// `max_interval` seconds have passed since the first detection of the
/// current window, whichever comes first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneTrigger {
    pub min_detections: usize,
    pub max_interval: f64,
    #[serde(skip)]
    count: usize,
    #[serde(skip)]
    window_start: Option<f64>,
}

impl Default for SceneTrigger {
    fn default() -> Self {
        Self { min_detections: 10, max_interval: 15.0, count: 0, window_start: None }
    }
}

impl SceneTrigger {
    pub fn new(min_detections: usize, max_interval: f64) -> Self {
        Self { min_detections, max_interval, ..Default::default() }
    }

    /// Records one detection at `stamp`; true when the window is complete.
    pub fn observe(&mut self, stamp: f64) -> bool {
        self.count += 1;
        let start = *self.window_start.get_or_insert(stamp);
        if self.count >= self.min_detections || stamp - start >= self.max_interval {
            self.reset();
            return true;
        }
        false
    }

    pub fn reset(&mut self) {
        self.count = 0;
        self.window_start = None;
    }

    /// Time-based firing without a new detection.
    pub fn poll(&mut self, stamp: f64) -> bool {
        match self.window_start {
            Some(start) if self.count > 0 && stamp - start >= self.max_interval => {
                self.reset();
                true
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objs(classes: &[(&str, u32)]) -> Vec<ObjectInstance> {
        classes
            .iter()
            .enumerate()
            .map(|(i, (c, s))| ObjectInstance {
                id: i as u64 + 1,
                class_id: 0,
                class_name: String::from(*c),
                position: Point3::default(),
                support: *s,
                first_seen: 0.0,
                last_seen: 0.0,
            })
            .collect()
    }

    #[test]
    fn chairs_and_desks_make_an_office() {
        let w = objs(&[("chair", 5), ("chair", 5), ("chair", 5), ("desk", 5), ("desk", 5)]);
        let s = classify_scene(&w, &SceneRuleTable::default(), 1.0, Point3::default()).unwrap();
        assert_eq!(s.scene_type, "office");
        assert_eq!(s.indoor_outdoor, IndoorOutdoor::Indoor);
        assert_eq!(s.contributing_objects, alloc::vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn empty_window_emits_nothing() {
        assert!(classify_scene(&[], &SceneRuleTable::default(), 0.0, Point3::default()).is_none());
    }

    #[test]
    fn unmatched_window_is_unknown() {
        let s = classify_scene(&objs(&[("dragon", 3)]), &SceneRuleTable::default(), 0.0, Point3::default())
            .unwrap();
        assert_eq!(s.scene_type, "unknown");
    }

    #[test]
    fn equal_scores_break_by_support_then_name() {
        let table = SceneRuleTable {
            rules: alloc::vec![
                SceneRule { scene_type: "b".into(), indoor_outdoor: IndoorOutdoor::Indoor, classes: alloc::vec!["x".into()] },
                SceneRule { scene_type: "a".into(), indoor_outdoor: IndoorOutdoor::Indoor, classes: alloc::vec!["y".into()] },
            ],
        };
        let even = objs(&[("x", 4), ("y", 4)]);
        assert_eq!(classify_scene(&even, &table, 0.0, Point3::default()).unwrap().scene_type, "a");
        let heavier_x = objs(&[("x", 9), ("y", 4)]);
        assert_eq!(classify_scene(&heavier_x, &table, 0.0, Point3::default()).unwrap().scene_type, "b");
    }

    #[test]
    fn trigger_on_count_or_time() {
        let mut t = SceneTrigger::default();
        for i in 0..9 {
            assert!(!t.observe(i as f64 * 0.1));
        }
        assert!(t.observe(1.0));
        assert!(!t.observe(2.0));
        assert!(t.observe(17.0));
        assert!(!t.poll(40.0));
        t.observe(50.0);
        assert!(t.poll(65.0));
    }
}
