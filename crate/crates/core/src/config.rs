//! Top-level pipeline configuration; every field has a default and unknown
//! keys are rejected.

use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::bev::BevConfig;
use crate::denoise::DenoiserConfig;
use crate::error::{Error, Result};
use crate::fusion::{FusionConfig, SceneRuleTable, SceneTrigger};
use crate::rooms::SegmenterConfig;

/// Where room masks come from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmenterBackend {
    #[default]
    BuiltIn,
    /// A 16-bit label raster (PGM) produced by an external model.
    Import { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub bev: BevConfig,
    pub denoise: DenoiserConfig,
    pub segmenter: SegmenterConfig,
    pub segmenter_backend: SegmenterBackend,
    pub fusion: FusionConfig,
    pub scene_rules: SceneRuleTable,
    /// JSON file replacing `scene_rules` when set.
    pub scene_rules_path: Option<String>,
    pub scene_trigger: SceneTrigger,
    /// Session time between online ticks, seconds.
    pub tick_period: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bev: BevConfig::default(),
            denoise: DenoiserConfig::default(),
            segmenter: SegmenterConfig::default(),
            segmenter_backend: SegmenterBackend::BuiltIn,
            fusion: FusionConfig::default(),
            scene_rules: SceneRuleTable::default(),
            scene_rules_path: None,
            scene_trigger: SceneTrigger::default(),
            tick_period: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.bev.validate()?;
        self.denoise.validate()?;
        self.segmenter.validate()?;
        self.fusion.validate()?;
        self.scene_rules.validate()?;
        if self.scene_trigger.min_detections == 0 || !(self.scene_trigger.max_interval > 0.0) {
            return Err(Error::InvalidArgument("scene trigger needs positive limits".into()));
        }
        if !(self.tick_period > 0.0 && self.tick_period.is_finite()) {
            return Err(Error::InvalidArgument("tick_period must be positive".into()));
        }
        Ok(())
    }

    /// Parses and validates a JSON document; missing keys keep defaults.
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(PipelineConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(cfg.bev.ema_alpha, 0.85);
        assert_eq!(cfg.bev.density_weight, 0.4);
        assert_eq!(cfg.bev.height_weight, 0.6);
    }

    #[test]
    fn partial_documents_keep_defaults() {
        let cfg = PipelineConfig::from_json(r#"{"tick_period": 0.5, "bev": {"ema_alpha": 0.9}}"#).unwrap();
        assert_eq!(cfg.tick_period, 0.5);
        assert_eq!(cfg.bev.ema_alpha, 0.9);
        assert_eq!(cfg.bev.floor_band, 0.2);
        let cfg = PipelineConfig::from_json(
            r#"{"segmenter_backend": {"kind": "import", "path": "masks.pgm"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.segmenter_backend, SegmenterBackend::Import { path: "masks.pgm".into() });
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(PipelineConfig::from_json(r#"{"tick": 1}"#), Err(Error::Malformed(_))));
        assert!(PipelineConfig::from_json(r#"{"bev": {"alpha": 1}}"#).is_err());
        assert!(matches!(
            PipelineConfig::from_json(r#"{"tick_period": 0}"#),
            Err(Error::InvalidArgument(_))
        ));
        assert!(PipelineConfig::from_json(r#"{"bev": {"ema_alpha": 2.0}}"#).is_err());
    }
}
