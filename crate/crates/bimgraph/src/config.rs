//! Loading a [`PipelineConfig`] from a JSON file plus `key.path=value`
//! overrides.

use std::path::Path;

use bimgraph_core::config::PipelineConfig;
use bimgraph_core::fusion::SceneRuleTable;
use serde_json::Value;

use crate::error::{AppError, AppResult};
use crate::io;

/// Sets `path` (dot separated) in `doc` to `value`. Only keys that already
/// exist in `doc` can be set, so typos fail instead of being dropped.
pub fn apply_override(doc: &mut Value, path: &str, value: Value) -> AppResult<()> {
    let mut node = doc;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| AppError::Usage(format!("`{path}`: `{key}` is not inside an object")))?;
        let slot = obj.get_mut(key).ok_or_else(|| AppError::Usage(format!("unknown configuration key `{path}`")))?;
        if parts.peek().is_none() {
            *slot = value;
            return Ok(());
        }
        node = slot;
    }
    Err(AppError::Usage("empty configuration key".into()))
}

/// Parses one `key.path=value` override; the value is read as JSON and
/// falls back to a plain string.
pub fn parse_override(s: &str) -> AppResult<(String, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| AppError::Usage(format!("override `{s}` is not key=value")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// Defaults, then the file, then the overrides in order. A set
/// `scene_rules_path` replaces `scene_rules` with the table it points to.
pub fn load_config(file: Option<&Path>, overrides: &[String]) -> AppResult<PipelineConfig> {
    let mut doc = serde_json::to_value(PipelineConfig::default()).expect("configuration serializes");
    if let Some(path) = file {
        let text = io::read_text(path)?;
        let from_file: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| AppError::parse(path, e.line(), e.to_string()))?;
        doc = serde_json::to_value(from_file).expect("configuration serializes");
    }
    for o in overrides {
        let (k, v) = parse_override(o)?;
        apply_override(&mut doc, &k, v)?;
    }
    let mut cfg: PipelineConfig =
        serde_json::from_value(doc).map_err(|e| AppError::Usage(format!("configuration: {e}")))?;
    if let Some(p) = cfg.scene_rules_path.clone() {
        cfg.scene_rules = io::read_json::<SceneRuleTable>(Path::new(&p))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_type() {
        let cfg = load_config(None, &["bev.ema_alpha=0.5".into(), "tick_period=2".into()]).unwrap();
        assert_eq!(cfg.bev.ema_alpha, 0.5);
        assert_eq!(cfg.tick_period, 2.0);
    }

    #[test]
    fn unknown_and_invalid_keys_fail() {
        assert!(load_config(None, &["bev.emaalpha=0.5".into()]).is_err());
        assert!(load_config(None, &["tick_period=-1".into()]).is_err());
        assert!(load_config(None, &["tick_period".into()]).is_err());
    }

    #[test]
    fn file_with_unknown_key_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{\n  \"tick_period\": 2.0,\n  \"bogus\": 1\n}\n").unwrap();
        match load_config(Some(&p), &[]) {
            Err(AppError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
