use std::path::Path;

use bimgraph_core::fusion::Detection;
use serde::Serialize;

use super::{read_text, write_with};
use crate::error::{AppError, AppResult};

/// Parsed detection stream. `truncated` is set when the final line was
/// incomplete and dropped (an interrupted recording).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionStream {
    pub detections: Vec<Detection>,
    pub truncated: bool,
}

/// One JSON detection per line, sorted by stamp on return. A malformed last
/// line without a trailing newline is treated as a cut-off write; any other
/// malformed line is an error with its line number.
pub fn read_detections(path: &Path) -> AppResult<DetectionStream> {
    let text = read_text(path)?;
    let mut out = DetectionStream::default();
    let lines: Vec<&str> = text.lines().collect();
    for (n, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Detection>(line) {
            Ok(d) => out.detections.push(d),
            Err(_) if n + 1 == lines.len() && !text.ends_with('\n') => out.truncated = true,
            Err(e) => return Err(AppError::parse(path, n + 1, e.to_string())),
        }
    }
    out.detections.sort_by(|a, b| a.stamp.total_cmp(&b.stamp));
    Ok(out)
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> AppResult<()> {
    write_ndjson(path, dets)
}

pub fn write_ndjson<T: Serialize>(path: &Path, items: &[T]) -> AppResult<()> {
    write_with(path, |w| {
        for it in items {
            serde_json::to_writer(&mut *w, it)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bimgraph_core::fusion::MaskRle;

    fn det(stamp: f64) -> Detection {
        Detection {
            stamp,
            class_id: 2,
            class_name: "chair".into(),
            bbox: [1, 1, 3, 3],
            mask: MaskRle::encode(4, 4, &[false, true, true, false].repeat(4)),
            confidence: 0.9,
        }
    }

    #[test]
    fn round_trip_sorted_by_stamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_detections(&path, &[det(2.0), det(1.0)]).unwrap();
        let s = read_detections(&path).unwrap();
        assert_eq!(s.detections, vec![det(1.0), det(2.0)]);
        assert!(!s.truncated);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"mask_rle\""));
    }

    #[test]
    fn cut_off_tail_versus_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_detections(&path, &[det(1.0)]).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{\"stamp\": 2.0, \"class_");
        std::fs::write(&path, &text).unwrap();
        let s = read_detections(&path).unwrap();
        assert!(s.truncated);
        assert_eq!(s.detections.len(), 1);
        text.push('\n');
        std::fs::write(&path, &text).unwrap();
        assert!(matches!(read_detections(&path), Err(AppError::Parse { line: 2, .. })));
    }
}
