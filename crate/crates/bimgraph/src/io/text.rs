use std::collections::BTreeMap;
use std::path::Path;

use bimgraph_core::{CameraModel, Point3, Pose};

use super::{read_text, write_with};
use crate::error::{AppError, AppResult};

/// TUM trajectory: `stamp tx ty tz qx qy qz qw` per line, `#` comments.
/// Poses must be in non-decreasing stamp order.
pub fn read_tum(path: &Path) -> AppResult<Vec<Pose>> {
    let text = read_text(path)?;
    let mut poses: Vec<Pose> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| AppError::parse(path, n + 1, format!("bad number `{t}`"))))
            .collect::<AppResult<_>>()?;
        if v.len() != 8 {
            return Err(AppError::parse(path, n + 1, "expected `stamp tx ty tz qx qy qz qw`"));
        }
        let pose = Pose::new(v[0], Point3::new(v[1], v[2], v[3]), [v[4], v[5], v[6], v[7]])
            .map_err(|e| AppError::parse(path, n + 1, e.to_string()))?;
        if poses.last().is_some_and(|p| p.stamp > pose.stamp) {
            return Err(AppError::parse(path, n + 1, "pose stamps decrease"));
        }
        poses.push(pose);
    }
    Ok(poses)
}

pub fn write_tum(path: &Path, poses: &[Pose]) -> AppResult<()> {
    write_with(path, |w| {
        writeln!(w, "# stamp tx ty tz qx qy qz qw")?;
        for p in poses {
            let t = p.translation;
            let [qx, qy, qz, qw] = p.rotation;
            writeln!(w, "{} {} {} {} {qx} {qy} {qz} {qw}", p.stamp, t.x, t.y, t.z)?;
        }
        Ok(())
    })
}

const CALIB_KEYS: [&str; 6] = ["fx", "fy", "cx", "cy", "width", "height"];

/// Flat key-value calibration: one `key value...` entry per line (an optional
/// `:` or `=` after the key is accepted). Keys are `fx fy cx cy width height`
/// and `E`, the 16 row-major entries of the body→optical transform, given
/// either on one line or as `e00` … `e33`.
pub fn read_calibration(path: &Path) -> AppResult<CameraModel> {
    let text = read_text(path)?;
    let mut values: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let line = line.replacen([':', '='], " ", 1);
        let mut it = line.split_whitespace();
        let key = it.next().unwrap_or_default().to_string();
        let nums: Vec<f64> = it
            .map(|t| t.parse().map_err(|_| AppError::parse(path, n + 1, format!("bad number `{t}`"))))
            .collect::<AppResult<_>>()?;
        if values.insert(key.clone(), (n + 1, nums)).is_some() {
            return Err(AppError::parse(path, n + 1, format!("duplicate key `{key}`")));
        }
    }
    let scalar = |k: &str| -> AppResult<f64> {
        match values.get(k) {
            Some((_, v)) if v.len() == 1 => Ok(v[0]),
            Some((line, _)) => Err(AppError::parse(path, *line, format!("`{k}` takes one value"))),
            None => Err(AppError::format(path, format!("missing key `{k}`"))),
        }
    };
    let [fx, fy, cx, cy, width, height] = CALIB_KEYS.map(scalar);
    let mut e = [[0.0; 4]; 4];
    if let Some((line, v)) = values.get("E") {
        if v.len() != 16 {
            return Err(AppError::parse(path, *line, "`E` takes 16 values"));
        }
        for (i, x) in v.iter().enumerate() {
            e[i / 4][i % 4] = *x;
        }
    } else {
        for (r, row) in e.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = scalar(&format!("e{r}{c}"))?;
            }
        }
    }
    let known = |k: &str| {
        CALIB_KEYS.contains(&k) || k == "E" || (k.len() == 3 && k.starts_with('e'))
    };
    if let Some((k, (line, _))) = values.iter().find(|(k, _)| !known(k)) {
        return Err(AppError::parse(path, *line, format!("unknown key `{k}`")));
    }
    let dim = |v: f64, k: &str| -> AppResult<u32> {
        if v.fract() == 0.0 && v > 0.0 && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            Err(AppError::format(path, format!("`{k}` must be a positive integer")))
        }
    };
    let cam = CameraModel::new(fx?, fy?, cx?, cy?, e, dim(width?, "width")?, dim(height?, "height")?)
        .map_err(|err| AppError::format(path, err.to_string()))?;
    Ok(cam)
}

pub fn write_calibration(path: &Path, cam: &CameraModel) -> AppResult<()> {
    write_with(path, |w| {
        writeln!(w, "fx {}\nfy {}\ncx {}\ncy {}", cam.fx, cam.fy, cam.cx, cam.cy)?;
        writeln!(w, "width {}\nheight {}", cam.width, cam.height)?;
        let e: Vec<String> = cam.extrinsic.iter().flatten().map(|x| x.to_string()).collect();
        writeln!(w, "E {}", e.join(" "))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tum_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.tum");
        let poses = vec![Pose::identity(0.0), Pose::from_yaw(0.5, Point3::new(1.0, 2.0, 0.8), 0.3)];
        write_tum(&path, &poses).unwrap();
        assert_eq!(read_tum(&path).unwrap(), poses);
        std::fs::write(&path, "1 0 0 0 0 0 0 1\n0 0 0 0 0 0 0 1\n").unwrap();
        assert!(matches!(read_tum(&path), Err(AppError::Parse { line: 2, .. })));
        std::fs::write(&path, "0 0 0 0 0 0 0 2\n").unwrap();
        assert!(matches!(read_tum(&path), Err(AppError::Parse { line: 1, .. })));
    }

    #[test]
    fn calibration_forms() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cam.txt");
        let cam = bimgraph_core::synth::mount_extrinsic();
        write_calibration(&path, &cam).unwrap();
        assert_eq!(read_calibration(&path).unwrap(), cam);

        let mut text = String::from("fx: 500\nfy = 500\ncx 320 # principal point\ncy 240\nwidth 640\nheight 480\n");
        for r in 0..4 {
            for c in 0..4 {
                text.push_str(&format!("e{r}{c} {}\n", if r == c { 1 } else { 0 }));
            }
        }
        std::fs::write(&path, &text).unwrap();
        let c = read_calibration(&path).unwrap();
        assert_eq!((c.fx, c.width), (500.0, 640));
        std::fs::write(&path, text.replace("e23 0", "e23 0\nskew 0")).unwrap();
        assert!(read_calibration(&path).is_err());
        std::fs::write(&path, text.replace("fx: 500\n", "")).unwrap();
        assert!(read_calibration(&path).unwrap_err().to_string().contains("missing key `fx`"));
    }
}
