//! Denoiser dispatch, including the external file-exchange backend.

use std::process::{Command, Stdio};
use std::time::Duration;

use bimgraph_core::bev::BevImage;
use bimgraph_core::denoise::{denoise_builtin, DenoiseBackend, DenoiserConfig};
use bimgraph_core::model::{FREE, WALL};
use bimgraph_core::GrayImage;
use wait_timeout::ChildExt;

use crate::error::{AppError, AppResult};
use crate::io::{read_pgm, write_pgm8, Pgm};

pub const EXTERNAL_TIMEOUT: Duration = Duration::from_secs(10);

pub fn denoise(img: &BevImage, cfg: &DenoiserConfig) -> AppResult<BevImage> {
    match &cfg.backend {
        DenoiseBackend::BuiltIn => Ok(denoise_builtin(img, cfg)?),
        DenoiseBackend::External { command } => denoise_external(img, command, EXTERNAL_TIMEOUT),
    }
}

/// Runs `command... <input.pgm> <output.pgm>` and reads the result back.
/// Output pixels darker than mid-gray become walls.
pub fn denoise_external(img: &BevImage, command: &[String], timeout: Duration) -> AppResult<BevImage> {
    let (program, args) = command
        .split_first()
        .ok_or_else(|| AppError::External("empty command".into()))?;
    let dir = tempfile::tempdir().map_err(|e| AppError::External(format!("temporary directory: {e}")))?;
    let input = dir.path().join("input.pgm");
    let output = dir.path().join("output.pgm");
    write_pgm8(&input, &img.image)?;

    let mut child = Command::new(program)
        .args(args)
        .arg(&input)
        .arg(&output)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| AppError::External(format!("cannot start `{program}`: {e}")))?;
    let status = match child.wait_timeout(timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(AppError::External(format!("`{program}` timed out after {timeout:?}")));
        }
        Err(e) => return Err(AppError::External(format!("waiting for `{program}`: {e}"))),
    };
    if !status.success() {
        return Err(AppError::External(format!("`{program}` exited with {status}")));
    }
    let (w, h, data) = match read_pgm(&output) {
        Ok(Pgm::Gray8 { width, height, data }) => (width, height, data),
        Ok(Pgm::Gray16 { .. }) => return Err(AppError::External("output must be an 8-bit PGM".into())),
        Err(e) => return Err(AppError::External(format!("malformed output: {e}"))),
    };
    if (w, h) != (img.image.width, img.image.height) {
        return Err(AppError::External(format!(
            "output is {w}x{h}, input was {}x{}",
            img.image.width, img.image.height
        )));
    }
    let data = data.into_iter().map(|v| if v < 128 { WALL } else { FREE }).collect();
    Ok(BevImage { image: GrayImage::from_raw(w, h, data)?, transform: img.transform, stamp: img.stamp })
}
