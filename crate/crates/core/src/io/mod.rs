//! File formats: PLY clouds, PNG images, PFM and tensor-dump float maps,
//! camera/pose JSON.

pub mod camera;
pub mod pfm;
pub mod ply;
pub mod png;
pub mod tensor;

use std::path::Path;

pub use camera::{camera_to_json, parse_camera, parse_pose, read_camera, read_pose, write_camera};
pub use pfm::{read_pfm, write_pfm};
pub use ply::{read_ply, write_ply, PlyEncoding};
pub use png::{read_image, write_image};
pub use tensor::{read_tensor, write_tensor, TensorDump};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMap;

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default()
}

/// Reads a float map chosen by extension: `.pfm`, `.ftd` or 8-bit `.png`.
pub fn read_map(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => read_pfm(path),
        "ftd" => read_tensor(path)?.to_feature_map(),
        "png" => read_image(path),
        other => Err(Error::format(format!(
            "unsupported map extension `.{other}` (expected .pfm, .ftd or .png)"
        ))),
    }
}

/// Writes a float map chosen by extension: `.pfm`, `.ftd` or `.png`.
pub fn write_map(path: impl AsRef<Path>, map: &FeatureMap) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => write_pfm(path, map),
        "ftd" => write_tensor(path, &TensorDump::from_feature_map(map)),
        "png" => write_image(path, map),
        other => Err(Error::format(format!(
            "unsupported map extension `.{other}` (expected .pfm, .ftd or .png)"
        ))),
    }
}

/// Reads a single-channel depth map.
pub fn read_depth(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let map = read_map(path)?;
    if map.channels() != 1 {
        return Err(Error::shape(format!("depth map has {} channels, expected 1", map.channels())));
    }
    Ok(map)
}
