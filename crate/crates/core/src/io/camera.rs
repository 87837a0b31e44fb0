//! Camera and pose JSON.
//!
//! ```json
//! {
//!   "intrinsics": {"fx": 128, "fy": 128, "cx": 128, "cy": 128,
//!                  "width": 256, "height": 256, "near": 0.1, "far": 10,
//!                  "normalized": false},
//!   "pose": {"rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0,0,0]}
//! }
//! ```
//!
//! `rotation` is either 9 row-major values or a `[w, x, y, z]` quaternion
//! (also accepted under the key `quaternion`). Matrices within `1e-3` of
//! orthonormal are projected onto the nearest rotation; others are rejected.
//! With `"normalized": true`, `fx` and `cx` are fractions of the width and
//! `fy` and `cy` fractions of the height. A missing `pose` means identity.
//! The pose maps world points into the camera frame.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Camera, Rigid};

/// Tolerance for accepting a slightly non-orthonormal rotation.
pub const ROTATION_TOL: f64 = 1e-3;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicsJson {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    near: f64,
    far: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normalized: bool,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quaternion: Option<Vec<f64>>,
    #[serde(default)]
    translation: Option<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    intrinsics: IntrinsicsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pose: Option<PoseJson>,
}

fn schema<T: serde::de::DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = match (prefix, path.as_str()) {
            ("", p) => p.to_string(),
            (pre, ".") => pre.to_string(),
            (pre, p) => format!("{pre}.{p}"),
        };
        Error::invalid(format!("{path}: {}", e.into_inner()))
    })
}

fn pose_from_json(p: &PoseJson, field: &str) -> Result<Rigid> {
    let t = Vector3::from(p.translation.unwrap_or([0.0; 3]));
    let err = |what: &str, e: Error| Error::invalid(format!("{field}.{what}: {e}"));
    let quat = |q: &[f64], what: &str| -> Result<Rigid> {
        let q: [f64; 4] = q.try_into().expect("length checked");
        Rigid::from_quaternion(q, t).map_err(|e| err(what, e))
    };
    match (&p.rotation, &p.quaternion) {
        (Some(_), Some(_)) => Err(Error::invalid(format!(
            "{field}: give either `rotation` or `quaternion`, not both"
        ))),
        (Some(r), None) if r.len() == 9 => {
            let m = Matrix3::from_row_slice(r);
            Rigid::orthonormalized(m, t, ROTATION_TOL).map_err(|e| err("rotation", e))
        }
        (Some(r), None) if r.len() == 4 => quat(r, "rotation"),
        (Some(r), None) => Err(Error::invalid(format!(
            "{field}.rotation: expected 9 row-major values or a 4-value quaternion, got {}",
            r.len()
        ))),
        (None, Some(q)) if q.len() == 4 => quat(q, "quaternion"),
        (None, Some(q)) => Err(Error::invalid(format!(
            "{field}.quaternion: expected 4 values [w, x, y, z], got {}",
            q.len()
        ))),
        (None, None) => Rigid::new(Matrix3::identity(), t).map_err(|e| err("translation", e)),
    }
}

fn camera_from_json(i: &IntrinsicsJson) -> Result<Camera> {
    let (sx, sy) = if i.normalized { (i.width as f64, i.height as f64) } else { (1.0, 1.0) };
    let cam = Camera {
        fx: i.fx * sx,
        fy: i.fy * sy,
        cx: i.cx * sx,
        cy: i.cy * sy,
        width: i.width,
        height: i.height,
        near: i.near,
        far: i.far,
    };
    cam.validate().map_err(|e| Error::invalid(format!("intrinsics: {e}")))?;
    Ok(cam)
}

fn parse_value(text: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("invalid JSON: {e}")))
}

/// Parses a camera file into intrinsics and pose.
pub fn parse_camera(text: &str) -> Result<(Camera, Rigid)> {
    let file: CameraFile = schema(parse_value(text)?, "")?;
    let camera = camera_from_json(&file.intrinsics)?;
    let pose = match &file.pose {
        Some(p) => pose_from_json(p, "pose")?,
        None => Rigid::identity(),
    };
    Ok((camera, pose))
}

/// Parses a pose from either a full camera file or a bare pose object.
pub fn parse_pose(text: &str) -> Result<Rigid> {
    let value = parse_value(text)?;
    if value.get("intrinsics").is_some() {
        return parse_camera(text).map(|(_, pose)| pose);
    }
    if let Some(p) = value.get("pose") {
        let p: PoseJson = schema(p.clone(), "pose")?;
        return pose_from_json(&p, "pose");
    }
    let p: PoseJson = schema(value, "")?;
    pose_from_json(&p, "pose")
}

pub(crate) fn pose_to_value(pose: &Rigid) -> serde_json::Value {
    let r = pose.rotation();
    let rotation: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| r[(i, j)])).collect();
    let t = pose.translation();
    serde_json::to_value(PoseJson {
        rotation: Some(rotation),
        quaternion: None,
        translation: Some([t.x, t.y, t.z]),
    })
    .expect("pose serializes")
}

/// Serializes a camera (pixel-unit intrinsics) and its pose.
pub fn camera_to_json(camera: &Camera, pose: &Rigid) -> String {
    let file = CameraFile {
        intrinsics: IntrinsicsJson {
            fx: camera.fx,
            fy: camera.fy,
            cx: camera.cx,
            cy: camera.cy,
            width: camera.width,
            height: camera.height,
            near: camera.near,
            far: camera.far,
            normalized: false,
        },
        pose: None,
    };
    let mut value = serde_json::to_value(file).expect("camera serializes");
    value["pose"] = pose_to_value(pose);
    serde_json::to_string_pretty(&value).expect("camera serializes")
}

pub fn read_camera(path: impl AsRef<Path>) -> Result<(Camera, Rigid)> {
    parse_camera(&fs::read_to_string(path)?)
}

pub fn read_pose(path: impl AsRef<Path>) -> Result<Rigid> {
    parse_pose(&fs::read_to_string(path)?)
}

pub fn write_camera(path: impl AsRef<Path>, camera: &Camera, pose: &Rigid) -> Result<()> {
    fs::write(path, camera_to_json(camera, pose))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"intrinsics": {"fx": 100, "fy": 110, "cx": 64, "cy": 48,
        "width": 128, "height": 96, "near": 0.1, "far": 50}"#;

    #[test]
    fn identity_pose_file() {
        let text = format!(
            "{BASE}, \"pose\": {{\"rotation\": [1,0,0,0,1,0,0,0,1], \"translation\": [0,0,0]}}}}"
        );
        let (cam, pose) = parse_camera(&text).unwrap();
        assert_eq!(cam.fx, 100.0);
        assert_eq!(pose, Rigid::identity());
        let (_, pose) = parse_camera(&format!("{BASE}}}")).unwrap();
        assert_eq!(pose, Rigid::identity());
    }

    #[test]
    fn unit_quaternion_is_identity() {
        let text = format!("{BASE}, \"pose\": {{\"quaternion\": [1,0,0,0], \"translation\": [1,2,3]}}}}");
        let (_, pose) = parse_camera(&text).unwrap();
        assert!((pose.rotation() - Matrix3::identity()).abs().max() < 1e-15);
        assert_eq!(pose.translation(), &Vector3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn field_level_errors() {
        let text = r#"{"intrinsics": {"fx": 100, "fy": 110, "cx": 64, "cy": 48,
            "width": 128, "height": 96, "near": 0.1}}"#;
        let msg = parse_camera(text).unwrap_err().to_string();
        assert!(msg.contains("intrinsics") && msg.contains("far"), "{msg}");

        let text = format!("{BASE}, \"pose\": {{\"rotation\": [1,0,0]}}}}");
        let msg = parse_camera(&text).unwrap_err().to_string();
        assert!(msg.contains("pose.rotation"), "{msg}");

        let bad = BASE.replace("\"fx\": 100", "\"fx\": -1");
        let msg = parse_camera(&format!("{bad}}}")).unwrap_err().to_string();
        assert!(msg.contains("intrinsics"), "{msg}");
    }

    #[test]
    fn rotation_orthonormalization() {
        let near = format!(
            "{BASE}, \"pose\": {{\"rotation\": [1.0004,0,0,0,1,0,0,0,1], \"translation\": [0,0,0]}}}}"
        );
        let (_, pose) = parse_camera(&near).unwrap();
        assert!(pose.max_abs_diff(&Rigid::identity()) < 1e-3);
        let far = format!("{BASE}, \"pose\": {{\"rotation\": [1.1,0,0,0,1,0,0,0,1]}}}}");
        assert!(parse_camera(&far).is_err());
    }

    #[test]
    fn normalized_intrinsics() {
        // RealEstate-style intrinsics are fractions of the image size.
        let text = r#"{"intrinsics": {"fx": 0.5, "fy": 0.9, "cx": 0.5, "cy": 0.5,
            "width": 640, "height": 360, "near": 1, "far": 100, "normalized": true}}"#;
        let (cam, _) = parse_camera(text).unwrap();
        assert_eq!((cam.fx, cam.fy, cam.cx, cam.cy), (320.0, 324.0, 320.0, 180.0));
        // Writing back uses pixel units and parses to the same camera.
        let again = parse_camera(&camera_to_json(&cam, &Rigid::identity())).unwrap().0;
        assert_eq!(again, cam);
    }

    #[test]
    fn bare_pose() {
        let pose = parse_pose(r#"{"rotation": [0,0,1,0,1,0,-1,0,0], "translation": [0,0,2]}"#).unwrap();
        assert_eq!(pose.transform(&Vector3::x()), Vector3::new(0.0, 0.0, 1.0));
        let pose = parse_pose(r#"{"pose": {"translation": [0,0,2]}}"#).unwrap();
        assert_eq!(pose.translation().z, 2.0);
        assert!(parse_pose(r#"{"rotation": [1,0,0,0,1,0,0,0,1], "bogus": 1}"#).is_err());
    }
}
