//! Camera trajectories for rendering frame sequences.
//!
//! A trajectory file holds either an explicit list of poses or an arc:
//!
//! ```json
//! {"poses": [{"rotation": [1,0,0,0,1,0,0,0,1], "translation": [0,0,0]}]}
//! {"arc": {"axis": [0,1,0], "degrees": 20, "translation": [0.5,0,0], "frames": 30}}
//! ```
//!
//! Arc frame `i` of `n` rotates by `s * degrees` about `axis` and translates
//! by `s * translation`, with `s = i / (n - 1)`.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Rigid;
use crate::io::parse_pose;

#[derive(Clone, Debug, PartialEq)]
pub enum TrajectorySpec {
    Poses(Vec<Rigid>),
    Arc {
        axis: Vector3<f64>,
        degrees: f64,
        translation: Vector3<f64>,
        frames: usize,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcJson {
    axis: [f64; 3],
    degrees: f64,
    #[serde(default)]
    translation: [f64; 3],
    frames: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum TrajectoryJson {
    Poses(Vec<serde_json::Value>),
    Arc(ArcJson),
}

impl TrajectorySpec {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::format(format!("invalid JSON: {e}")))?;
        let parsed: TrajectoryJson = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::invalid(format!("trajectory {path}: {}", e.into_inner()))
        })?;
        let spec = match parsed {
            TrajectoryJson::Poses(list) => {
                let poses = list
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        parse_pose(&v.to_string())
                            .map_err(|e| Error::invalid(format!("poses[{i}]: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                TrajectorySpec::Poses(poses)
            }
            TrajectoryJson::Arc(a) => TrajectorySpec::Arc {
                axis: Vector3::from(a.axis),
                degrees: a.degrees,
                translation: Vector3::from(a.translation),
                frames: a.frames,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        match self {
            TrajectorySpec::Poses(p) if p.is_empty() => Err(Error::invalid("trajectory has no poses")),
            TrajectorySpec::Poses(_) => Ok(()),
            TrajectorySpec::Arc { axis, degrees, translation, frames } => {
                if *frames == 0 {
                    return Err(Error::invalid("arc.frames must be at least 1"));
                }
                if !degrees.is_finite() || !axis.iter().chain(translation.iter()).all(|v| v.is_finite()) {
                    return Err(Error::invalid("arc values must be finite"));
                }
                if *degrees != 0.0 && axis.norm() < 1e-12 {
                    return Err(Error::invalid("arc.axis must be nonzero"));
                }
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TrajectorySpec::Poses(p) => p.len(),
            TrajectorySpec::Arc { frames, .. } => *frames,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Target poses relative to the source camera.
    pub fn poses(&self) -> Vec<Rigid> {
        match self {
            TrajectorySpec::Poses(p) => p.clone(),
            TrajectorySpec::Arc { axis, degrees, translation, frames } => (0..*frames)
                .map(|i| {
                    let s = if *frames > 1 { i as f64 / (*frames - 1) as f64 } else { 0.0 };
                    Rigid::from_axis_angle(*axis, s * degrees.to_radians(), s * translation)
                })
                .collect(),
        }
    }
}
