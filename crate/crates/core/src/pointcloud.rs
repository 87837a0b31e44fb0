use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featuremap::FeatureMap;
use crate::geometry::{Camera, Rigid};

/// A cloud of `N` points, each with a 3D position and a `C`-channel feature
/// vector. Features are stored row-major (`N x C`).
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    positions: Vec<Vector3<f64>>,
    features: Vec<f64>,
    channels: usize,
}

impl PointCloud {
    pub fn new(positions: Vec<Vector3<f64>>, features: Vec<f64>, channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("point cloud needs at least one feature channel"));
        }
        if features.len() != positions.len() * channels {
            return Err(Error::shape(format!(
                "{} points with {} channels need {} feature values, got {}",
                positions.len(),
                channels,
                positions.len() * channels,
                features.len()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::invalid(format!("point {i} has a non-finite position")));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("point {} has a non-finite feature", i / channels)));
        }
        Ok(Self { positions, features, channels })
    }

    pub fn empty(channels: usize) -> Self {
        assert!(channels > 0);
        Self { positions: Vec::new(), features: Vec::new(), channels }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    #[inline]
    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.channels..(i + 1) * self.channels]
    }

    /// Mutable positions. Callers must keep every coordinate finite.
    pub fn positions_mut(&mut self) -> &mut [Vector3<f64>] {
        &mut self.positions
    }

    /// Mutable features. Callers must keep every value finite.
    pub fn features_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }

    /// The cloud with `pose` applied to every position.
    pub fn transformed(&self, pose: &Rigid) -> PointCloud {
        PointCloud {
            positions: self.positions.iter().map(|p| pose.transform(p)).collect(),
            features: self.features.clone(),
            channels: self.channels,
        }
    }

    /// Reorders points so that output point `i` is input point `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<PointCloud> {
        let n = self.len();
        let mut seen = vec![false; n];
        if order.len() != n || !order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true)) {
            return Err(Error::invalid("order is not a permutation of the point indices"));
        }
        let mut features = Vec::with_capacity(self.features.len());
        for &i in order {
            features.extend_from_slice(self.feature(i));
        }
        Ok(PointCloud {
            positions: order.iter().map(|&i| self.positions[i]).collect(),
            features,
            channels: self.channels,
        })
    }
}

/// Valid depth interval used to map normalized depth predictions to scene
/// units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthRange {
    pub min: f64,
    pub max: f64,
}

impl DepthRange {
    pub const MATTERPORT: DepthRange = DepthRange { min: 0.1, max: 10.0 };
    pub const REALESTATE: DepthRange = DepthRange { min: 1.0, max: 100.0 };
    pub const KITTI: DepthRange = DepthRange { min: 1.0, max: 50.0 };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min > 0.0 && min < max && max.is_finite()) {
            return Err(Error::invalid(format!("depth range needs 0 < min < max, got ({min}, {max})")));
        }
        Ok(Self { min, max })
    }

    /// Looks up a named dataset preset: `matterport`, `realestate` or `kitti`.
    pub fn preset(name: &str) -> Option<DepthRange> {
        match name.to_ascii_lowercase().as_str() {
            "matterport" | "mp3d" | "replica" => Some(Self::MATTERPORT),
            "realestate" | "realestate10k" => Some(Self::REALESTATE),
            "kitti" => Some(Self::KITTI),
            _ => None,
        }
    }
}

/// Maps raw values in `[0, 1]` affinely onto `[range.min, range.max]`.
pub fn normalize_depth(raw: &FeatureMap, range: DepthRange) -> Result<FeatureMap> {
    if raw.channels() != 1 {
        return Err(Error::shape("depth map must have exactly one channel"));
    }
    if let Some(v) = raw.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("normalized depth value {v} outside [0, 1]")));
    }
    let span = range.max - range.min;
    let data = raw.data().iter().map(|r| range.min + r * span).collect();
    FeatureMap::new(raw.width(), raw.height(), 1, data)
}

/// Lifts every pixel with depth strictly inside `(camera.near, camera.far)`
/// to a camera-space point at its pixel center, carrying that pixel's
/// features. Points are ordered row-major over the surviving pixels.
pub fn build_cloud(features: &FeatureMap, depth: &FeatureMap, camera: &Camera) -> Result<PointCloud> {
    if !features.same_size(depth) {
        return Err(Error::shape(format!(
            "features are {}x{} but depth is {}x{}",
            features.width(),
            features.height(),
            depth.width(),
            depth.height()
        )));
    }
    if depth.channels() != 1 {
        return Err(Error::shape("depth map must have exactly one channel"));
    }
    if depth.data().iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("depth map contains non-finite values"));
    }
    if let Some(v) = features.data().iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("feature image contains non-finite value {v}")));
    }
    let (w, c) = (features.width(), features.channels());
    let rows: Vec<(Vec<Vector3<f64>>, Vec<f64>)> = (0..features.height())
        .into_par_iter()
        .map(|y| {
            let mut pos = Vec::new();
            let mut feat = Vec::new();
            for x in 0..w {
                let z = depth.get(x, y);
                if z > camera.near && z < camera.far {
                    let (u, v) = Camera::pixel_center(x, y);
                    pos.push(camera.unproject(u, v, z));
                    feat.extend_from_slice(features.pixel(x, y));
                }
            }
            (pos, feat)
        })
        .collect();
    let mut positions = Vec::new();
    let mut feats = Vec::new();
    for (p, f) in rows {
        positions.extend(p);
        feats.extend(f);
    }
    Ok(PointCloud { positions, features: feats, channels: c })
}
