//! Deterministic synthetic inputs: RGB-D frames and random point clouds.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::featuremap::FeatureMap;
use crate::geometry::{Camera, Rigid};
use crate::pointcloud::PointCloud;

/// An RGB image with a z-depth map and the camera that captured it.
#[derive(Clone, Debug)]
pub struct RgbdFrame {
    pub image: FeatureMap,
    pub depth: FeatureMap,
    pub camera: Camera,
}

struct Aabb {
    min: Vector3<f64>,
    max: Vector3<f64>,
}

impl Aabb {
    /// Entry distance along `dir` from the origin (slab test).
    fn hit(&self, dir: &Vector3<f64>) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            let inv = 1.0 / dir[a];
            let (mut lo, mut hi) = (self.min[a] * inv, self.max[a] * inv);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            t0 = t0.max(lo);
            t1 = t1.min(hi);
        }
        (t0 <= t1 && t0 > 0.0).then_some(t0)
    }
}

fn checker(a: f64, b: f64, size: f64) -> f64 {
    if ((a / size).floor() + (b / size).floor()).rem_euclid(2.0) == 0.0 {
        1.0
    } else {
        0.65
    }
}

/// A box-shaped room seen from inside (walls at `x = ±3`, floor and ceiling
/// at `y = ±1.5`, back wall at `z = 6`) with a cube standing in front of the
/// back wall. Every pixel has a valid depth. `seed` varies the palette and
/// the cube's placement.
pub fn synthetic_room(width: usize, height: usize, seed: u64) -> RgbdFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let camera = Camera::with_fov(width, height, 60.0, 0.05, 20.0).expect("valid room camera");
    let mut palette = [[0.0f64; 3]; 6];
    for c in palette.iter_mut() {
        for v in c.iter_mut() {
            *v = rng.random_range(0.25..0.95);
        }
    }
    let cx = rng.random_range(-0.9..0.9);
    let cz = rng.random_range(2.8..3.6);
    let cube = Aabb {
        min: Vector3::new(cx - 0.5, 0.3, cz - 0.5),
        max: Vector3::new(cx + 0.5, 1.5, cz + 0.5),
    };

    let mut image = FeatureMap::zeros(width, height, 3);
    let mut depth = FeatureMap::zeros(width, height, 1);
    for y in 0..height {
        for x in 0..width {
            let (u, v) = Camera::pixel_center(x, y);
            // Ray with unit z component: its parameter is the z-depth.
            let dir = Vector3::new((u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0);
            let mut best = (6.0, 0usize);
            let mut consider = |t: f64, surface: usize| {
                if t > 0.0 && t < best.0 {
                    best = (t, surface);
                }
            };
            if dir.x < 0.0 {
                consider(-3.0 / dir.x, 1);
            }
            if dir.x > 0.0 {
                consider(3.0 / dir.x, 2);
            }
            if dir.y > 0.0 {
                consider(1.5 / dir.y, 3);
            }
            if dir.y < 0.0 {
                consider(-1.5 / dir.y, 4);
            }
            if let Some(t) = cube.hit(&dir) {
                consider(t, 5);
            }
            let (t, surface) = best;
            let p = dir * t;
            let shade = match surface {
                0 => checker(p.x, p.y, 0.5),
                1 | 2 => checker(p.z, p.y, 0.5),
                3 | 4 => checker(p.x, p.z, 0.75),
                _ => 0.8 + 0.2 * ((p.y * 12.0).sin() > 0.0) as u8 as f64,
            };
            for (c, out) in image.pixel_mut(x, y).iter_mut().enumerate() {
                *out = palette[surface][c] * shade;
            }
            depth.pixel_mut(x, y)[0] = t;
        }
    }
    RgbdFrame { image, depth, camera }
}

/// Random colors over a smooth random depth surface. About 5% of pixels get
/// depth 0 (invalid).
pub fn random_rgbd(width: usize, height: usize, seed: u64) -> RgbdFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let camera = Camera::with_fov(width, height, rng.random_range(40.0..80.0), 0.1, 50.0)
        .expect("valid camera");
    let base = rng.random_range(1.5..6.0);
    let (ax, ay) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let (fx, fy, ph) = (rng.random_range(0.05..0.4), rng.random_range(0.05..0.4), rng.random_range(0.0..6.0));
    let image = FeatureMap::from_fn(width, height, 3, |_, _, _| rng.random_range(0.0..1.0));
    let depth = FeatureMap::from_fn(width, height, 1, |x, y, _| {
        if rng.random_bool(0.05) {
            return 0.0;
        }
        let (xf, yf) = (x as f64 / width as f64, y as f64 / height as f64);
        base + ax * xf + ay * yf + 0.3 * (x as f64 * fx + y as f64 * fy + ph).sin()
    });
    RgbdFrame { image, depth, camera }
}

/// Parameters for [`random_scene`].
#[derive(Clone, Debug)]
pub struct SceneParams {
    pub points: usize,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Depth interval for the visible points.
    pub depth: (f64, f64),
    /// Fraction of points whose depth is copied from another point, to
    /// exercise the tie-break.
    pub tie_fraction: f64,
    /// Fraction of points placed behind the near plane.
    pub behind_fraction: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            points: 500,
            width: 64,
            height: 64,
            channels: 3,
            depth: (0.5, 8.0),
            tie_fraction: 0.05,
            behind_fraction: 0.02,
        }
    }
}

/// A cloud, a camera and the pose to render it from.
#[derive(Clone, Debug)]
pub struct Scene {
    pub cloud: PointCloud,
    pub camera: Camera,
    pub pose: Rigid,
}

/// Random points spread over (and slightly beyond) the view frustum of a
/// random camera, expressed in a world frame related to the camera by a
/// random rigid pose.
pub fn random_scene(seed: u64, params: &SceneParams) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width, params.height);
    let camera = Camera::with_fov(w, h, rng.random_range(45.0..75.0), 0.1, 100.0).expect("valid camera");
    let pose = Rigid::from_axis_angle(
        Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        rng.random_range(-0.6..0.6),
        Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    );
    let to_world = pose.inverse();
    let mut depths: Vec<f64> = Vec::with_capacity(params.points);
    let mut positions = Vec::with_capacity(params.points);
    for _ in 0..params.points {
        let u = rng.random_range(-0.2..1.2) * w as f64;
        let v = rng.random_range(-0.2..1.2) * h as f64;
        let z = if !depths.is_empty() && rng.random_bool(params.tie_fraction) {
            depths[rng.random_range(0..depths.len())]
        } else if rng.random_bool(params.behind_fraction) {
            rng.random_range(-1.0..camera.near)
        } else {
            rng.random_range(params.depth.0..params.depth.1)
        };
        depths.push(z);
        let cam = if z > 0.0 {
            camera.unproject(u, v, z)
        } else {
            Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), z)
        };
        positions.push(to_world.transform(&cam));
    }
    let features = (0..params.points * params.channels).map(|_| rng.random_range(0.0..1.0)).collect();
    let cloud = PointCloud::new(positions, features, params.channels).expect("finite scene");
    Scene { cloud, camera, pose }
}
