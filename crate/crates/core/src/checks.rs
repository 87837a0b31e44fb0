//! Randomized consistency checks shared by the `selftest` command and the
//! test suites: tiled renderer against the brute-force oracle, the hard
//! z-buffer limit, and analytic gradients against finite differences.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backward::{backward, finite_difference, relative_error};
use crate::error::Result;
use crate::rasterizer::{render, AccumulationMode, RenderOutput, RenderSettings};
use crate::reference::{render_bruteforce, render_hard};
use crate::scene::{random_scene, Scene, SceneParams};

pub const FEATURE_TOL: f64 = 1e-4;
pub const POSITION_TOL: f64 = 1e-2;
pub const FD_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct Case {
    pub scene: Scene,
    pub settings: RenderSettings,
}

fn scene_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Up to 2,000 points, 64 to 128 pixels per side, `K ∈ {1, 4, 128}`,
/// `r ∈ {0.5, 1, 4}`, any accumulation mode.
pub fn oracle_case(seed: u64) -> Case {
    let mut rng = scene_rng(seed, 1);
    let (w, h) = (rng.random_range(64..=128), rng.random_range(64..=128));
    let params = SceneParams {
        points: rng.random_range(1..=2000),
        width: w,
        height: h,
        channels: rng.random_range(1..=4),
        ..SceneParams::default()
    };
    let scene = random_scene(rng.random(), &params);
    let settings = RenderSettings::default()
        .with_size(w, h)
        .with_radius(*[0.5, 1.0, 4.0].choose(&mut rng).unwrap())
        .with_k(*[1, 4, 128].choose(&mut rng).unwrap())
        .with_gamma(*[0.0, 1.0, 1.0, 2.5].choose(&mut rng).unwrap())
        .with_mode(*AccumulationMode::ALL.choose(&mut rng).unwrap())
        .with_tile_size(*[8, 16, 16, 32].choose(&mut rng).unwrap());
    Case { scene, settings }
}

/// Tiled and brute-force renders agree bit for bit, contributors included.
pub fn oracle_matches(case: &Case) -> Result<bool> {
    let Case { scene, settings } = case;
    let a = render(&scene.cloud, &scene.pose, &scene.camera, settings)?;
    let b = render_bruteforce(&scene.cloud, &scene.pose, &scene.camera, settings)?;
    Ok(a.identical_to(&b) && same_contributors(&a, &b))
}

fn same_contributors(a: &RenderOutput, b: &RenderOutput) -> bool {
    (0..a.height()).all(|y| (0..a.width()).all(|x| a.contributors(x, y) == b.contributors(x, y)))
}

/// A scene for the hard z-buffer comparison; `K = 1`, `γ = 0`.
pub fn hard_case(seed: u64) -> Case {
    let mut case = oracle_case(seed);
    case.settings = case.settings.with_k(1).with_gamma(0.0).with_mode(AccumulationMode::AlphaComposite);
    case
}

/// Compares the soft renderer at `γ = 0, K = 1` with [`render_hard`] on
/// every pixel whose nearest covering point is unique. Returns
/// `(pixels compared, mismatches)`.
pub fn hard_matches(case: &Case) -> Result<(usize, usize)> {
    let Case { scene, settings } = case;
    let soft = render(&scene.cloud, &scene.pose, &scene.camera, settings)?;
    let hard = render_hard(&scene.cloud, &scene.pose, &scene.camera, settings)?;
    let two = render_bruteforce(&scene.cloud, &scene.pose, &scene.camera, &settings.with_k(2))?;
    let (mut compared, mut bad) = (0, 0);
    for y in 0..settings.height {
        for x in 0..settings.width {
            let list = two.contributors(x, y).unwrap_or(&[]);
            if list.len() == 2 && list[0].depth == list[1].depth {
                continue;
            }
            compared += 1;
            if soft.pixel(x, y) != hard.pixel(x, y) || soft.alpha_at(x, y) != hard.alpha_at(x, y) {
                bad += 1;
            }
        }
    }
    Ok((compared, bad))
}

/// 50 to 200 points, 64², depths in `[50, 100]`: a `1e-3` position step
/// then moves a splat by at most a quarter of [`BOUNDARY_MARGIN_PX`](crate::backward::BOUNDARY_MARGIN_PX).
pub fn gradient_case(seed: u64) -> Case {
    let mut rng = scene_rng(seed, 2);
    let params = SceneParams {
        points: rng.random_range(50..=200),
        width: 64,
        height: 64,
        channels: 3,
        depth: (50.0, 100.0),
        tie_fraction: 0.0,
        behind_fraction: 0.02,
    };
    let scene = random_scene(rng.random(), &params);
    let settings = RenderSettings::default()
        .with_size(64, 64)
        .with_radius(*[1.0, 2.0, 4.0].choose(&mut rng).unwrap())
        .with_k(*[8, 128].choose(&mut rng).unwrap())
        .with_gamma(*[1.0, 1.0, 2.0].choose(&mut rng).unwrap())
        .with_mode(*AccumulationMode::ALL.choose(&mut rng).unwrap());
    Case { scene, settings }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    /// Norm-wise relative error of the feature gradient.
    pub feature_error: f64,
    /// Norm-wise relative error over position coordinates away from
    /// discontinuities.
    pub position_error: f64,
    pub positions_checked: usize,
    pub positions_excluded: usize,
}

impl GradientCheck {
    pub fn passed(&self) -> bool {
        self.feature_error <= FEATURE_TOL && self.position_error <= POSITION_TOL
    }
}

/// Fixed regression target for the loss `½ Σ (F̄ - T)²`.
fn target(i: usize) -> f64 {
    0.5 + 0.4 * (i as f64 * 0.37).sin()
}

pub fn loss(out: &RenderOutput) -> f64 {
    out.features().iter().enumerate().map(|(i, f)| 0.5 * (f - target(i)).powi(2)).sum()
}

pub fn loss_gradient(out: &RenderOutput) -> Vec<f64> {
    out.features().iter().enumerate().map(|(i, f)| f - target(i)).collect()
}

/// Analytic gradients of [`loss`] against central differences with step `h`.
pub fn check_gradients(case: &Case, h: f64) -> Result<GradientCheck> {
    let Case { scene, settings } = case;
    let out = render(&scene.cloud, &scene.pose, &scene.camera, settings)?;
    let analytic = backward(&scene.cloud, &scene.pose, &scene.camera, settings, &out, &loss_gradient(&out))?;
    let fd = finite_difference(&scene.cloud, &scene.pose, &scene.camera, settings, loss, h)?;
    let feature_error = relative_error(analytic.features(), fd.gradients.features(), 1e-8);
    let (mut a, mut b, mut excluded) = (Vec::new(), Vec::new(), 0);
    for i in 0..scene.cloud.len() {
        for axis in 0..3 {
            if fd.boundary[i][axis] {
                excluded += 1;
            } else {
                a.push(analytic.positions()[i][axis]);
                b.push(fd.gradients.positions()[i][axis]);
            }
        }
    }
    Ok(GradientCheck {
        feature_error,
        position_error: relative_error(&a, &b, 1e-8),
        positions_checked: a.len(),
        positions_excluded: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible() {
        let (a, b) = (oracle_case(3), oracle_case(3));
        assert_eq!(a.scene.cloud, b.scene.cloud);
        assert_eq!(a.settings, b.settings);
    }

    #[test]
    fn one_of_each_passes() {
        assert!(oracle_matches(&oracle_case(0)).unwrap());
        let (n, bad) = hard_matches(&hard_case(0)).unwrap();
        assert!(n > 0 && bad == 0);
    }

    #[test]
    fn fd_step_moves_splats_less_than_quarter_margin() {
        let mut worst: f64 = 0.0;
        for seed in 0..40 {
            let case = gradient_case(seed);
            let sc = &case.scene;
            for p in sc.cloud.positions() {
                let Some(q0) = sc.camera.project(&sc.pose.transform(p)) else { continue };
                if q0.z <= sc.camera.near {
                    continue;
                }
                for axis in 0..3 {
                    let mut moved = *p;
                    moved[axis] += FD_STEP;
                    let q = sc.camera.project(&sc.pose.transform(&moved)).unwrap();
                    worst = worst.max((q.u - q0.u).hypot(q.v - q0.v));
                }
            }
        }
        assert!(worst <= 0.25 * crate::backward::BOUNDARY_MARGIN_PX, "{worst}");
    }
}
