use nalgebra::Vector3;
use proptest::prelude::*;

use softsplat::scene::{random_scene, SceneParams};
use softsplat::{
    backward, render, render_bruteforce, AccumulationMode, Camera, PointCloud, RenderSettings, Rigid,
};

fn mode_strategy() -> impl Strategy<Value = AccumulationMode> {
    prop::sample::select(AccumulationMode::ALL.to_vec())
}

fn settings_strategy() -> impl Strategy<Value = RenderSettings> {
    (
        prop::sample::select(vec![0.5, 1.0, 1.7, 4.0]),
        prop::sample::select(vec![1usize, 2, 4, 128]),
        prop::sample::select(vec![0.0, 0.5, 1.0, 3.0]),
        mode_strategy(),
        prop::sample::select(vec![1usize, 5, 16, 64]),
        20usize..48,
        20usize..48,
    )
        .prop_map(|(r, k, gamma, mode, tile, w, h)| {
            RenderSettings::default()
                .with_size(w, h)
                .with_radius(r)
                .with_k(k)
                .with_gamma(gamma)
                .with_mode(mode)
                .with_tile_size(tile)
        })
}

fn scene(seed: u64, s: &RenderSettings, points: usize) -> softsplat::scene::Scene {
    let params = SceneParams { points, width: s.width, height: s.height, ..SceneParams::default() };
    random_scene(seed, &params)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tiled_matches_brute_force(seed: u64, s in settings_strategy(), points in 0usize..300) {
        let sc = scene(seed, &s, points);
        let a = render(&sc.cloud, &sc.pose, &sc.camera, &s).unwrap();
        let b = render_bruteforce(&sc.cloud, &sc.pose, &sc.camera, &s).unwrap();
        prop_assert!(a.identical_to(&b));
    }

    #[test]
    fn alpha_is_a_coverage(seed: u64, s in settings_strategy()) {
        let sc = scene(seed, &s, 200);
        let out = render(&sc.cloud, &sc.pose, &sc.camera, &s).unwrap();
        prop_assert!(out.alpha().iter().all(|a| (0.0..=1.0).contains(a)));
        for y in 0..s.height {
            for x in 0..s.width {
                let list = out.contributors(x, y).unwrap();
                prop_assert!(list.len() <= s.k);
                prop_assert!(list.windows(2).all(|w| (w[0].depth, w[0].index) < (w[1].depth, w[1].index)));
                prop_assert!(list.iter().all(|c| c.rho > 0.0 && c.rho <= 1.0));
                if list.is_empty() {
                    prop_assert_eq!(out.alpha_at(x, y), 0.0);
                }
            }
        }
    }

    #[test]
    fn rigid_motion_of_cloud_and_camera_is_invisible(seed: u64, s in settings_strategy(), angle in -1.0f64..1.0) {
        // Exact depth ties could reorder under rounding.
        let params = SceneParams { points: 150, width: s.width, height: s.height, tie_fraction: 0.0, ..SceneParams::default() };
        let sc = random_scene(seed, &params);
        let motion = Rigid::from_axis_angle(Vector3::new(0.2, 1.0, -0.4), angle, Vector3::new(0.5, -1.0, 2.0));
        let moved = sc.cloud.transformed(&motion);
        let pose = sc.pose.compose(&motion.inverse());
        let a = render(&sc.cloud, &sc.pose, &sc.camera, &s).unwrap();
        let b = render(&moved, &pose, &sc.camera, &s).unwrap();
        let diff = a.features().iter().zip(b.features()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-6, "{}", diff);
    }

    #[test]
    fn normalized_sum_of_constant_features_is_that_constant(seed: u64, s in settings_strategy(), value in 0.0f64..1.0) {
        let s = s.with_mode(AccumulationMode::NormalizedWeightedSum);
        let sc = scene(seed, &s, 200);
        let n = sc.cloud.len();
        let cloud = PointCloud::new(sc.cloud.positions().to_vec(), vec![value; n * sc.cloud.channels()], sc.cloud.channels()).unwrap();
        let out = render(&cloud, &sc.pose, &sc.camera, &s).unwrap();
        for y in 0..s.height {
            for x in 0..s.width {
                let expect = if out.alpha_at(x, y) > 0.0 { value } else { 0.0 };
                for v in out.pixel(x, y) {
                    prop_assert!((v - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn feature_gradient_is_independent_of_features(seed: u64, mode in mode_strategy()) {
        // F̄ is linear in the features, so dL/dF only depends on geometry.
        let s = RenderSettings::default().with_size(32, 32).with_radius(2.0).with_mode(mode);
        let sc = scene(seed, &s, 80);
        let grad: Vec<f64> = (0..32 * 32 * 3).map(|i| (i % 5) as f64 - 2.0).collect();
        let out = render(&sc.cloud, &sc.pose, &sc.camera, &s).unwrap();
        let g1 = backward(&sc.cloud, &sc.pose, &sc.camera, &s, &out, &grad).unwrap();
        let mut other = sc.cloud.clone();
        other.features_mut().iter_mut().for_each(|f| *f = 1.0 - *f);
        let out = render(&other, &sc.pose, &sc.camera, &s).unwrap();
        let g2 = backward(&other, &sc.pose, &sc.camera, &s, &out, &grad).unwrap();
        prop_assert_eq!(g1.features(), g2.features());
    }

    #[test]
    fn k_one_keeps_only_the_nearest(seed: u64, s in settings_strategy()) {
        let full = s.with_k(128);
        let one = s.with_k(1);
        let sc = scene(seed, &s, 200);
        let a = render(&sc.cloud, &sc.pose, &sc.camera, &full).unwrap();
        let b = render(&sc.cloud, &sc.pose, &sc.camera, &one).unwrap();
        for y in 0..s.height {
            for x in 0..s.width {
                let (la, lb) = (a.contributors(x, y).unwrap(), b.contributors(x, y).unwrap());
                prop_assert_eq!(lb, &la[..la.len().min(1)]);
            }
        }
    }
}

#[test]
fn points_behind_the_camera_are_ignored() {
    let camera = Camera::with_fov(16, 16, 60.0, 0.1, 10.0).unwrap();
    let s = RenderSettings::default().with_size(16, 16);
    let behind = PointCloud::new(vec![Vector3::new(0.0, 0.0, -1.0), Vector3::new(0.0, 0.0, 0.05)], vec![1.0, 1.0], 1).unwrap();
    let out = render(&behind, &Rigid::identity(), &camera, &s).unwrap();
    assert!(out.features().iter().all(|&v| v == 0.0));
    assert_eq!(out.buffers().unwrap().total(), 0);
}
