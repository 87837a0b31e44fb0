use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softsplat::io::ply::{encode_ply, parse_ply};
use softsplat::io::{
    read_camera, read_image, read_map, read_pfm, write_camera, write_image, write_map, write_pfm,
    PlyEncoding, TensorDump,
};
use softsplat::{Camera, FeatureMap, PointCloud, Rigid};

/// Values that survive a trip through `f32`.
fn f32_cloud(n: usize, channels: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = || rng.random_range(-50.0f32..50.0) as f64;
    let positions = (0..n).map(|_| Vector3::new(f(), f(), f())).collect();
    let features = (0..n * channels).map(|_| f()).collect();
    PointCloud::new(positions, features, channels).unwrap()
}

#[test]
fn ply_ten_thousand_points_bit_exact() {
    let cloud = f32_cloud(10_000, 3, 1);
    for encoding in [PlyEncoding::BinaryLittleEndian, PlyEncoding::Ascii] {
        let back = parse_ply(&encode_ply(&cloud, encoding)).unwrap();
        assert_eq!(back, cloud, "{encoding:?}");
    }
}

#[test]
fn ply_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.ply");
    let cloud = f32_cloud(257, 5, 2);
    softsplat::io::write_ply(&path, &cloud, PlyEncoding::BinaryLittleEndian).unwrap();
    assert_eq!(softsplat::io::read_ply(&path).unwrap(), cloud);
}

#[test]
fn ply_uchar_colors() {
    let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n\
                property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n\
                end_header\n0 0 1 255 0 128\n1 2 3 0 51 255\n";
    let cloud = parse_ply(text.as_bytes()).unwrap();
    assert_eq!(cloud.channels(), 3);
    assert_eq!(cloud.feature(0), &[1.0, 0.0, 128.0 / 255.0]);
    assert_eq!(cloud.feature(1), &[0.0, 0.2, 1.0]);
}

#[test]
fn png_quantization_error_is_half_a_level() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for channels in [1, 3] {
        let map = FeatureMap::from_fn(37, 21, channels, |_, _, _| rng.random_range(0.0..=1.0));
        let path = dir.path().join(format!("img{channels}.png"));
        write_image(&path, &map).unwrap();
        let back = read_image(&path).unwrap();
        assert!(back.same_size(&map));
        assert!(back.max_abs_diff(&map).unwrap() <= 1.0 / 510.0 + 1e-12);
    }
}

#[test]
fn png_exact_levels_survive() {
    let dir = tempfile::tempdir().unwrap();
    let map = FeatureMap::from_fn(16, 16, 3, |x, y, c| ((x * 16 + y + c) % 256) as f64 / 255.0);
    let path = dir.path().join("levels.png");
    write_image(&path, &map).unwrap();
    assert_eq!(read_image(&path).unwrap(), map);
}

#[test]
fn png_with_alpha_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rgba.png");
    image::RgbaImage::new(4, 4).save(&path).unwrap();
    let err = read_image(&path).unwrap_err();
    assert!(err.is_io() && err.to_string().contains("alpha"), "{err}");
}

#[test]
fn pfm_and_tensor_dump_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for channels in [1, 3] {
        let map = FeatureMap::from_fn(13, 7, channels, |_, _, _| rng.random_range(-5.0f32..5.0) as f64);
        let pfm = dir.path().join(format!("m{channels}.pfm"));
        write_pfm(&pfm, &map).unwrap();
        assert_eq!(read_pfm(&pfm).unwrap(), map);
        let ftd = dir.path().join(format!("m{channels}.ftd"));
        write_map(&ftd, &map).unwrap();
        assert_eq!(read_map(&ftd).unwrap(), map);
    }
    let odd = TensorDump::new(vec![2, 3, 4, 5], vec![0.5; 120]).unwrap();
    assert_eq!(TensorDump::decode(&odd.encode()).unwrap(), odd);
    assert!(odd.to_feature_map().is_err());
}

#[test]
fn camera_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cam.json");
    let camera = Camera::with_fov(320, 240, 70.0, 0.2, 30.0).unwrap();
    let pose = Rigid::from_axis_angle(Vector3::new(0.3, -1.0, 0.2), 0.7, Vector3::new(1.0, -2.0, 0.5));
    write_camera(&path, &camera, &pose).unwrap();
    let (c, p) = read_camera(&path).unwrap();
    assert_eq!(c, camera);
    assert!(p.max_abs_diff(&pose) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ply_round_trip_any_shape(n in 0usize..60, channels in 1usize..6, seed: u64, ascii: bool) {
        let cloud = f32_cloud(n, channels, seed);
        let encoding = if ascii { PlyEncoding::Ascii } else { PlyEncoding::BinaryLittleEndian };
        prop_assert_eq!(parse_ply(&encode_ply(&cloud, encoding)).unwrap(), cloud);
    }

    #[test]
    fn truncated_ply_never_panics(cut in 0usize..400, seed: u64) {
        let bytes = encode_ply(&f32_cloud(10, 2, seed), PlyEncoding::BinaryLittleEndian);
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(parse_ply(&bytes[..cut]).is_err());
    }
}
