use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::Vector3;
use tempfile::TempDir;

use softsplat::io::{read_image, read_pfm, write_camera, write_image, write_pfm};
use softsplat::scene::synthetic_room;
use softsplat::{build_cloud, render_bruteforce, RenderSettings, Rigid};

fn softsplat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softsplat")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(out.status.success(), "stdout: {stdout}\nstderr: {}", String::from_utf8_lossy(&out.stderr));
    stdout
}

struct Inputs {
    dir: TempDir,
    image: PathBuf,
    depth: PathBuf,
    camera: PathBuf,
}

impl Inputs {
    fn room(size: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let frame = synthetic_room(size, size, 5);
        let (image, depth, camera) =
            (dir.path().join("rgb.png"), dir.path().join("depth.pfm"), dir.path().join("camera.json"));
        write_image(&image, &frame.image).unwrap();
        write_pfm(&depth, &frame.depth).unwrap();
        write_camera(&camera, &frame.camera, &Rigid::identity()).unwrap();
        Inputs { dir, image, depth, camera }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn pose(&self, name: &str, pose: &Rigid) -> PathBuf {
        let path = self.path(name);
        let r = pose.rotation();
        let t = pose.translation();
        let rot: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| r[(i, j)])).collect();
        std::fs::write(&path, serde_json::json!({"rotation": rot, "translation": [t.x, t.y, t.z]}).to_string())
            .unwrap();
        path
    }

    fn warp(&self, target: &Path, out: &Path, extra: &[&str]) -> Output {
        let mut args = vec![
            "warp",
            "--image",
            self.image.to_str().unwrap(),
            "--depth",
            self.depth.to_str().unwrap(),
            "--camera",
            self.camera.to_str().unwrap(),
            "--target-pose",
            target.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        softsplat(&args)
    }

    fn trajectory(&self, spec: &str, out_dir: &Path, extra: &[&str]) -> Output {
        let spec_path = self.path(&format!("traj{}.json", out_dir.file_name().unwrap().to_string_lossy()));
        std::fs::write(&spec_path, spec).unwrap();
        let mut args = vec![
            "trajectory",
            "--image",
            self.image.to_str().unwrap(),
            "--depth",
            self.depth.to_str().unwrap(),
            "--camera",
            self.camera.to_str().unwrap(),
            "--trajectory",
            spec_path.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        softsplat(&args)
    }
}

#[test]
fn identity_warp_reproduces_input() {
    let inp = Inputs::room(48);
    let target = inp.pose("id.json", &Rigid::identity());
    let out = inp.path("out.png");
    ok(&inp.warp(&target, &out, &["--r", "0.5"]));
    assert_eq!(read_image(&out).unwrap(), read_image(&inp.image).unwrap());
    let mask = read_image(inp.path("out_mask.png")).unwrap();
    assert!(mask.data().iter().all(|&m| m == 0.0));
}

#[test]
fn yaw_warp_matches_oracle_and_holes_sit_on_one_side() {
    let inp = Inputs::room(64);
    let pose = Rigid::from_axis_angle(Vector3::y(), 20f64.to_radians(), Vector3::zeros());
    let target = inp.pose("yaw.json", &pose);
    let (out, mask_path) = (inp.path("yaw.png"), inp.path("holes.png"));
    ok(&inp.warp(&target, &out, &["--mask", mask_path.to_str().unwrap()]));

    let image = read_image(&inp.image).unwrap();
    let depth = read_pfm(&inp.depth).unwrap();
    let camera = softsplat::io::read_camera(&inp.camera).unwrap().0;
    let cloud = build_cloud(&image, &depth, &camera).unwrap();
    let settings = RenderSettings::default().with_size(64, 64);
    let oracle = render_bruteforce(&cloud, &pose, &camera, &settings).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_image(dir.path().join("oracle.png"), &oracle.feature_map()).unwrap();
    assert_eq!(read_image(&out).unwrap(), read_image(dir.path().join("oracle.png")).unwrap());

    // Yawing towards +x moves content right; the uncovered region is on the left.
    let mask = read_image(&mask_path).unwrap();
    let hole_columns: Vec<usize> =
        (0..64).filter(|&x| (0..64).any(|y| mask.get(x, y) > 0.0)).collect();
    assert!(!hole_columns.is_empty());
    assert!(hole_columns.iter().all(|&x| x < 32), "{hole_columns:?}");
    for y in 0..64 {
        for x in 0..64 {
            assert_eq!(mask.get(x, y) > 0.0, oracle.alpha_at(x, y) < 0.05);
        }
    }
}

#[test]
fn preset_maps_normalized_depth() {
    let inp = Inputs::room(32);
    let depth = read_pfm(&inp.depth).unwrap();
    // Normalize for the matterport range (0.1, 10).
    let norm = softsplat::FeatureMap::from_fn(32, 32, 1, |x, y, _| (depth.get(x, y) - 0.1) / 9.9);
    let norm_path = inp.path("norm.pfm");
    write_pfm(&norm_path, &norm).unwrap();
    let target = inp.pose("id.json", &Rigid::identity());
    let (a, b) = (inp.path("a.png"), inp.path("b.png"));
    ok(&inp.warp(&target, &a, &["--r", "0.5"]));
    let mut args: Vec<String> = vec![
        "warp".into(),
        "--image".into(),
        inp.image.to_string_lossy().into(),
        "--depth".into(),
        norm_path.to_string_lossy().into(),
        "--camera".into(),
        inp.camera.to_string_lossy().into(),
        "--target-pose".into(),
        target.to_string_lossy().into(),
        "--out".into(),
        b.to_string_lossy().into(),
        "--r".into(),
        "0.5".into(),
        "--preset".into(),
        "matterport".into(),
    ];
    ok(&softsplat(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    assert_eq!(read_image(&a).unwrap(), read_image(&b).unwrap());
    args.last_mut().unwrap().replace_range(.., "imaginary");
    assert_eq!(softsplat(&args.iter().map(String::as_str).collect::<Vec<_>>()).status.code(), Some(1));
}

#[test]
fn trajectory_frames() {
    let inp = Inputs::room(32);
    let arc = r#"{"arc": {"axis": [0,1,0], "degrees": 10, "translation": [0.2,0,0], "frames": 30}}"#;
    let dir = inp.path("arc");
    let stdout = ok(&inp.trajectory(arc, &dir, &[]));
    assert!(stdout.contains("30 frames"));
    let frames: Vec<_> = (0..30).map(|i| read_image(dir.join(format!("frame_{i:04}.png"))).unwrap()).collect();
    assert!(!dir.join("frame_0030.png").exists());

    // One identity frame equals an identity warp.
    let single = inp.path("single");
    ok(&inp.trajectory(r#"{"poses": [{"translation": [0,0,0]}]}"#, &single, &[]));
    let warp = inp.path("warp.png");
    ok(&inp.warp(&inp.pose("id.json", &Rigid::identity()), &warp, &[]));
    assert_eq!(read_image(single.join("frame_0000.png")).unwrap(), read_image(&warp).unwrap());
    assert_eq!(read_image(single.join("frame_0000.png")).unwrap(), frames[0]);

    // The same poses in reverse order give the frames in reverse order.
    let poses: Vec<serde_json::Value> = softsplat::trajectory::TrajectorySpec::parse(arc)
        .unwrap()
        .poses()
        .iter()
        .rev()
        .map(|p| {
            let r = p.rotation();
            let t = p.translation();
            let rot: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| r[(i, j)])).collect();
            serde_json::json!({"rotation": rot, "translation": [t.x, t.y, t.z]})
        })
        .collect();
    let rev = inp.path("rev");
    ok(&inp.trajectory(&serde_json::json!({ "poses": poses }).to_string(), &rev, &[]));
    for (i, frame) in frames.iter().rev().enumerate() {
        assert_eq!(&read_image(rev.join(format!("frame_{i:04}.png"))).unwrap(), frame, "frame {i}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let inp = Inputs::room(48);
    let pose = Rigid::from_axis_angle(Vector3::new(0.3, 1.0, 0.0), 0.2, Vector3::new(0.1, 0.0, -0.2));
    let target = inp.pose("t.json", &pose);
    let (a, b) = (inp.path("a.png"), inp.path("b.png"));
    ok(&inp.warp(&target, &a, &["--threads", "1"]));
    ok(&inp.warp(&target, &b, &["--threads", "3"]));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn selftest_is_reproducible() {
    let a = ok(&softsplat(&["selftest", "--seed", "7", "--cases", "2"]));
    let b = ok(&softsplat(&["selftest", "--seed", "7", "--cases", "2"]));
    assert_eq!(a, b);
    assert!(a.contains("oracle equivalence: 2/2 passed") && a.contains("gradient checks: 2/2 passed"), "{a}");
    let zero = ok(&softsplat(&["selftest", "--cases", "0"]));
    assert!(zero.contains("0/0"));
}

#[test]
fn bench_json_schema() {
    let out = ok(&softsplat(&[
        "bench", "--points", "2000", "--res", "32", "--iters", "2", "--warmup", "0", "--scene", "uniform-box", "--json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 4, "{keys:?}");
    assert!(v["workload"].as_str().unwrap().contains("2000 pts -> 32x32"));
    for key in ["forward_ms", "backward_ms"] {
        assert!(v[key]["p50"].as_f64().unwrap() <= v[key]["p90"].as_f64().unwrap());
    }
    assert!(v["points_per_sec"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let inp = Inputs::room(16);
    let target = inp.pose("id.json", &Rigid::identity());
    let out = inp.path("o.png");
    assert_eq!(inp.warp(&target, &out, &["--k", "0"]).status.code(), Some(1));
    assert_eq!(inp.warp(&target, &out, &["--mode", "max"]).status.code(), Some(1));
    assert_eq!(inp.warp(&inp.path("missing.json"), &out, &[]).status.code(), Some(2));
    std::fs::write(inp.path("garbage.json"), "{not json").unwrap();
    assert_eq!(inp.warp(&inp.path("garbage.json"), &out, &[]).status.code(), Some(2));
    std::fs::write(inp.path("bad.json"), r#"{"rotation": [2,0,0,0,1,0,0,0,1]}"#).unwrap();
    let bad = inp.warp(&inp.path("bad.json"), &out, &[]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("rotation"));
    assert_eq!(softsplat(&["frobnicate"]).status.code(), Some(1));
}
