//! Render a random point cloud and save the feature, alpha and depth maps.
//!
//! cargo run --release --example render_basic [out_dir]

use std::path::PathBuf;

use softsplat::io::{write_image, write_pfm};
use softsplat::scene::{random_scene, SceneParams};
use softsplat::{render, RenderSettings};

fn main() -> softsplat::Result<()> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "softsplat-out".into()));
    std::fs::create_dir_all(&out_dir)?;

    let params = SceneParams { points: 4000, width: 256, height: 256, ..SceneParams::default() };
    let scene = random_scene(42, &params);
    let settings = RenderSettings::default();
    let out = render(&scene.cloud, &scene.pose, &scene.camera, &settings)?;

    write_image(out_dir.join("features.png"), &out.feature_map())?;
    write_image(out_dir.join("alpha.png"), &out.alpha_map())?;
    write_pfm(out_dir.join("depth.pfm"), &out.depth_map())?;

    let covered = out.alpha().iter().filter(|&&a| a > 0.0).count();
    let buffers = out.buffers().expect("render keeps contributor buffers");
    println!(
        "{} points -> {}x{}: {} covered pixels, {} z-buffer entries",
        scene.cloud.len(),
        settings.width,
        settings.height,
        covered,
        buffers.total()
    );
    println!("wrote {}", out_dir.display());
    Ok(())
}
