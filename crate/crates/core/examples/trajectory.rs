//! Render a 30-frame camera arc around an RGB-D frame.
//!
//! cargo run --release --example trajectory [out_dir]

use std::path::PathBuf;

use softsplat::io::write_image;
use softsplat::scene::synthetic_room;
use softsplat::trajectory::TrajectorySpec;
use softsplat::{build_cloud, render, RenderSettings};

fn main() -> softsplat::Result<()> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "softsplat-out".into())).join("frames");
    std::fs::create_dir_all(&out_dir)?;

    let frame = synthetic_room(96, 96, 2);
    let cloud = build_cloud(&frame.image, &frame.depth, &frame.camera)?;
    let spec = TrajectorySpec::parse(
        r#"{"arc": {"axis": [0, 1, 0], "degrees": -15, "translation": [0.6, 0, 0.4], "frames": 30}}"#,
    )?;
    let settings = RenderSettings::default().with_size(96, 96);
    for (i, pose) in spec.poses().iter().enumerate() {
        let out = render(&cloud, pose, &frame.camera, &settings)?;
        let holes = out.alpha().iter().filter(|&&a| a < 0.05).count();
        write_image(out_dir.join(format!("frame_{i:04}.png")), &out.feature_map())?;
        if i % 5 == 0 || i + 1 == spec.len() {
            println!("frame {i:>2}: {holes} hole pixels");
        }
    }
    println!("wrote {} frames to {}", spec.len(), out_dir.display());
    Ok(())
}
