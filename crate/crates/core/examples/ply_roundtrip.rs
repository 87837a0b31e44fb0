//! Save a cloud as ASCII and binary PLY and read both back.
//!
//! cargo run --release --example ply_roundtrip [out_dir]

use std::path::PathBuf;

use softsplat::io::{read_ply, write_ply, PlyEncoding};
use softsplat::scene::synthetic_room;
use softsplat::{build_cloud, PointCloud};

fn main() -> softsplat::Result<()> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "softsplat-out".into()));
    std::fs::create_dir_all(&out_dir)?;

    let frame = synthetic_room(100, 100, 4);
    let cloud = build_cloud(&frame.image, &frame.depth, &frame.camera)?;
    // PLY stores 32-bit floats.
    let rounded = PointCloud::new(
        cloud.positions().iter().map(|p| p.map(|v| v as f32 as f64)).collect(),
        cloud.features().iter().map(|&v| v as f32 as f64).collect(),
        cloud.channels(),
    )?;
    for (name, encoding) in [("room_ascii.ply", PlyEncoding::Ascii), ("room_binary.ply", PlyEncoding::BinaryLittleEndian)] {
        let path = out_dir.join(name);
        write_ply(&path, &rounded, encoding)?;
        let back = read_ply(&path)?;
        let bytes = std::fs::metadata(&path)?.len();
        println!("{name}: {} points, {bytes} bytes, identical after reading back: {}", back.len(), back == rounded);
    }
    Ok(())
}
