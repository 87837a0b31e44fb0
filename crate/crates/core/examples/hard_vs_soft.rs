//! Hard z-buffering against the soft renderer: gamma = 0 with K = 1
//! reproduces the classic z-buffer, while the soft settings blend and pass
//! gradients to every point in the buffer.
//!
//! cargo run --release --example hard_vs_soft

use softsplat::scene::{random_scene, SceneParams};
use softsplat::{backward, render, render_hard, RenderSettings};

fn main() -> softsplat::Result<()> {
    let params = SceneParams { points: 800, width: 96, height: 96, tie_fraction: 0.0, ..SceneParams::default() };
    let sc = random_scene(11, &params);
    let base = RenderSettings::default().with_size(96, 96);

    let hard = render_hard(&sc.cloud, &sc.pose, &sc.camera, &base)?;
    let limit = render(&sc.cloud, &sc.pose, &sc.camera, &base.with_gamma(0.0).with_k(1))?;
    println!("gamma = 0, K = 1 equals the hard z-buffer: {}", limit.features() == hard.features());

    let grad = vec![1.0; 96 * 96 * 3];
    for (name, s) in [("hard (K=1)", base.with_k(1)), ("soft (K=128)", base)] {
        let out = render(&sc.cloud, &sc.pose, &sc.camera, &s)?;
        let g = backward(&sc.cloud, &sc.pose, &sc.camera, &s, &out, &grad)?;
        let reached = (0..sc.cloud.len()).filter(|&i| g.feature(i).iter().any(|&v| v != 0.0)).count();
        let moved = g.positions().iter().filter(|d| d.norm() > 0.0).count();
        println!("{name:<13} feature gradients reach {reached} points, position gradients {moved}");
    }
    Ok(())
}
