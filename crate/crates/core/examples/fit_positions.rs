//! Toy inverse rendering: recover point positions and colors from a target
//! image by gradient descent through the renderer.
//!
//! cargo run --release --example fit_positions

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softsplat::{backward, render, Camera, PointCloud, RenderSettings, Rigid};

fn loss_and_grad(out: &softsplat::RenderOutput, target: &[f64]) -> (f64, Vec<f64>) {
    let grad: Vec<f64> = out.features().iter().zip(target).map(|(f, t)| f - t).collect();
    (0.5 * grad.iter().map(|g| g * g).sum::<f64>(), grad)
}

fn main() -> softsplat::Result<()> {
    let camera = Camera::with_fov(64, 64, 60.0, 0.1, 20.0)?;
    let settings = RenderSettings::default().with_size(64, 64).with_radius(6.0);
    let pose = Rigid::identity();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let n = 12;
    let truth: Vec<Vector3<f64>> = (0..n)
        .map(|_| camera.unproject(rng.random_range(12.0..52.0), rng.random_range(12.0..52.0), rng.random_range(3.0..5.0)))
        .collect();
    let colors: Vec<f64> = (0..n * 3).map(|_| rng.random_range(0.2..1.0)).collect();
    let target = render(&PointCloud::new(truth.clone(), colors.clone(), 3)?, &pose, &camera, &settings)?;
    let target = target.features().to_vec();

    // Start from jittered positions and grey colors.
    let start: Vec<Vector3<f64>> =
        truth.iter().map(|p| p + Vector3::new(rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15), 0.0)).collect();
    let mut cloud = PointCloud::new(start, vec![0.5; n * 3], 3)?;

    let (lr_pos, lr_feat) = (2e-4, 2e-3);
    for step in 0..=400 {
        let out = render(&cloud, &pose, &camera, &settings)?;
        let (loss, grad) = loss_and_grad(&out, &target);
        let g = backward(&cloud, &pose, &camera, &settings, &out, &grad)?;
        if step % 50 == 0 {
            let err = cloud.positions().iter().zip(&truth).map(|(a, b)| (a - b).xy().norm()).fold(0.0, f64::max);
            println!("step {step:>3}: loss {loss:.5}, max xy position error {err:.4}");
        }
        for (p, d) in cloud.positions_mut().iter_mut().zip(g.positions()) {
            // Depth is weakly observable from one view; only x and y are fit.
            p.x -= lr_pos * d.x;
            p.y -= lr_pos * d.y;
        }
        for (f, d) in cloud.features_mut().iter_mut().zip(g.features()) {
            *f -= lr_feat * d;
        }
    }
    Ok(())
}
