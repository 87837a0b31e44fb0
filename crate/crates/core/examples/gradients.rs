//! Analytic gradients against central finite differences on a small scene.
//!
//! cargo run --release --example gradients

use softsplat::checks::{check_gradients, gradient_case, FD_STEP};
use softsplat::{backward, render, AccumulationMode};

fn main() -> softsplat::Result<()> {
    for seed in 0..6 {
        let mut case = gradient_case(seed);
        case.settings = case.settings.with_mode(AccumulationMode::ALL[seed as usize % 3]);
        let check = check_gradients(&case, FD_STEP)?;
        println!(
            "seed {seed} {:<15} {:>3} pts: feature rel err {:.1e}, position rel err {:.1e} ({} coords, {} near boundaries)",
            case.settings.mode.to_string(),
            case.scene.cloud.len(),
            check.feature_error,
            check.position_error,
            check.positions_checked,
            check.positions_excluded
        );
    }

    // Gradient of a single pixel: every point in its z-buffer receives one.
    let case = gradient_case(0);
    let sc = &case.scene;
    let out = render(&sc.cloud, &sc.pose, &sc.camera, &case.settings)?;
    let (x, y) = (0..64 * 64)
        .map(|p| (p % 64, p / 64))
        .max_by_key(|&(x, y)| out.contributors(x, y).map_or(0, |c| c.len()))
        .unwrap();
    let mut grad = vec![0.0; out.features().len()];
    grad[(y * 64 + x) * 3] = 1.0;
    let g = backward(&sc.cloud, &sc.pose, &sc.camera, &case.settings, &out, &grad)?;
    println!("pixel ({x}, {y}) red channel:");
    for c in out.contributors(x, y).unwrap() {
        let i = c.index as usize;
        println!("  point {i:>3} depth {:.2} rho {:.3}  dL/dF {:.4}", c.depth, c.rho, g.feature(i)[0]);
    }
    Ok(())
}
