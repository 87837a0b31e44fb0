//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::Instant;

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softsplat::bench::{run_case, BenchCase, BenchScene, Generator};
use softsplat::checks::{
    check_gradients, gradient_case, hard_case, hard_matches, oracle_case, oracle_matches, FD_STEP,
};
use softsplat::scene::{random_rgbd, random_scene, synthetic_room, SceneParams};
use softsplat::{
    backward, build_cloud, render, Camera, PointCloud, RenderGradients, RenderOutput,
    RenderSettings, Rigid,
};

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("[{}] {id}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.failures += !pass as usize;
    }
}

fn oracle_equivalence(gate: &mut Gate) {
    let start = Instant::now();
    let mut ok = 0;
    for seed in 0..50 {
        ok += oracle_matches(&oracle_case(seed)).unwrap() as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    gate.report(
        1,
        "oracle equivalence",
        ok == 50 && secs < 60.0,
        format!("{ok}/50 scenes bit-exact in {secs:.1} s (limit 60 s)"),
    );
}

fn hard_z_limit(gate: &mut Gate) {
    let (mut ok, mut pixels) = (0, 0);
    for seed in 0..20 {
        let (n, bad) = hard_matches(&hard_case(1000 + seed)).unwrap();
        pixels += n;
        ok += (bad == 0 && n > 0) as usize;
    }
    gate.report(
        2,
        "hard z-buffer limit",
        ok == 20,
        format!("{ok}/20 scenes identical on {pixels} uniquely-resolved pixels"),
    );
}

fn round_trip(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for seed in 0..10u64 {
        let (w, h) = (64 + 8 * seed as usize, 96 - 4 * seed as usize);
        let frame = random_rgbd(w, h, seed);
        let cloud = build_cloud(&frame.image, &frame.depth, &frame.camera).unwrap();
        // Footprints narrower than the pixel pitch.
        let settings = RenderSettings::default().with_size(w, h).with_radius(0.5);
        let out = render(&cloud, &Rigid::identity(), &frame.camera, &settings).unwrap();
        for y in 0..h {
            for x in 0..w {
                let z = frame.depth.get(x, y);
                if z > frame.camera.near && z < frame.camera.far {
                    checked += 1;
                    for (a, b) in out.pixel(x, y).iter().zip(frame.image.pixel(x, y)) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
    }
    gate.report(
        3,
        "round-trip identity",
        worst <= 1e-5,
        format!("max abs error {worst:.2e} over {checked} valid pixels in 10 images (limit 1e-5)"),
    );
}

fn gradient_checks(gate: &mut Gate) {
    let start = Instant::now();
    let (mut ok, mut feat, mut pos, mut checked, mut excluded) = (0, 0f64, 0f64, 0, 0);
    for seed in 0..20 {
        let case = gradient_case(seed);
        assert!(case.scene.cloud.len() <= 200);
        let c = check_gradients(&case, FD_STEP).unwrap();
        ok += c.passed() as usize;
        feat = feat.max(c.feature_error);
        pos = pos.max(c.position_error);
        checked += c.positions_checked;
        excluded += c.positions_excluded;
    }
    let secs = start.elapsed().as_secs_f64();
    gate.report(
        4,
        "gradient checks",
        ok == 20 && secs < 300.0,
        format!(
            "{ok}/20 seeds; worst feature rel err {feat:.1e} (limit 1e-4), worst position rel err \
             {pos:.1e} (limit 1e-2) over {checked} coords, {excluded} near boundaries excluded; {secs:.1} s"
        ),
    );
}

fn gradient_flow(gate: &mut Gate) {
    let camera = Camera::with_fov(16, 16, 60.0, 0.1, 20.0).unwrap();
    // Three splats at different offsets from pixel (8, 8), so each rho < 1.
    let centers = [(9.0, 8.5, 1.0), (8.5, 10.0, 2.0), (6.5, 8.0, 3.0)];
    let positions = centers.iter().map(|&(u, v, z)| camera.unproject(u, v, z)).collect();
    let cloud = PointCloud::new(positions, vec![0.9, 0.5, 0.2], 1).unwrap();
    let mut grad = vec![0.0; 16 * 16];
    grad[8 * 16 + 8] = 1.0;
    let run = |k: usize| -> (RenderOutput, RenderGradients) {
        let s = RenderSettings::default().with_size(16, 16).with_k(k);
        let out = render(&cloud, &Rigid::identity(), &camera, &s).unwrap();
        let g = backward(&cloud, &Rigid::identity(), &camera, &s, &out, &grad).unwrap();
        (out, g)
    };
    let (out, soft) = run(128);
    let rhos: Vec<f64> = out.contributors(8, 8).unwrap().iter().map(|c| c.rho).collect();
    let (_, naive) = run(1);
    let soft_nonzero = soft.features().iter().all(|&g| g != 0.0);
    let naive_only_front = naive.features()[0] != 0.0 && naive.features()[1..].iter().all(|&g| g == 0.0);
    let stacked = rhos.len() == 3 && rhos.iter().all(|&r| r > 0.0 && r < 1.0);
    gate.report(
        5,
        "gradient flow through the z-buffer",
        stacked && soft_nonzero && naive_only_front,
        format!(
            "rho = {rhos:.3?}; K=128 dF = {:.3?}; K=1 dF = {:.3?}",
            soft.features(),
            naive.features()
        ),
    );
}

fn render_and_grad(scene: &softsplat::scene::Scene, s: &RenderSettings) -> (RenderOutput, RenderGradients) {
    let out = render(&scene.cloud, &scene.pose, &scene.camera, s).unwrap();
    let grad: Vec<f64> = (0..out.features().len()).map(|i| ((i * 31) % 17) as f64 / 17.0 - 0.5).collect();
    let g = backward(&scene.cloud, &scene.pose, &scene.camera, s, &out, &grad).unwrap();
    (out, g)
}

fn determinism(gate: &mut Gate) {
    let max = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut ok = 0;
    for seed in 0..10u64 {
        let params = SceneParams { points: 1500, tie_fraction: 0.0, ..SceneParams::default() };
        let scene = random_scene(500 + seed, &params);
        let s = RenderSettings::default().with_size(64, 64).with_radius([1.0, 4.0][seed as usize % 2]);
        let runs: Vec<_> = [1, 4, max]
            .iter()
            .map(|&n| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
                pool.install(|| render_and_grad(&scene, &s))
            })
            .collect();
        let threads_ok = runs.iter().all(|(o, g)| o.identical_to(&runs[0].0) && g.identical_to(&runs[0].1));

        let mut order: Vec<usize> = (0..scene.cloud.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let permuted = softsplat::scene::Scene { cloud: scene.cloud.permuted(&order).unwrap(), ..scene.clone() };
        let (po, pg) = render_and_grad(&permuted, &s);
        let (o, g) = &runs[0];
        let images_ok = po.features() == o.features() && po.alpha() == o.alpha() && po.depth() == o.depth();
        // Point `j` of the permuted cloud is point `order[j]` of the original.
        let grads_ok = order.iter().enumerate().all(|(j, &i)| {
            pg.feature(j) == g.feature(i) && pg.positions()[j] == g.positions()[i]
        });
        let lists_ok = (0..64).all(|y| {
            (0..64).all(|x| {
                let (a, b) = (o.contributors(x, y).unwrap(), po.contributors(x, y).unwrap());
                a.len() == b.len() && a.iter().zip(b).all(|(c, d)| c.index as usize == order[d.index as usize])
            })
        });
        ok += (threads_ok && images_ok && grads_ok && lists_ok) as usize;
    }
    gate.report(
        6,
        "determinism",
        ok == 10,
        format!("{ok}/10 scenes bit-identical across threads {{1, 4, {max}}} and point permutations"),
    );
}

fn performance(gate: &mut Gate) {
    let threads = rayon::current_num_threads();
    let paper = run_case(&BenchCase::paper_workload(), 5, 1).unwrap();
    let case = |points| BenchCase {
        scene: BenchScene { generator: Generator::UniformBox, points, seed: 1 },
        settings: RenderSettings::default(),
    };
    let half = run_case(&case(131_072), 5, 1).unwrap();
    let full = run_case(&case(262_144), 5, 1).unwrap();
    let fwd_ratio = full.forward_ms.p50 / half.forward_ms.p50;
    let bwd_ratio = full.backward_ms.p50 / half.backward_ms.p50;
    let pass = paper.forward_ms.p50 <= 500.0
        && paper.backward_ms.p50 <= 1000.0
        && fwd_ratio <= 2.5
        && bwd_ratio <= 2.5;
    gate.report(
        7,
        "scaled performance",
        pass,
        format!(
            "262,144 pts -> 256x256 K=128 r=4 on {threads} thread(s): forward p50 {:.0} ms (limit 500), \
             backward p50 {:.0} ms (limit 1000); doubling points: forward x{fwd_ratio:.2}, backward \
             x{bwd_ratio:.2} (limit 2.5)",
            paper.forward_ms.p50, paper.backward_ms.p50
        ),
    );
}

fn ablations(gate: &mut Gate) {
    let frame = synthetic_room(256, 256, 0);
    let cloud = build_cloud(&frame.image, &frame.depth, &frame.camera).unwrap();
    let pose = Rigid::from_axis_angle(Vector3::y(), 20f64.to_radians(), Vector3::zeros());
    let base = RenderSettings::default();
    let configs = [
        ("default", base),
        ("small-footprint", base.with_radius(0.5)),
        ("hard-z", base.with_k(1)),
    ];
    let mut support = Vec::new();
    let mut errors = Vec::new();
    for (name, s) in configs {
        match render(&cloud, &pose, &frame.camera, &s) {
            Ok(out) => support.push(out.alpha().iter().filter(|&&a| a > 0.0).count()),
            Err(e) => {
                errors.push(format!("{name}: {e}"));
                support.push(0);
            }
        }
    }
    gate.report(
        8,
        "ablation settings",
        errors.is_empty() && support[1] < support[0],
        format!(
            "alpha support at 20 deg: default {}, small-footprint {}, hard-z {} pixels{}",
            support[0],
            support[1],
            support[2],
            if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join(", ")) }
        ),
    );
}

fn main() {
    let mut gate = Gate { failures: 0 };
    oracle_equivalence(&mut gate);
    hard_z_limit(&mut gate);
    round_trip(&mut gate);
    gradient_checks(&mut gate);
    gradient_flow(&mut gate);
    determinism(&mut gate);
    performance(&mut gate);
    ablations(&mut gate);
    println!("acceptance: {} of 8 criteria failed", gate.failures);
    if gate.failures > 0 {
        std::process::exit(1);
    }
}
