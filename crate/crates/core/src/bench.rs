//! Timing harness for the renderer.
//!
//! A suite is a list of cases (scene generator, point count, settings). Each
//! case is run `warmup + iters` times; only the last `iters` are kept. The
//! clock wraps `render` and `backward` only, never scene generation.
//!
//! Report JSON:
//!
//! ```json
//! {"environment": {"threads": 8, "profile": "release", "os": "linux", "arch": "x86_64"},
//!  "rows": [{"workload": "...", "forward_ms": {"p50": 1.0, "p90": 1.2},
//!            "backward_ms": {"p50": 2.0, "p90": 2.1}, "points_per_sec": 1e8,
//!            "regression": null}]}
//! ```
//!
//! A baseline file is a previous report. Rows are matched by `workload`.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backward::backward;
use crate::error::{Error, Result};
use crate::geometry::{Camera, Rigid};
use crate::pointcloud::{build_cloud, PointCloud};
use crate::rasterizer::{render, RenderSettings};
use crate::scene::synthetic_room;

/// Relative slowdown of a median that counts as a regression.
pub const REGRESSION_THRESHOLD: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    UniformBox,
    DepthPlane,
    RgbdSyntheticRoom,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::UniformBox => "uniform-box",
            Generator::DepthPlane => "depth-plane",
            Generator::RgbdSyntheticRoom => "rgbd-synthetic-room",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-box" => Ok(Generator::UniformBox),
            "depth-plane" => Ok(Generator::DepthPlane),
            "rgbd-synthetic-room" | "room" => Ok(Generator::RgbdSyntheticRoom),
            _ => Err(Error::invalid(format!(
                "unknown scene generator `{s}` (expected uniform-box, depth-plane or rgbd-synthetic-room)"
            ))),
        }
    }
}

/// A reproducible benchmark cloud, in the frame of the camera returned by
/// [`BenchScene::camera`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchScene {
    pub generator: Generator,
    pub points: usize,
    pub seed: u64,
}

impl BenchScene {
    /// A 60° camera at the given resolution.
    pub fn camera(width: usize, height: usize) -> Camera {
        Camera::with_fov(width, height, 60.0, 0.05, 20.0).expect("valid bench camera")
    }

    /// Builds the cloud. The points cover roughly the same screen area
    /// regardless of `points`, so point count scales density only.
    pub fn build(&self) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.points;
        let camera = Self::camera(256, 256);
        match self.generator {
            Generator::UniformBox => {
                let positions = (0..n)
                    .map(|_| {
                        let z = rng.random_range(2.0..6.0);
                        let u = rng.random_range(0.0..256.0);
                        let v = rng.random_range(0.0..256.0);
                        camera.unproject(u, v, z)
                    })
                    .collect();
                let features = (0..n * 3).map(|_| rng.random_range(0.0..1.0)).collect();
                PointCloud::new(positions, features, 3).expect("finite cloud")
            }
            Generator::DepthPlane => {
                let normal = Vector3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), 1.0);
                let positions = (0..n)
                    .map(|_| {
                        let u = rng.random_range(0.0..256.0);
                        let v = rng.random_range(0.0..256.0);
                        let ray = camera.unproject(u, v, 1.0);
                        ray * (4.0 / normal.dot(&ray))
                    })
                    .collect();
                let features = (0..n * 3).map(|_| rng.random_range(0.0..1.0)).collect();
                PointCloud::new(positions, features, 3).expect("finite cloud")
            }
            Generator::RgbdSyntheticRoom => {
                let side = (n as f64).sqrt().ceil().max(1.0) as usize;
                let frame = synthetic_room(side, side, self.seed);
                let full = build_cloud(&frame.image, &frame.depth, &frame.camera).expect("room cloud");
                if full.len() == n {
                    return full;
                }
                let order: Vec<usize> = (0..n).map(|i| i * full.len() / n.max(1)).collect();
                let positions = order.iter().map(|&i| full.positions()[i]).collect();
                let features = order.iter().flat_map(|&i| full.feature(i).to_vec()).collect();
                PointCloud::new(positions, features, full.channels()).expect("finite cloud")
            }
        }
    }
}

/// One benchmark row.
#[derive(Clone, Debug)]
pub struct BenchCase {
    pub scene: BenchScene,
    pub settings: RenderSettings,
}

impl BenchCase {
    /// 262,144 room points rendered to 256², `K = 128`, `r = 4`.
    pub fn paper_workload() -> Self {
        BenchCase {
            scene: BenchScene { generator: Generator::RgbdSyntheticRoom, points: 262_144, seed: 0 },
            settings: RenderSettings::default(),
        }
    }

    pub fn workload(&self) -> String {
        let s = &self.settings;
        format!(
            "{} {} pts -> {}x{} K={} r={} {}",
            self.scene.generator, self.scene.points, s.width, s.height, s.k, s.radius, s.mode
        )
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub cases: Vec<BenchCase>,
    pub iters: usize,
    pub warmup: usize,
}

impl SuiteConfig {
    /// The fixed paper-workload row plus a point-scaling pair.
    pub fn standard() -> Self {
        let base = BenchCase::paper_workload();
        let half = BenchCase {
            scene: BenchScene { generator: Generator::UniformBox, points: 131_072, seed: 1 },
            settings: RenderSettings::default(),
        };
        let full = BenchCase { scene: BenchScene { points: 262_144, ..half.scene }, ..half.clone() };
        SuiteConfig { cases: vec![base, half, full], iters: 5, warmup: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub p50: f64,
    pub p90: f64,
}

impl Timing {
    /// Nearest-rank percentiles of `samples` (milliseconds).
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Timing { p50: f64::NAN, p90: f64::NAN };
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |q: f64| s[((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Timing { p50: rank(0.5), p90: rank(0.9) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub forward_ratio: f64,
    pub backward_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub workload: String,
    pub forward_ms: Timing,
    pub backward_ms: Timing,
    pub points_per_sec: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regression: Option<Regression>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub threads: usize,
    pub profile: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn capture() -> Self {
        Environment {
            threads: rayon::current_num_threads(),
            profile: if cfg!(debug_assertions) { "debug" } else { "release" }.to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub environment: Environment,
    pub rows: Vec<BenchRow>,
    /// False when no baseline was available.
    #[serde(default)]
    pub compared: bool,
}

/// Times one case. The gradient image is fixed per case.
pub fn run_case(case: &BenchCase, iters: usize, warmup: usize) -> Result<BenchRow> {
    let s = &case.settings;
    let cloud = case.scene.build();
    let camera = BenchScene::camera(s.width, s.height);
    let pose = Rigid::from_axis_angle(Vector3::y(), 5f64.to_radians(), Vector3::zeros());
    let grad: Vec<f64> = (0..s.width * s.height * cloud.channels())
        .map(|i| ((i % 7) as f64 - 3.0) * 0.1)
        .collect();
    let (mut fwd, mut bwd) = (Vec::with_capacity(iters), Vec::with_capacity(iters));
    for it in 0..warmup + iters {
        let t0 = Instant::now();
        let out = render(&cloud, &pose, &camera, s)?;
        let t1 = Instant::now();
        let g = backward(&cloud, &pose, &camera, s, &out, &grad)?;
        let t2 = Instant::now();
        std::hint::black_box(&g);
        drop(out);
        if it >= warmup {
            fwd.push((t1 - t0).as_secs_f64() * 1e3);
            bwd.push((t2 - t1).as_secs_f64() * 1e3);
        }
    }
    let forward_ms = Timing::from_samples(&fwd);
    Ok(BenchRow {
        workload: case.workload(),
        forward_ms,
        backward_ms: Timing::from_samples(&bwd),
        points_per_sec: cloud.len() as f64 / (forward_ms.p50 * 1e-3),
        regression: None,
    })
}

/// Runs every case in order and, when `baseline` is given, flags medians
/// more than [`REGRESSION_THRESHOLD`] slower than the matching baseline row.
pub fn run_suite(config: &SuiteConfig, baseline: Option<&Report>) -> Result<Report> {
    let mut rows = Vec::with_capacity(config.cases.len());
    for case in &config.cases {
        rows.push(run_case(case, config.iters.max(1), config.warmup)?);
    }
    let mut report = Report { environment: Environment::capture(), rows, compared: false };
    if let Some(base) = baseline {
        report.compare(base);
    }
    Ok(report)
}

impl Report {
    pub fn compare(&mut self, baseline: &Report) {
        self.compared = true;
        for row in &mut self.rows {
            row.regression = baseline.rows.iter().find(|b| b.workload == row.workload).and_then(|b| {
                let f = row.forward_ms.p50 / b.forward_ms.p50;
                let k = row.backward_ms.p50 / b.backward_ms.p50;
                (f > 1.0 + REGRESSION_THRESHOLD || k > 1.0 + REGRESSION_THRESHOLD)
                    .then_some(Regression { forward_ratio: f, backward_ratio: k })
            });
        }
    }

    pub fn regressions(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| r.regression.is_some())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(format!("invalid bench report: {e}")))
    }

    pub fn to_markdown(&self) -> String {
        let e = &self.environment;
        let mut md = format!("{} threads, {} build, {}-{}\n\n", e.threads, e.profile, e.os, e.arch);
        md.push_str("| workload | fwd p50 ms | fwd p90 ms | bwd p50 ms | bwd p90 ms | Mpts/s | status |\n");
        md.push_str("|---|---:|---:|---:|---:|---:|---|\n");
        for r in &self.rows {
            let status = match (&r.regression, self.compared) {
                (Some(g), _) => format!("REGRESSED x{:.2}/x{:.2}", g.forward_ratio, g.backward_ratio),
                (None, true) => "ok".to_string(),
                (None, false) => "-".to_string(),
            };
            let _ = writeln!(
                md,
                "| {} | {:.1} | {:.1} | {:.1} | {:.1} | {:.2} | {} |",
                r.workload,
                r.forward_ms.p50,
                r.forward_ms.p90,
                r.backward_ms.p50,
                r.backward_ms.p90,
                r.points_per_sec / 1e6,
                status
            );
        }
        md
    }
}

/// Reads a baseline report. A missing file yields `Ok(None)`.
pub fn load_baseline(path: impl AsRef<Path>) -> Result<Option<Report>> {
    match std::fs::read_to_string(path) {
        Ok(text) => Report::from_json(&text).map(Some),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}
