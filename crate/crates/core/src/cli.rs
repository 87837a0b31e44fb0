//! The `softsplat` command line.
//!
//! Exit codes: 0 success, 1 invalid input or arguments, 2 I/O or file
//! format error, 3 self-test failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{load_baseline, run_case, BenchCase, BenchScene, Generator};
use crate::checks::{
    check_gradients, gradient_case, hard_case, hard_matches, oracle_case, oracle_matches, FD_STEP,
};
use crate::error::Error;
use crate::featuremap::FeatureMap;
use crate::geometry::{Camera, Rigid};
use crate::io::{read_camera, read_depth, read_map, read_pose, write_image};
use crate::pointcloud::{build_cloud, normalize_depth, DepthRange, PointCloud};
use crate::rasterizer::{render, AccumulationMode, RenderOutput, RenderSettings};
use crate::trajectory::TrajectorySpec;

/// Pixels with accumulated alpha below this are holes.
pub const HOLE_ALPHA: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "softsplat", version, about = "Soft point-cloud splatting renderer")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Re-render an RGB-D image from another camera pose.
    Warp(WarpArgs),
    /// Render one frame per pose of a trajectory.
    Trajectory(TrajectoryArgs),
    /// Check the renderer against its oracles on random scenes.
    Selftest(SelftestArgs),
    /// Time forward and backward passes.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Footprint radius in pixels.
    #[arg(long = "r", default_value_t = 4.0)]
    pub radius: f64,
    /// Fall-off distance in pixels (default: the radius).
    #[arg(long = "m")]
    pub falloff: Option<f64>,
    #[arg(long, default_value_t = 128)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// alpha_composite, wsum or wsum_norm.
    #[arg(long, default_value = "alpha_composite")]
    pub mode: String,
    /// Depth file holds values in [0, 1] to map with a dataset range:
    /// matterport, realestate or kitti.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub tile_size: usize,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Source image (.png, .pfm or .ftd).
    #[arg(long)]
    pub image: PathBuf,
    /// Source z-depth (.pfm or .ftd).
    #[arg(long)]
    pub depth: PathBuf,
    /// Source camera JSON.
    #[arg(long)]
    pub camera: PathBuf,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Target camera pose JSON (world to camera).
    #[arg(long)]
    pub target_pose: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Hole mask output (default: `<out stem>_mask.png`).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Trajectory JSON with poses relative to the source camera.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub cases: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 262_144)]
    pub points: usize,
    /// Output resolution (square).
    #[arg(long, default_value_t = 256)]
    pub res: usize,
    #[arg(long, default_value_t = 128)]
    pub k: usize,
    #[arg(long = "r", default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long, default_value_t = 2)]
    pub warmup: usize,
    /// uniform-box, depth-plane or rgbd-synthetic-room.
    #[arg(long, default_value = "rgbd-synthetic-room")]
    pub scene: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Previous `--json` output to compare against.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Print machine-readable JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
    SelftestFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
            CliError::SelftestFailed(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) | CliError::SelftestFailed(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

fn context(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| {
        let msg = format!("{}: {e}", path.display());
        if e.is_io() {
            CliError::Io(msg)
        } else {
            CliError::Invalid(msg)
        }
    }
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

impl RenderArgs {
    pub fn settings(&self, width: usize, height: usize) -> Result<RenderSettings, CliError> {
        let mode: AccumulationMode = self.mode.parse()?;
        let mut s = RenderSettings::default()
            .with_size(width, height)
            .with_radius(self.radius)
            .with_k(self.k)
            .with_gamma(self.gamma)
            .with_mode(mode)
            .with_tile_size(self.tile_size);
        if let Some(m) = self.falloff {
            s.falloff = m;
        }
        s.validate()?;
        Ok(s)
    }

    fn depth_range(&self) -> Result<Option<DepthRange>, CliError> {
        self.preset
            .as_deref()
            .map(|name| {
                DepthRange::preset(name).ok_or_else(|| {
                    CliError::Invalid(format!(
                        "unknown preset `{name}` (expected matterport, realestate or kitti)"
                    ))
                })
            })
            .transpose()
    }
}

/// The source cloud in source-camera coordinates, plus the camera and its
/// world pose.
struct Source {
    cloud: PointCloud,
    camera: Camera,
    pose: Rigid,
}

fn load_source(args: &SourceArgs, render: &RenderArgs) -> Result<Source, CliError> {
    let image = read_map(&args.image).map_err(context(&args.image))?;
    let mut depth = read_depth(&args.depth).map_err(context(&args.depth))?;
    let (camera, pose) = read_camera(&args.camera).map_err(context(&args.camera))?;
    if let Some(range) = render.depth_range()? {
        depth = normalize_depth(&depth, range).map_err(context(&args.depth))?;
    }
    if (image.width(), image.height()) != (camera.width, camera.height) {
        return Err(CliError::Invalid(format!(
            "image is {}x{} but the camera is {}x{}",
            image.width(),
            image.height(),
            camera.width,
            camera.height
        )));
    }
    if !matches!(image.channels(), 1 | 3) {
        return Err(CliError::Invalid(format!(
            "image has {} channels; PNG output needs 1 or 3",
            image.channels()
        )));
    }
    let cloud = build_cloud(&image, &depth, &camera)?;
    Ok(Source { cloud, camera, pose })
}

/// 1 where `alpha < HOLE_ALPHA`, else 0.
pub fn hole_mask(out: &RenderOutput) -> FeatureMap {
    let data = out.alpha().iter().map(|&a| if a < HOLE_ALPHA { 1.0 } else { 0.0 }).collect();
    FeatureMap::new(out.width(), out.height(), 1, data).expect("mask matches render size")
}

fn default_mask_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_mask.png"))
}

fn cmd_warp(args: &WarpArgs, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let src = load_source(&args.source, &args.render)?;
    let target = read_pose(&args.target_pose).map_err(context(&args.target_pose))?;
    let settings = args.render.settings(src.camera.width, src.camera.height)?;
    let relative = target.compose(&src.pose.inverse());
    let mut out = render(&src.cloud, &relative, &src.camera, &settings)?;
    out.drop_buffers();
    write_image(&args.out, &out.feature_map()).map_err(context(&args.out))?;
    let mask_path = args.mask.clone().unwrap_or_else(|| default_mask_path(&args.out));
    let mask = hole_mask(&out);
    write_image(&mask_path, &mask).map_err(context(&mask_path))?;
    let holes = mask.data().iter().filter(|&&m| m > 0.0).count();
    writeln!(
        stdout,
        "wrote {} and {} ({} points, {} hole pixels)",
        args.out.display(),
        mask_path.display(),
        src.cloud.len(),
        holes
    )
    .map_err(out_err)
}

fn cmd_trajectory(args: &TrajectoryArgs, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let src = load_source(&args.source, &args.render)?;
    let spec = TrajectorySpec::read(&args.trajectory).map_err(context(&args.trajectory))?;
    let settings = args.render.settings(src.camera.width, src.camera.height)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;
    let poses = spec.poses();
    for (i, pose) in poses.iter().enumerate() {
        let mut out = render(&src.cloud, pose, &src.camera, &settings)?;
        out.drop_buffers();
        let path = args.out_dir.join(format!("frame_{i:04}.png"));
        write_image(&path, &out.feature_map()).map_err(context(&path))?;
    }
    writeln!(stdout, "wrote {} frames to {}", poses.len(), args.out_dir.display()).map_err(out_err)
}

fn cmd_selftest(args: &SelftestArgs, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let (mut oracle_ok, mut hard_ok, mut grad_ok) = (0, 0, 0);
    for i in 0..args.cases as u64 {
        let seed = args.seed.wrapping_add(i);
        let case = oracle_case(seed);
        let ok = oracle_matches(&case)?;
        oracle_ok += ok as usize;
        if !ok {
            writeln!(stdout, "oracle mismatch: seed {seed}, {:?}", case.settings).map_err(out_err)?;
        }
        let (_, bad) = hard_matches(&hard_case(seed))?;
        hard_ok += (bad == 0) as usize;
        if bad > 0 {
            writeln!(stdout, "hard z-buffer mismatch: seed {seed}, {bad} pixels").map_err(out_err)?;
        }
        let case = gradient_case(seed);
        let check = check_gradients(&case, FD_STEP)?;
        grad_ok += check.passed() as usize;
        if !check.passed() {
            writeln!(stdout, "gradient check failed: seed {seed}, {check:?}").map_err(out_err)?;
        }
    }
    let n = args.cases;
    writeln!(stdout, "oracle equivalence: {oracle_ok}/{n} passed").map_err(out_err)?;
    writeln!(stdout, "hard z-buffer: {hard_ok}/{n} passed").map_err(out_err)?;
    writeln!(stdout, "gradient checks: {grad_ok}/{n} passed").map_err(out_err)?;
    let failed = 3 * n - oracle_ok - hard_ok - grad_ok;
    if failed > 0 {
        return Err(CliError::SelftestFailed(format!("{failed} self-test checks failed")));
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let generator: Generator = args.scene.parse()?;
    if args.points == 0 {
        return Err(CliError::Invalid("--points must be at least 1".into()));
    }
    let settings = RenderSettings::default()
        .with_size(args.res, args.res)
        .with_k(args.k)
        .with_radius(args.radius);
    settings.validate()?;
    let case = BenchCase {
        scene: BenchScene { generator, points: args.points, seed: args.seed },
        settings,
    };
    let baseline = match &args.baseline {
        Some(path) => load_baseline(path).map_err(context(path))?,
        None => None,
    };
    let row = run_case(&case, args.iters.max(1), args.warmup)?;
    let mut report = crate::bench::Report {
        environment: crate::bench::Environment::capture(),
        rows: vec![row],
        compared: false,
    };
    if let Some(base) = &baseline {
        report.compare(base);
    }
    let row = &report.rows[0];
    if args.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(row).expect("row serializes")).map_err(out_err)?;
    } else {
        let env = &report.environment;
        writeln!(stdout, "workload: {}", row.workload).map_err(out_err)?;
        writeln!(stdout, "threads: {}, build: {}", env.threads, env.profile).map_err(out_err)?;
        writeln!(stdout, "forward:  p50 {:.2} ms, p90 {:.2} ms", row.forward_ms.p50, row.forward_ms.p90)
            .map_err(out_err)?;
        writeln!(stdout, "backward: p50 {:.2} ms, p90 {:.2} ms", row.backward_ms.p50, row.backward_ms.p90)
            .map_err(out_err)?;
        writeln!(stdout, "throughput: {:.3} Mpoints/s", row.points_per_sec / 1e6).map_err(out_err)?;
        if let Some(g) = &row.regression {
            writeln!(
                stdout,
                "regression vs baseline: forward x{:.2}, backward x{:.2}",
                g.forward_ratio, g.backward_ratio
            )
            .map_err(out_err)?;
        }
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let run = |stdout: &mut (dyn Write + Send)| match &cli.command {
        Command::Warp(a) => cmd_warp(a, stdout),
        Command::Trajectory(a) => cmd_trajectory(a, stdout),
        Command::Selftest(a) => cmd_selftest(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
    };
    match cli.threads {
        Some(0) => Err(CliError::Invalid("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?
            .install(|| run(stdout)),
        None => run(stdout),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
