//! Forward soft rasterization.
//!
//! Each point is projected and splatted to a disk of radius `r` pixels. A
//! pixel at center distance `d` receives the weight `rho = 1 - d / M`
//! (zero beyond `r`). The `K` nearest contributors of every pixel, ordered by
//! `(depth, point index)`, are blended front to back with opacities
//! `rho^gamma`.
//!
//! The image is processed in square tiles. Points are first binned into every
//! tile their footprint disk touches; each tile then walks its points in
//! global depth order and fills per-pixel contributor lists, stopping at `K`.
//! Tiles write disjoint pixels, so the result does not depend on the number
//! of worker threads.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featuremap::FeatureMap;
use crate::geometry::{Camera, Rigid};
use crate::pointcloud::PointCloud;

/// How sorted contributors are combined into a pixel value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AccumulationMode {
    /// Front-to-back "over" compositing with `rho^gamma` as opacity.
    #[default]
    AlphaComposite,
    /// Plain sum of `rho^gamma * F`.
    WeightedSum,
    /// Weighted sum divided by the total weight.
    NormalizedWeightedSum,
}

impl AccumulationMode {
    pub const ALL: [AccumulationMode; 3] = [
        AccumulationMode::AlphaComposite,
        AccumulationMode::WeightedSum,
        AccumulationMode::NormalizedWeightedSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AccumulationMode::AlphaComposite => "alpha_composite",
            AccumulationMode::WeightedSum => "wsum",
            AccumulationMode::NormalizedWeightedSum => "wsum_norm",
        }
    }
}

impl fmt::Display for AccumulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AccumulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha_composite" | "alpha" | "over" => Ok(AccumulationMode::AlphaComposite),
            "wsum" => Ok(AccumulationMode::WeightedSum),
            "wsum_norm" => Ok(AccumulationMode::NormalizedWeightedSum),
            other => Err(Error::invalid(format!(
                "unknown accumulation mode `{other}` (expected alpha_composite, wsum or wsum_norm)"
            ))),
        }
    }
}

/// Renderer hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderSettings {
    /// Footprint radius `r` in pixels.
    pub radius: f64,
    /// Fall-off denominator `M` in pixels.
    pub falloff: f64,
    /// Maximum number of contributors kept per pixel.
    pub k: usize,
    /// Blending exponent applied to `rho`.
    pub gamma: f64,
    pub width: usize,
    pub height: usize,
    pub mode: AccumulationMode,
    pub tile_size: usize,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            radius: 4.0,
            falloff: 4.0,
            k: 128,
            gamma: 1.0,
            width: 256,
            height: 256,
            mode: AccumulationMode::AlphaComposite,
            tile_size: 16,
        }
    }
}

impl RenderSettings {
    /// Sets the footprint radius and the fall-off to the same value, so the
    /// influence reaches zero exactly at the footprint edge.
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self.falloff = radius;
        self
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_mode(mut self, mode: AccumulationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tile_size(mut self, tile_size: usize) -> Self {
        self.tile_size = tile_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.falloff > 0.0 && self.falloff.is_finite()) {
            return Err(Error::invalid(format!("falloff must be positive, got {}", self.falloff)));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.tile_size == 0 {
            return Err(Error::invalid("tile size must be at least 1"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("output size must be non-zero"));
        }
        Ok(())
    }
}

/// One entry of a pixel's z-buffer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contributor {
    pub index: u32,
    pub rho: f64,
    pub depth: f64,
}

#[inline]
pub(crate) fn depth_order(a: &Contributor, b: &Contributor) -> Ordering {
    a.depth.total_cmp(&b.depth).then(a.index.cmp(&b.index))
}

/// Weight of a splat centered at `center` on the pixel center `pixel`.
#[inline]
pub fn influence(center: (f64, f64), pixel: (f64, f64), radius: f64, falloff: f64) -> f64 {
    let dx = pixel.0 - center.0;
    let dy = pixel.1 - center.1;
    let d = (dx * dx + dy * dy).sqrt();
    if d > radius {
        0.0
    } else {
        (1.0 - d / falloff).clamp(0.0, 1.0)
    }
}

/// Squared-distance rejection that never discards a pixel `influence` could
/// accept.
#[inline]
pub(crate) fn clearly_outside(dx: f64, dy: f64, radius: f64) -> bool {
    dx * dx + dy * dy > radius * radius * (1.0 + 1e-9)
}

/// Opacity `rho^gamma`, exact for the common exponents 0 and 1.
#[inline]
pub(crate) fn opacity(rho: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        rho
    } else if gamma == 0.0 {
        1.0
    } else {
        powf(rho, gamma)
    }
}

#[inline(never)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}

/// Keeps the `k` smallest contributions by `(depth, index)` in ascending
/// order. Input order does not affect the result.
pub fn select_k(list: &mut Vec<Contributor>, k: usize) {
    if k == 0 {
        list.clear();
        return;
    }
    if list.is_sorted_by(|a, b| depth_order(a, b) != Ordering::Greater) {
        list.truncate(k);
        return;
    }
    if list.len() > k {
        list.select_nth_unstable_by(k - 1, depth_order);
        list.truncate(k);
    }
    list.sort_unstable_by(depth_order);
}

/// Blends sorted contributors into `out` (length `channels`), returning the
/// accumulated opacity and the composited depth.
///
/// `features` is the cloud's row-major `N x channels` feature array.
pub fn composite(
    contributors: &[Contributor],
    features: &[f64],
    channels: usize,
    gamma: f64,
    mode: AccumulationMode,
    out: &mut [f64],
) -> (f64, f64) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut depth = 0.0;
    let mut transmittance = 1.0;
    match mode {
        AccumulationMode::AlphaComposite => {
            for c in contributors {
                let a = opacity(c.rho, gamma);
                let w = a * transmittance;
                let f = &features[c.index as usize * channels..][..channels];
                for (o, fv) in out.iter_mut().zip(f) {
                    *o += w * fv;
                }
                depth += w * c.depth;
                transmittance *= 1.0 - a;
                if transmittance == 0.0 {
                    break;
                }
            }
        }
        AccumulationMode::WeightedSum | AccumulationMode::NormalizedWeightedSum => {
            let mut total = 0.0;
            for c in contributors {
                let a = opacity(c.rho, gamma);
                let f = &features[c.index as usize * channels..][..channels];
                for (o, fv) in out.iter_mut().zip(f) {
                    *o += a * fv;
                }
                depth += a * c.depth;
                total += a;
                transmittance *= 1.0 - a;
            }
            if mode == AccumulationMode::NormalizedWeightedSum && total > 0.0 {
                out.iter_mut().for_each(|v| *v /= total);
                depth /= total;
            }
        }
    }
    (1.0 - transmittance, depth)
}

/// A point after transformation and projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splat {
    pub index: u32,
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

/// Transforms and projects every point, dropping those with `z <= near`.
/// Splats are returned in ascending point-index order.
pub fn project_points(cloud: &PointCloud, pose: &Rigid, camera: &Camera) -> Vec<Splat> {
    cloud
        .positions()
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let q = pose.transform(p);
            if !(q.z > camera.near) {
                return None;
            }
            let proj = camera.project(&q)?;
            Some(Splat { index: i as u32, u: proj.u, v: proj.v, depth: proj.z })
        })
        .collect()
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl TileRect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    /// Whether the closed rectangle `[x0, x1] x [y0, y1]` intersects the
    /// disk of radius `r` around `(u, v)`.
    #[inline]
    pub fn touches_disk(&self, u: f64, v: f64, r: f64) -> bool {
        let qx = u.clamp(self.x0 as f64, self.x1 as f64);
        let qy = v.clamp(self.y0 as f64, self.y1 as f64);
        let dx = qx - u;
        let dy = qy - v;
        (dx * dx + dy * dy).sqrt() <= r
    }
}

/// Regular partition of the output image into square tiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileGrid {
    pub width: usize,
    pub height: usize,
    pub tile_size: usize,
    pub tiles_x: usize,
    pub tiles_y: usize,
}

impl TileGrid {
    pub fn new(width: usize, height: usize, tile_size: usize) -> Self {
        assert!(tile_size > 0);
        Self {
            width,
            height,
            tile_size,
            tiles_x: width.div_ceil(tile_size),
            tiles_y: height.div_ceil(tile_size),
        }
    }

    pub fn len(&self) -> usize {
        self.tiles_x * self.tiles_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rect(&self, tile: usize) -> TileRect {
        let (tx, ty) = (tile % self.tiles_x, tile / self.tiles_x);
        let x0 = tx * self.tile_size;
        let y0 = ty * self.tile_size;
        TileRect {
            x0,
            y0,
            x1: (x0 + self.tile_size).min(self.width),
            y1: (y0 + self.tile_size).min(self.height),
        }
    }

    #[inline]
    pub fn tile_of(&self, x: usize, y: usize) -> usize {
        (y / self.tile_size) * self.tiles_x + x / self.tile_size
    }
}

/// Inclusive range of cell indices `[lo, hi]` covering `[a, b]` with one
/// cell of slack on each side, clipped to `[0, count)`.
#[inline]
fn cell_span(a: f64, b: f64, cell: f64, count: usize) -> Option<(usize, usize)> {
    let max = count as f64 - 1.0;
    let lo = ((a / cell).floor() - 1.0).max(0.0);
    let hi = ((b / cell).floor() + 1.0).min(max);
    if lo > hi {
        None
    } else {
        Some((lo as usize, hi as usize))
    }
}

/// Assigns splats to the tiles their footprint disk intersects.
///
/// Returns one list per tile holding positions into `splats`, ascending.
/// Since [`project_points`] emits splats in point-index order, each list is
/// also sorted by point index.
pub fn bin_points(splats: &[Splat], grid: &TileGrid, radius: f64) -> Vec<Vec<u32>> {
    let mut bins = vec![Vec::new(); grid.len()];
    let ts = grid.tile_size as f64;
    for (slot, s) in splats.iter().enumerate() {
        let Some((tx0, tx1)) = cell_span(s.u - radius, s.u + radius, ts, grid.tiles_x) else {
            continue;
        };
        let Some((ty0, ty1)) = cell_span(s.v - radius, s.v + radius, ts, grid.tiles_y) else {
            continue;
        };
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                let t = ty * grid.tiles_x + tx;
                if grid.rect(t).touches_disk(s.u, s.v, radius) {
                    bins[t].push(slot as u32);
                }
            }
        }
    }
    bins
}

/// Per-tile z-buffers in CSR layout, pixels row-major within the tile.
#[derive(Clone, Debug, PartialEq)]
pub struct TileContributors {
    pub rect: TileRect,
    offsets: Vec<usize>,
    entries: Vec<Contributor>,
}

impl TileContributors {
    #[inline]
    pub fn pixel(&self, local: usize) -> &[Contributor] {
        &self.entries[self.offsets[local]..self.offsets[local + 1]]
    }

    pub fn entries(&self) -> &[Contributor] {
        &self.entries
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

/// Contributor lists for every pixel, kept for the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ContributorBuffers {
    grid: TileGrid,
    tiles: Vec<TileContributors>,
}

impl ContributorBuffers {
    pub fn grid(&self) -> &TileGrid {
        &self.grid
    }

    pub fn tiles(&self) -> &[TileContributors] {
        &self.tiles
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[Contributor] {
        let tile = &self.tiles[self.grid.tile_of(x, y)];
        let local = (y - tile.rect.y0) * tile.rect.width() + (x - tile.rect.x0);
        tile.pixel(local)
    }

    pub fn total(&self) -> usize {
        self.tiles.iter().map(|t| t.entries.len()).sum()
    }
}

/// Result of a forward render.
#[derive(Clone, Debug)]
pub struct RenderOutput {
    width: usize,
    height: usize,
    channels: usize,
    features: Vec<f64>,
    alpha: Vec<f64>,
    depth: Vec<f64>,
    buffers: Option<ContributorBuffers>,
}

impl RenderOutput {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Row-major `H x W x C` composited features.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.features[i..i + self.channels]
    }

    #[inline]
    pub fn alpha_at(&self, x: usize, y: usize) -> f64 {
        self.alpha[y * self.width + x]
    }

    pub fn buffers(&self) -> Option<&ContributorBuffers> {
        self.buffers.as_ref()
    }

    /// Contributors of pixel `(x, y)`, or `None` if the buffers were dropped.
    pub fn contributors(&self, x: usize, y: usize) -> Option<&[Contributor]> {
        self.buffers.as_ref().map(|b| b.pixel(x, y))
    }

    /// Releases the contributor buffers once no backward pass is needed.
    pub fn drop_buffers(&mut self) {
        self.buffers = None;
    }

    pub fn feature_map(&self) -> FeatureMap {
        FeatureMap::new(self.width, self.height, self.channels, self.features.clone())
            .expect("render output has consistent shape")
    }

    pub fn alpha_map(&self) -> FeatureMap {
        FeatureMap::new(self.width, self.height, 1, self.alpha.clone())
            .expect("render output has consistent shape")
    }

    pub fn depth_map(&self) -> FeatureMap {
        FeatureMap::new(self.width, self.height, 1, self.depth.clone())
            .expect("render output has consistent shape")
    }

    /// Bit-for-bit equality of images and, when both are present, of every
    /// pixel's contributor list. Tile layout is ignored.
    pub fn identical_to(&self, other: &RenderOutput) -> bool {
        if (self.width, self.height, self.channels) != (other.width, other.height, other.channels) {
            return false;
        }
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        if !same(&self.features, &other.features)
            || !same(&self.alpha, &other.alpha)
            || !same(&self.depth, &other.depth)
        {
            return false;
        }
        match (&self.buffers, &other.buffers) {
            (Some(a), Some(b)) => (0..self.height).all(|y| {
                (0..self.width).all(|x| {
                    let (p, q) = (a.pixel(x, y), b.pixel(x, y));
                    p.len() == q.len()
                        && p.iter().zip(q).all(|(c, d)| {
                            c.index == d.index
                                && c.rho.to_bits() == d.rho.to_bits()
                                && c.depth.to_bits() == d.depth.to_bits()
                        })
                })
            }),
            _ => true,
        }
    }

    /// Assembles an output from row-major per-pixel contributor lists by
    /// compositing each one. Used by the reference renderers.
    pub(crate) fn from_pixel_lists(
        width: usize,
        height: usize,
        cloud: &PointCloud,
        settings: &RenderSettings,
        lists: Vec<Vec<Contributor>>,
    ) -> RenderOutput {
        let channels = cloud.channels();
        let mut features = vec![0.0; width * height * channels];
        let mut alpha = vec![0.0; width * height];
        let mut depth = vec![0.0; width * height];
        let mut offsets = Vec::with_capacity(width * height + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for (p, list) in lists.iter().enumerate() {
            let (a, d) = composite(
                list,
                cloud.features(),
                channels,
                settings.gamma,
                settings.mode,
                &mut features[p * channels..(p + 1) * channels],
            );
            alpha[p] = a;
            depth[p] = d;
            entries.extend_from_slice(list);
            offsets.push(entries.len());
        }
        let side = width.max(height);
        let grid = TileGrid::new(width, height, side);
        let tile = TileContributors { rect: grid.rect(0), offsets, entries };
        RenderOutput {
            width,
            height,
            channels,
            features,
            alpha,
            depth,
            buffers: Some(ContributorBuffers { grid, tiles: vec![tile] }),
        }
    }
}

pub(crate) fn check_inputs(cloud: &PointCloud, camera: &Camera, settings: &RenderSettings) -> Result<()> {
    settings.validate()?;
    camera.validate()?;
    if camera.width != settings.width || camera.height != settings.height {
        return Err(Error::shape(format!(
            "camera is {}x{} but settings ask for {}x{}",
            camera.width, camera.height, settings.width, settings.height
        )));
    }
    if cloud.len() > u32::MAX as usize {
        return Err(Error::invalid("point cloud too large"));
    }
    Ok(())
}

struct TileResult {
    features: Vec<f64>,
    alpha: Vec<f64>,
    depth: Vec<f64>,
    contributors: TileContributors,
}

fn render_tile(
    rect: TileRect,
    slots: &[u32],
    splats: &[Splat],
    rank: &[u32],
    cloud: &PointCloud,
    settings: &RenderSettings,
) -> TileResult {
    let (tw, th) = (rect.width(), rect.height());
    let channels = cloud.channels();
    let (r, m, k) = (settings.radius, settings.falloff, settings.k);

    let mut order = slots.to_vec();
    order.sort_unstable_by_key(|&s| rank[s as usize]);

    // Splats arrive in depth order, so each pixel fills a fixed-stride slot
    // run that is already sorted and stops at K.
    let stride = k.min(order.len());
    let empty = Contributor { index: 0, rho: 0.0, depth: 0.0 };
    let mut entries = vec![empty; tw * th * stride];
    let mut counts = vec![0usize; tw * th];
    let (x0f, y0f) = (rect.x0 as f64, rect.y0 as f64);
    for &slot in &order {
        let s = splats[slot as usize];
        // Pixel centers sit at i + 0.5; span is local to the tile.
        let Some((lx0, lx1)) = cell_span(s.u - r - x0f, s.u + r - x0f, 1.0, tw) else {
            continue;
        };
        let Some((ly0, ly1)) = cell_span(s.v - r - y0f, s.v + r - y0f, 1.0, th) else {
            continue;
        };
        for ly in ly0..=ly1 {
            let py = (rect.y0 + ly) as f64 + 0.5;
            for lx in lx0..=lx1 {
                let p = ly * tw + lx;
                let n = counts[p];
                if n >= stride {
                    continue;
                }
                let px = (rect.x0 + lx) as f64 + 0.5;
                if clearly_outside(px - s.u, py - s.v, r) {
                    continue;
                }
                let rho = influence((s.u, s.v), (px, py), r, m);
                if rho > 0.0 {
                    entries[p * stride + n] = Contributor { index: s.index, rho, depth: s.depth };
                    counts[p] = n + 1;
                }
            }
        }
    }

    let mut features = vec![0.0; tw * th * channels];
    let mut alpha = vec![0.0; tw * th];
    let mut depth = vec![0.0; tw * th];
    let mut offsets = Vec::with_capacity(tw * th + 1);
    offsets.push(0);
    let mut end = 0;
    for (p, &n) in counts.iter().enumerate() {
        entries.copy_within(p * stride..p * stride + n, end);
        let (a, d) = composite(
            &entries[end..end + n],
            cloud.features(),
            channels,
            settings.gamma,
            settings.mode,
            &mut features[p * channels..(p + 1) * channels],
        );
        alpha[p] = a;
        depth[p] = d;
        end += n;
        offsets.push(end);
    }
    entries.truncate(end);
    entries.shrink_to_fit();
    TileResult { features, alpha, depth, contributors: TileContributors { rect, offsets, entries } }
}

/// Renders `cloud` seen through `camera` placed at `pose`.
///
/// `pose` maps cloud coordinates into the camera frame. The camera's
/// resolution must match `settings`.
pub fn render(
    cloud: &PointCloud,
    pose: &Rigid,
    camera: &Camera,
    settings: &RenderSettings,
) -> Result<RenderOutput> {
    check_inputs(cloud, camera, settings)?;
    let (width, height, channels) = (settings.width, settings.height, cloud.channels());

    let splats = project_points(cloud, pose, camera);
    let grid = TileGrid::new(width, height, settings.tile_size);
    let bins = bin_points(&splats, &grid, settings.radius);

    let mut by_depth: Vec<u32> = (0..splats.len() as u32).collect();
    by_depth.par_sort_unstable_by(|&a, &b| {
        let (sa, sb) = (&splats[a as usize], &splats[b as usize]);
        sa.depth.total_cmp(&sb.depth).then(sa.index.cmp(&sb.index))
    });
    let mut rank = vec![0u32; splats.len()];
    for (r, &slot) in by_depth.iter().enumerate() {
        rank[slot as usize] = r as u32;
    }

    let tiles: Vec<TileResult> = bins
        .par_iter()
        .enumerate()
        .map(|(t, slots)| render_tile(grid.rect(t), slots, &splats, &rank, cloud, settings))
        .collect();

    let mut features = vec![0.0; width * height * channels];
    let mut alpha = vec![0.0; width * height];
    let mut depth = vec![0.0; width * height];
    let mut buffers = Vec::with_capacity(tiles.len());
    for tile in tiles {
        let rect = tile.contributors.rect;
        let tw = rect.width();
        for ly in 0..rect.height() {
            let row = (rect.y0 + ly) * width + rect.x0;
            alpha[row..row + tw].copy_from_slice(&tile.alpha[ly * tw..(ly + 1) * tw]);
            depth[row..row + tw].copy_from_slice(&tile.depth[ly * tw..(ly + 1) * tw]);
            features[row * channels..(row + tw) * channels]
                .copy_from_slice(&tile.features[ly * tw * channels..(ly + 1) * tw * channels]);
        }
        buffers.push(tile.contributors);
    }

    Ok(RenderOutput {
        width,
        height,
        channels,
        features,
        alpha,
        depth,
        buffers: Some(ContributorBuffers { grid, tiles: buffers }),
    })
}
