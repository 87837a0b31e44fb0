//! Gradients of a scalar loss through the renderer.
//!
//! Given `dL/dF̄` for the rendered feature image, [`backward`] returns
//! `dL/dF` and `dL/dp` for every point of the cloud. The z-buffer contents
//! recorded by the forward pass (which points reach each pixel, and in what
//! order) are held fixed; gradients flow through the blending weights of
//! every recorded contributor, not only the front one.
//!
//! Subderivative conventions for the piecewise-linear influence:
//! at the footprint edge the interior slope `-1/M` is used, and at zero
//! distance (where the direction is undefined) the gradient is zero.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Camera, Rigid};
use crate::pointcloud::PointCloud;
use crate::rasterizer::{
    opacity, powf, render, AccumulationMode, Contributor, RenderOutput, RenderSettings,
};

/// Per-point gradients, aligned with the input cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderGradients {
    features: Vec<f64>,
    positions: Vec<Vector3<f64>>,
    channels: usize,
}

impl RenderGradients {
    pub fn zeros(points: usize, channels: usize) -> Self {
        Self {
            features: vec![0.0; points * channels],
            positions: vec![Vector3::zeros(); points],
            channels,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Row-major `N x C` feature gradients.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.channels..(i + 1) * self.channels]
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    /// Bit-for-bit equality.
    pub fn identical_to(&self, other: &RenderGradients) -> bool {
        self.channels == other.channels
            && self.features.len() == other.features.len()
            && self.positions.len() == other.positions.len()
            && self.features.iter().zip(&other.features).all(|(a, b)| a.to_bits() == b.to_bits())
            && self
                .positions
                .iter()
                .zip(&other.positions)
                .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()))
    }
}

#[inline]
fn opacity_slope(rho: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        1.0
    } else if gamma == 0.0 {
        0.0
    } else {
        gamma * powf(rho, gamma - 1.0)
    }
}

#[derive(Clone, Copy)]
struct ScreenPoint {
    u: f64,
    v: f64,
    du: [f64; 3],
    dv: [f64; 3],
}

/// Per-contributor adjoint: blending weight and `dL/d(u, v)` of the splat
/// center.
#[derive(Clone, Copy, Default)]
struct SlotAdjoint {
    weight: f64,
    du: f64,
    dv: f64,
}

/// Per-tile buffers reused across pixels.
#[derive(Default)]
struct Scratch {
    d_opacity: Vec<f64>,
    trans: Vec<f64>,
    gs: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn pixel_adjoints(
    list: &[Contributor],
    pixel: (f64, f64),
    g: &[f64],
    features: &[f64],
    channels: usize,
    settings: &RenderSettings,
    screen: &[Option<ScreenPoint>],
    scratch: &mut Scratch,
    out: &mut [SlotAdjoint],
) {
    let gamma = settings.gamma;
    let dot = |c: &Contributor| -> f64 {
        let f = &features[c.index as usize * channels..][..channels];
        f.iter().zip(g).map(|(a, b)| a * b).sum()
    };
    // dL/d(opacity) and the blending weight of each contributor.
    let Scratch { d_opacity, trans, gs } = scratch;
    d_opacity.clear();
    d_opacity.resize(list.len(), 0.0);
    match settings.mode {
        AccumulationMode::AlphaComposite => {
            trans.clear();
            let mut t = 1.0;
            for c in list {
                trans.push(t);
                t *= 1.0 - opacity(c.rho, gamma);
            }
            let mut suffix = 0.0;
            for i in (0..list.len()).rev() {
                let a = opacity(list[i].rho, gamma);
                let gi = dot(&list[i]);
                d_opacity[i] = trans[i] * (gi - suffix);
                out[i].weight = a * trans[i];
                suffix = a * gi + (1.0 - a) * suffix;
            }
        }
        AccumulationMode::WeightedSum => {
            for (i, c) in list.iter().enumerate() {
                out[i].weight = opacity(c.rho, gamma);
                d_opacity[i] = dot(c);
            }
        }
        AccumulationMode::NormalizedWeightedSum => {
            let total: f64 = list.iter().map(|c| opacity(c.rho, gamma)).sum();
            if total > 0.0 {
                gs.clear();
                gs.extend(list.iter().map(dot));
                let mean: f64 = list
                    .iter()
                    .zip(gs.iter())
                    .map(|(c, gi)| opacity(c.rho, gamma) * gi)
                    .sum::<f64>()
                    / total;
                for (i, c) in list.iter().enumerate() {
                    out[i].weight = opacity(c.rho, gamma) / total;
                    d_opacity[i] = (gs[i] - mean) / total;
                }
            }
        }
    }
    for (i, c) in list.iter().enumerate() {
        let d_rho = d_opacity[i] * opacity_slope(c.rho, gamma);
        let Some(sp) = screen[c.index as usize] else { continue };
        let dx = pixel.0 - sp.u;
        let dy = pixel.1 - sp.v;
        let d = (dx * dx + dy * dy).sqrt();
        // rho = 1 - d / M; the 1-clamp only saturates at d = 0.
        if d > 0.0 && d_rho != 0.0 {
            let s = d_rho / (settings.falloff * d);
            out[i].du = s * dx;
            out[i].dv = s * dy;
        }
    }
}

/// Back-propagates `grad_image` (`dL/dF̄`, row-major `H x W x C`) through a
/// render produced by [`render`](crate::rasterizer::render) on the same
/// inputs.
pub fn backward(
    cloud: &PointCloud,
    pose: &Rigid,
    camera: &Camera,
    settings: &RenderSettings,
    output: &RenderOutput,
    grad_image: &[f64],
) -> Result<RenderGradients> {
    let buffers = output
        .buffers()
        .ok_or_else(|| Error::invalid("render output has no contributor buffers"))?;
    let (w, h, channels) = (output.width(), output.height(), cloud.channels());
    if (w, h) != (settings.width, settings.height) || output.channels() != channels {
        return Err(Error::shape("render output does not match the cloud and settings"));
    }
    if grad_image.len() != w * h * channels {
        return Err(Error::shape(format!(
            "gradient image needs {} values, got {}",
            w * h * channels,
            grad_image.len()
        )));
    }
    let n = cloud.len();

    let screen: Vec<Option<ScreenPoint>> = cloud
        .positions()
        .par_iter()
        .map(|p| {
            let q = pose.transform(p);
            if !(q.z > camera.near) {
                return None;
            }
            let proj = camera.project(&q)?;
            let [du, dv] = camera.projection_jacobian(&q);
            Some(ScreenPoint { u: proj.u, v: proj.v, du, dv })
        })
        .collect();

    let features = cloud.features();
    let tile_adjoints: Vec<Vec<SlotAdjoint>> = buffers
        .tiles()
        .par_iter()
        .map(|tile| {
            let rect = tile.rect;
            let mut adj = vec![SlotAdjoint::default(); tile.entries().len()];
            let mut scratch = Scratch::default();
            for ly in 0..rect.height() {
                for lx in 0..rect.width() {
                    let local = ly * rect.width() + lx;
                    let (x, y) = (rect.x0 + lx, rect.y0 + ly);
                    let list = tile.pixel(local);
                    if list.is_empty() {
                        continue;
                    }
                    let g = &grad_image[(y * w + x) * channels..][..channels];
                    let range = tile.offsets()[local]..tile.offsets()[local + 1];
                    pixel_adjoints(
                        list,
                        Camera::pixel_center(x, y),
                        g,
                        features,
                        channels,
                        settings,
                        &screen,
                        &mut scratch,
                        &mut adj[range],
                    );
                }
            }
            adj
        })
        .collect();

    if let Some(bad) = buffers
        .tiles()
        .iter()
        .flat_map(|t| t.entries())
        .find(|c| c.index as usize >= n)
    {
        return Err(Error::shape(format!("contributor index {} out of range", bad.index)));
    }

    // Ordered reduction, pixels row-major, so the sums do not depend on
    // scheduling.
    let mut d_features = vec![0.0; n * channels];
    let mut d_screen = vec![[0.0f64; 2]; n];
    let grid = buffers.grid();
    for y in 0..h {
        for x in 0..w {
            let t = grid.tile_of(x, y);
            let tile = &buffers.tiles()[t];
            let rect = tile.rect;
            let local = (y - rect.y0) * rect.width() + (x - rect.x0);
            let range = tile.offsets()[local]..tile.offsets()[local + 1];
            let g = &grad_image[(y * w + x) * channels..][..channels];
            for (c, a) in tile.entries()[range.clone()].iter().zip(&tile_adjoints[t][range]) {
                let i = c.index as usize;
                for (df, gv) in d_features[i * channels..(i + 1) * channels].iter_mut().zip(g) {
                    *df += a.weight * gv;
                }
                d_screen[i][0] += a.du;
                d_screen[i][1] += a.dv;
            }
        }
    }

    let rt = pose.rotation().transpose();
    let positions = screen
        .par_iter()
        .zip(&d_screen)
        .map(|(sp, d)| match sp {
            Some(sp) if d[0] != 0.0 || d[1] != 0.0 => {
                let cam = Vector3::new(
                    sp.du[0] * d[0] + sp.dv[0] * d[1],
                    sp.du[1] * d[0] + sp.dv[1] * d[1],
                    sp.du[2] * d[0] + sp.dv[2] * d[1],
                );
                rt * cam
            }
            _ => Vector3::zeros(),
        })
        .collect();

    Ok(RenderGradients { features: d_features, positions, channels })
}

/// Pixels closer than this to a footprint edge or a splat center make a
/// position finite difference unreliable.
pub const BOUNDARY_MARGIN_PX: f64 = 1e-2;

/// Central finite differences, with position coordinates whose perturbation
/// crosses a discontinuity flagged in `boundary`.
#[derive(Clone, Debug)]
pub struct FiniteDifference {
    pub gradients: RenderGradients,
    /// `boundary[i][axis]` is true when moving point `i` along `axis` by `±h`
    /// changes some pixel's contributor list, or brings its splat within
    /// [`BOUNDARY_MARGIN_PX`] of a footprint edge or pixel center.
    pub boundary: Vec<[bool; 3]>,
}

fn same_structure(a: &RenderOutput, b: &RenderOutput) -> bool {
    let (Some(ba), Some(bb)) = (a.buffers(), b.buffers()) else {
        return false;
    };
    (0..a.height()).all(|y| {
        (0..a.width()).all(|x| {
            let (p, q) = (ba.pixel(x, y), bb.pixel(x, y));
            p.len() == q.len() && p.iter().zip(q).all(|(c, d)| c.index == d.index)
        })
    })
}

fn near_kink(center: (f64, f64), settings: &RenderSettings) -> bool {
    let (w, h) = (settings.width as f64, settings.height as f64);
    let reach = settings.radius + 1.0;
    let x_lo = (center.0 - reach).floor().max(0.0);
    let x_hi = (center.0 + reach).ceil().min(w - 1.0);
    let y_lo = (center.1 - reach).floor().max(0.0);
    let y_hi = (center.1 + reach).ceil().min(h - 1.0);
    if x_lo > x_hi || y_lo > y_hi {
        return false;
    }
    for y in y_lo as usize..=y_hi as usize {
        for x in x_lo as usize..=x_hi as usize {
            let (px, py) = Camera::pixel_center(x, y);
            let d = ((px - center.0).powi(2) + (py - center.1).powi(2)).sqrt();
            let edge = settings.radius.min(settings.falloff);
            if d < BOUNDARY_MARGIN_PX
                || (d - settings.radius).abs() < BOUNDARY_MARGIN_PX
                || (d - edge).abs() < BOUNDARY_MARGIN_PX
            {
                return true;
            }
        }
    }
    false
}

/// Central differences `(L(x + h) - L(x - h)) / 2h` of `loss ∘ render` for
/// every feature value and position coordinate.
pub fn finite_difference<L>(
    cloud: &PointCloud,
    pose: &Rigid,
    camera: &Camera,
    settings: &RenderSettings,
    loss: L,
    h: f64,
) -> Result<FiniteDifference>
where
    L: Fn(&RenderOutput) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let base = render(cloud, pose, camera, settings)?;
    let (n, channels) = (cloud.len(), cloud.channels());
    let mut grads = RenderGradients::zeros(n, channels);
    let mut boundary = vec![[false; 3]; n];
    let mut work = cloud.clone();

    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for c in 0..channels {
            let k = i * channels + c;
            let orig = work.features()[k];
            work.features_mut()[k] = orig + h;
            let plus = loss(&render(&work, pose, camera, settings)?);
            work.features_mut()[k] = orig - h;
            let minus = loss(&render(&work, pose, camera, settings)?);
            work.features_mut()[k] = orig;
            grads.features[k] = (plus - minus) / (2.0 * h);
        }
        for axis in 0..3 {
            let orig = work.positions()[i][axis];
            let mut flagged = false;
            let mut eval = |value: f64, work: &mut PointCloud| -> Result<f64> {
                work.positions_mut()[i][axis] = value;
                let out = render(work, pose, camera, settings)?;
                if !same_structure(&base, &out) {
                    flagged = true;
                }
                let q = pose.transform(&work.positions()[i]);
                if q.z > camera.near {
                    if let Some(p) = camera.project(&q) {
                        flagged |= near_kink((p.u, p.v), settings);
                    }
                }
                Ok(loss(&out))
            };
            let plus = eval(orig + h, &mut work)?;
            let minus = eval(orig - h, &mut work)?;
            work.positions_mut()[i][axis] = orig;
            let q = pose.transform(&work.positions()[i]);
            if let Some(p) = camera.project(&q) {
                flagged |= q.z > camera.near && near_kink((p.u, p.v), settings);
            }
            grads.positions[i][axis] = (plus - minus) / (2.0 * h);
            boundary[i][axis] = flagged;
        }
    }
    Ok(FiniteDifference { gradients: grads, boundary })
}

/// `max |a - b| / max(max |b|, floor)` over paired slices.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(floor, f64::max);
    num / den
}
