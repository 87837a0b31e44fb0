//! Slow reference renderers used as correctness oracles.
//!
//! Both walk every point for every pixel on a single thread. They share the
//! `influence` and `composite` kernels with the tiled renderer but none of
//! its binning or selection code.

use crate::error::Result;
use crate::geometry::{Camera, Rigid};
use crate::pointcloud::PointCloud;
use crate::rasterizer::{
    check_inputs, clearly_outside, influence, Contributor, RenderOutput, RenderSettings,
};

struct Projected {
    index: u32,
    u: f64,
    v: f64,
    z: f64,
}

fn project_all(cloud: &PointCloud, pose: &Rigid, camera: &Camera) -> Vec<Projected> {
    let mut out = Vec::new();
    for (i, p) in cloud.positions().iter().enumerate() {
        let q = pose.transform(p);
        if q.z <= camera.near {
            continue;
        }
        if let Some(proj) = camera.project(&q) {
            out.push(Projected { index: i as u32, u: proj.u, v: proj.v, z: proj.z });
        }
    }
    out
}

/// Every covering point of every pixel, sorted by depth then index and
/// truncated to `K`, then composited.
pub fn render_bruteforce(
    cloud: &PointCloud,
    pose: &Rigid,
    camera: &Camera,
    settings: &RenderSettings,
) -> Result<RenderOutput> {
    check_inputs(cloud, camera, settings)?;
    let (w, h) = (settings.width, settings.height);
    let points = project_all(cloud, pose, camera);
    let mut lists = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = Camera::pixel_center(x, y);
            let mut list = Vec::new();
            for p in &points {
                if clearly_outside(px - p.u, py - p.v, settings.radius) {
                    continue;
                }
                let rho = influence((p.u, p.v), (px, py), settings.radius, settings.falloff);
                if rho > 0.0 {
                    list.push(Contributor { index: p.index, rho, depth: p.z });
                }
            }
            list.sort_by(|a, b| {
                a.depth
                    .partial_cmp(&b.depth)
                    .expect("depths are finite")
                    .then(a.index.cmp(&b.index))
            });
            list.truncate(settings.k);
            lists.push(list);
        }
    }
    Ok(RenderOutput::from_pixel_lists(w, h, cloud, settings, lists))
}

/// Classic hard z-buffer: each pixel takes the feature of the single nearest
/// point whose footprint covers it, ties going to the lower index.
pub fn render_hard(
    cloud: &PointCloud,
    pose: &Rigid,
    camera: &Camera,
    settings: &RenderSettings,
) -> Result<RenderOutput> {
    check_inputs(cloud, camera, settings)?;
    let (w, h) = (settings.width, settings.height);
    let points = project_all(cloud, pose, camera);
    // (depth, index, rho) of the winner at each pixel.
    let mut zbuf: Vec<Option<Contributor>> = vec![None; w * h];
    for p in &points {
        let x_lo = (p.u - settings.radius - 1.0).floor().max(0.0) as usize;
        let y_lo = (p.v - settings.radius - 1.0).floor().max(0.0) as usize;
        let x_hi = ((p.u + settings.radius + 1.0).ceil().max(0.0) as usize).min(w);
        let y_hi = ((p.v + settings.radius + 1.0).ceil().max(0.0) as usize).min(h);
        for y in y_lo..y_hi {
            for x in x_lo..x_hi {
                let (px, py) = Camera::pixel_center(x, y);
                let rho = influence((p.u, p.v), (px, py), settings.radius, settings.falloff);
                if rho <= 0.0 {
                    continue;
                }
                let slot = &mut zbuf[y * w + x];
                let closer = match slot {
                    None => true,
                    Some(cur) => p.z < cur.depth || (p.z == cur.depth && p.index < cur.index),
                };
                if closer {
                    *slot = Some(Contributor { index: p.index, rho, depth: p.z });
                }
            }
        }
    }
    let lists = zbuf.into_iter().map(|c| c.into_iter().collect()).collect();
    let hard = RenderSettings { gamma: 0.0, k: 1, ..*settings };
    Ok(RenderOutput::from_pixel_lists(w, h, cloud, &hard, lists))
}
