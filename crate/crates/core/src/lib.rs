//! Differentiable soft splatting of feature point clouds.
//!
//! A [`PointCloud`] of positions and feature vectors is transformed into a
//! camera, projected, splatted to small disks and blended through a soft
//! z-buffer of the `K` nearest points per pixel. [`backward`] returns
//! analytic gradients with respect to every point's features and position.
//!
//! ```
//! use softsplat::{render, Camera, PointCloud, RenderSettings, Rigid};
//!
//! let camera = Camera::with_fov(64, 64, 60.0, 0.1, 10.0).unwrap();
//! // A point lying exactly on the center of pixel (20, 12).
//! let p = camera.unproject(20.5, 12.5, 2.0);
//! let cloud = PointCloud::new(vec![p], vec![1.0, 0.5, 0.0], 3).unwrap();
//! let settings = RenderSettings::default().with_size(64, 64);
//! let out = render(&cloud, &Rigid::identity(), &camera, &settings).unwrap();
//! let px = out.pixel(20, 12);
//! assert!((px[0] - 1.0).abs() < 1e-12 && (px[1] - 0.5).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backward;
pub mod bench;
pub mod checks;
pub mod cli;
pub mod error;
pub mod featuremap;
pub mod geometry;
pub mod io;
pub mod pointcloud;
pub mod rasterizer;
pub mod reference;
pub mod scene;
pub mod trajectory;

pub use backward::{backward, finite_difference, FiniteDifference, RenderGradients};
pub use error::{Error, Result};
pub use featuremap::FeatureMap;
pub use geometry::{Camera, Projection, Rigid};
pub use pointcloud::{build_cloud, normalize_depth, DepthRange, PointCloud};
pub use rasterizer::{
    composite, influence, render, select_k, AccumulationMode, Contributor, RenderOutput,
    RenderSettings,
};
pub use reference::{render_bruteforce, render_hard};
