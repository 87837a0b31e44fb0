//! Pinhole cameras and rigid transforms.
//!
//! Conventions used throughout the crate:
//!
//! * right-handed camera frame, the camera looks down `+z`, `x` points right
//!   and `y` points down in the image;
//! * pixel `(i, j)` covers `[i, i + 1) x [j, j + 1)` and has its center at
//!   `(i + 0.5, j + 0.5)`;
//! * depth is camera-space `z`, not distance along the ray;
//! * a pose maps points into the camera frame: `x_cam = R * p + t`.

use nalgebra::{Matrix3, Rotation3, Unit, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-6;

/// A rigid-body motion `p -> R p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rigid {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for Rigid {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rigid {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Builds a pose from a rotation matrix, rejecting anything that is not a
    /// proper rotation to within `1e-6`.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !is_rotation(&rotation, ORTHONORMAL_TOL) {
            return Err(Error::invalid("rotation matrix is not orthonormal with det +1"));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("translation must be finite"));
        }
        Ok(Self { rotation, translation })
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self { rotation: Matrix3::identity(), translation }
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule), followed by
    /// `translation`. A zero axis yields the identity rotation.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        let rotation = match Unit::try_new(axis, 1e-12) {
            Some(axis) => *Rotation3::from_axis_angle(&axis, angle).matrix(),
            None => Matrix3::identity(),
        };
        Self { rotation, translation }
    }

    /// Rotation from a quaternion given as `[w, x, y, z]`; normalized first.
    pub fn from_quaternion(wxyz: [f64; 4], translation: Vector3<f64>) -> Result<Self> {
        let q = nalgebra::Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        if !(q.norm() > 1e-12) {
            return Err(Error::invalid("quaternion has zero norm"));
        }
        let unit = UnitQuaternion::from_quaternion(q);
        Ok(Self { rotation: *unit.to_rotation_matrix().matrix(), translation })
    }

    /// Like [`Rigid::new`] but projects a nearly-orthonormal matrix (within
    /// `tol` elementwise of `RᵀR = I`) onto the closest rotation.
    pub fn orthonormalized(rotation: Matrix3<f64>, translation: Vector3<f64>, tol: f64) -> Result<Self> {
        if !rotation.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("rotation must be finite"));
        }
        if !is_rotation(&rotation, tol) {
            return Err(Error::invalid(format!(
                "rotation is not within {tol:e} of an orthonormal matrix with det +1"
            )));
        }
        if is_rotation(&rotation, 1e-14) {
            return Self::new(rotation, translation);
        }
        let svd = rotation.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * v_t;
        }
        Self::new(r, translation)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    #[inline]
    pub fn transform(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Rigid) -> Rigid {
        Rigid {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Rigid {
        let rt = self.rotation.transpose();
        Rigid { rotation: rt, translation: -(rt * self.translation) }
    }

    /// Largest elementwise difference between two poses.
    pub fn max_abs_diff(&self, other: &Rigid) -> f64 {
        let r = (self.rotation - other.rotation).abs().max();
        let t = (self.translation - other.translation).abs().max();
        r.max(t)
    }
}

fn is_rotation(m: &Matrix3<f64>, tol: f64) -> bool {
    if !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let gram = m.transpose() * m - Matrix3::identity();
    gram.abs().max() <= tol && (m.determinant() - 1.0).abs() <= tol.max(ORTHONORMAL_TOL) * 3.0
}

/// A projected point: pixel coordinates plus camera-space depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

/// Pinhole intrinsics, image size and clip depths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub near: f64,
    pub far: f64,
}

impl Camera {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        near: f64,
        far: f64,
    ) -> Result<Self> {
        let cam = Self { fx, fy, cx, cy, width, height, near, far };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera with the principal point at the image center and a horizontal
    /// field of view of `fov_x_deg`; square pixels.
    pub fn with_fov(width: usize, height: usize, fov_x_deg: f64, near: f64, far: f64) -> Result<Self> {
        let f = width as f64 * 0.5 / (fov_x_deg.to_radians() * 0.5).tan();
        Self::new(f, f, width as f64 * 0.5, height as f64 * 0.5, width, height, near, far)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.near, self.far]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("camera parameters must be finite"));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::invalid("focal lengths must be positive"));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::invalid("clip depths must satisfy 0 < near < far"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("image size must be non-zero"));
        }
        Ok(())
    }

    /// Same intrinsics with the image (and principal point, focal lengths)
    /// rescaled to a new resolution.
    pub fn resized(&self, width: usize, height: usize) -> Camera {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        Camera {
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: self.cx * sx,
            cy: self.cy * sy,
            width,
            height,
            ..*self
        }
    }

    /// Projects a camera-space point. Returns `None` for `z <= 0`.
    #[inline]
    pub fn project(&self, p: &Vector3<f64>) -> Option<Projection> {
        if !(p.z > 0.0) {
            return None;
        }
        Some(Projection {
            u: self.fx * p.x / p.z + self.cx,
            v: self.fy * p.y / p.z + self.cy,
            z: p.z,
        })
    }

    #[inline]
    pub fn unproject(&self, u: f64, v: f64, z: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z)
    }

    /// Jacobian of `(u, v)` with respect to the camera-space point, rows
    /// `[du/dp, dv/dp]`.
    #[inline]
    pub fn projection_jacobian(&self, p: &Vector3<f64>) -> [[f64; 3]; 2] {
        let iz = 1.0 / p.z;
        [
            [self.fx * iz, 0.0, -self.fx * p.x * iz * iz],
            [0.0, self.fy * iz, -self.fy * p.y * iz * iz],
        ]
    }

    #[inline]
    pub fn pixel_center(x: usize, y: usize) -> (f64, f64) {
        (x as f64 + 0.5, y as f64 + 0.5)
    }
}
