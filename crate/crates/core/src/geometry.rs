//! Closed-form camera and tunnel geometry.
//!
//! Conventions:
//!
//! - Pixel `(u, v)` maps to the camera-frame ray `[(u - cx)/f, (v - cy)/f, 1]`.
//!   Coordinates are continuous with pixel `(i, j)` covering
//!   `[i, i + 1) x [j, j + 1)`; an image spans `[0, width) x [0, height)`.
//! - A pose maps camera coordinates to world coordinates: `X_w = R X_c + t`.
//! - The tunnel is the infinite cylinder `x² + z² = r²` around the world y
//!   axis. A wall point is `(r sin θ, y, r cos θ)`, so `θ = 0` faces `+z` and
//!   `θ = π/2` faces `+x`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::math;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance for `RᵀR = I` and `det R = 1`.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Ideal pinhole camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(f: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let intr = Self {
            f,
            cx,
            cy,
            width,
            height,
        };
        intr.validate()?;
        Ok(intr)
    }

    /// Camera with the principal point at the image center and the focal
    /// length chosen for the given horizontal field of view.
    pub fn from_hfov(hfov: f64, width: u32, height: u32) -> Result<Self> {
        if !(hfov > 0.0 && hfov < core::f64::consts::PI) {
            return Err(Error::InvalidIntrinsics("field of view must be in (0, π)"));
        }
        let f = 0.5 * width as f64 / libm::tan(0.5 * hfov);
        Self::new(f, 0.5 * width as f64, 0.5 * height as f64, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(Error::InvalidIntrinsics("focal length must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidIntrinsics("image size must be at least 1x1"));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return Err(Error::InvalidIntrinsics("cx must lie in [0, width)"));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(Error::InvalidIntrinsics("cy must lie in [0, height)"));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, p: PixelCoord) -> bool {
        p.u >= 0.0 && p.u < self.width as f64 && p.v >= 0.0 && p.v < self.height as f64
    }
}

/// Rigid camera-to-world transform with a validated rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Mat3,
    translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let deviation = orthonormality_deviation(&rotation);
        if !(deviation <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidRotation { deviation });
        }
        if !translation.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidTranslation);
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Camera at `translation`, yawed by `yaw` about the world y axis.
    pub fn from_yaw(yaw: f64, translation: Vec3) -> Self {
        Self {
            rotation: rot_y(yaw),
            translation,
        }
    }

    #[inline]
    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// Azimuth of the optical axis in world coordinates, in `[0, 2π)`.
    pub fn yaw(&self) -> f64 {
        let r = &self.rotation;
        math::wrap_angle(math::atan2(r[(0, 2)], r[(2, 2)]))
    }

    /// Camera to world for a camera-frame point.
    #[inline]
    pub fn transform(&self, x_cam: &Vec3) -> Vec3 {
        self.rotation * x_cam + self.translation
    }

    /// World to camera: `Rᵀ (X_w - t)`.
    #[inline]
    pub fn inverse_transform(&self, x_world: &Vec3) -> Vec3 {
        self.rotation.tr_mul(&(x_world - self.translation))
    }

    /// Left-multiply by a world rotation: rotates both the orientation and the
    /// position of the camera about the world origin.
    pub fn rotated_about_world(&self, rot: &Mat3) -> Result<Self> {
        Self::new(rot * self.rotation, rot * self.translation)
    }

    /// Surrogate pose that pretends the camera sits on the tunnel axis: keeps
    /// the camera height and the yaw of the optical axis, drops the lateral
    /// offset along with any pitch and roll.
    pub fn egocentric(&self) -> Self {
        Self::from_yaw(self.yaw(), Vec3::new(0.0, self.translation.y, 0.0))
    }

    /// Squared distance of the camera from the cylinder axis.
    #[inline]
    pub fn lateral_offset_sq(&self) -> f64 {
        let t = &self.translation;
        t.x * t.x + t.z * t.z
    }
}

/// Largest elementwise deviation of `RᵀR` from identity or `det R` from 1.
pub fn orthonormality_deviation(r: &Mat3) -> f64 {
    if !r.iter().all(|x| x.is_finite()) {
        return f64::INFINITY;
    }
    let gram = r.transpose() * r - Mat3::identity();
    let ortho = gram.iter().fold(0.0_f64, |m, x| m.max(math::abs(*x)));
    ortho.max(math::abs(r.determinant() - 1.0))
}

/// Rotation about world x.
pub fn rot_x(angle: f64) -> Mat3 {
    let (s, c) = (math::sin(angle), math::cos(angle));
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Rotation about world y; maps `+z` to `(sin a, 0, cos a)`.
pub fn rot_y(angle: f64) -> Mat3 {
    let (s, c) = (math::sin(angle), math::cos(angle));
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Rotation about world z.
pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = (math::sin(angle), math::cos(angle));
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Tunnel wall: cylinder of the given radius around world y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderModel {
    radius: f64,
}

impl CylinderModel {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(Self { radius })
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Strictly inside, which the depth solve requires.
    #[inline]
    pub fn contains(&self, pose: &Pose) -> bool {
        pose.lateral_offset_sq() < self.radius * self.radius
    }

    /// World position of a wall point.
    #[inline]
    pub fn point(&self, cp: CylinderPoint) -> Vec3 {
        Vec3::new(
            self.radius * math::sin(cp.theta),
            cp.height,
            self.radius * math::cos(cp.theta),
        )
    }

    /// Unit normal at a wall point, facing the axis.
    #[inline]
    pub fn inward_normal(theta: f64) -> Vec3 {
        Vec3::new(-math::sin(theta), 0.0, -math::cos(theta))
    }
}

/// Point on the tunnel wall: azimuth in `[0, 2π)` and world height in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderPoint {
    pub theta: f64,
    pub height: f64,
}

impl CylinderPoint {
    /// Wraps `theta` into `[0, 2π)`.
    pub fn new(theta: f64, height: f64) -> Self {
        Self {
            theta: math::wrap_angle(theta),
            height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelCoord {
    pub u: f64,
    pub v: f64,
}

impl PixelCoord {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn distance(&self, other: &PixelCoord) -> f64 {
        let (du, dv) = (self.u - other.u, self.v - other.v);
        math::sqrt(du * du + dv * dv)
    }
}

/// World-frame direction of a pixel's ray with unit camera depth, i.e.
/// `R K⁻¹ [u, v, 1]ᵀ`. Scaling by the depth `z_c` and adding `t` gives the
/// world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl SolveCoefficients {
    pub fn norm(&self) -> f64 {
        math::sqrt(self.c1 * self.c1 + self.c2 * self.c2 + self.c3 * self.c3)
    }
}

/// Azimuth and height on the unit cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCylinderCoord {
    pub theta: f64,
    pub h: f64,
}

/// Back-project a pixel to its camera-frame ray with unit z.
#[inline]
pub fn pixel_to_camera_ray(intr: &CameraIntrinsics, p: PixelCoord) -> Vec3 {
    Vec3::new((p.u - intr.cx) / intr.f, (p.v - intr.cy) / intr.f, 1.0)
}

/// Project a camera-centered point onto the unit cylinder about the camera's
/// own y axis.
pub fn project_unit_cylinder(x: &Vec3) -> Result<UnitCylinderCoord> {
    let rho = math::sqrt(x.x * x.x + x.z * x.z);
    if rho == 0.0 || !rho.is_finite() {
        return Err(Error::AxisDegenerate);
    }
    let (sin_t, h, cos_t) = (x.x / rho, x.y / rho, x.z / rho);
    Ok(UnitCylinderCoord {
        theta: math::wrap_angle(math::atan2(sin_t, cos_t)),
        h,
    })
}

/// Flatten unit-cylinder coordinates to the image plane of a single camera:
/// `[f θ + cx, f h + cy]`. Angles are not wrapped here.
#[inline]
pub fn unwrap_to_plane(theta: f64, h: f64, intr: &CameraIntrinsics) -> PixelCoord {
    PixelCoord::new(intr.f * theta + intr.cx, intr.f * h + intr.cy)
}

/// Cylindrical projection of a single image about its own camera, sampling
/// the source at each output pixel. Output has the source dimensions.
pub fn cylindrical_projection(intr: &CameraIntrinsics, src: &crate::Image) -> crate::Image {
    let mut out = crate::Image::new(intr.width, intr.height);
    let mut valid = alloc::vec![false; out.len()];
    for row in 0..intr.height {
        for col in 0..intr.width {
            // Inverse of unwrap_to_plane, then of project_unit_cylinder.
            let theta = (col as f64 + 0.5 - intr.cx) / intr.f;
            let h = (row as f64 + 0.5 - intr.cy) / intr.f;
            let (s, c) = (math::sin(theta), math::cos(theta));
            if c <= 0.0 {
                continue;
            }
            let p = PixelCoord::new(intr.f * s / c + intr.cx, intr.f * h / c + intr.cy);
            if let Some(color) = src.sample_bilinear(p.u, p.v) {
                let idx = out.index(col, row);
                out.pixels_mut()[idx] = color;
                valid[idx] = true;
            }
        }
    }
    out.set_validity(valid);
    out
}

/// `R K⁻¹ [u, v, 1]ᵀ`.
#[inline]
pub fn solve_coefficients(intr: &CameraIntrinsics, pose: &Pose, p: PixelCoord) -> SolveCoefficients {
    let c = pose.rotation() * pixel_to_camera_ray(intr, p);
    SolveCoefficients {
        c1: c.x,
        c2: c.y,
        c3: c.z,
    }
}

/// Camera depth at which the ray meets the wall.
///
/// Solves `r² = z²(c1² + c3²) + 2z(c1 tx + c3 tz) + tx² + tz²` and returns
/// the positive root. With the camera strictly inside, the constant term is
/// negative so the two roots straddle zero.
pub fn solve_depth(c: &SolveCoefficients, pose: &Pose, cyl: &CylinderModel) -> Result<f64> {
    let t = pose.translation();
    let r = cyl.radius();
    let a = c.c1 * c.c1 + c.c3 * c.c3;
    let b = c.c1 * t.x + c.c3 * t.z;
    let k = t.x * t.x + t.z * t.z - r * r;
    if !(k < 0.0) {
        return Err(Error::CameraOutsideCylinder {
            distance: math::sqrt(t.x * t.x + t.z * t.z),
            radius: r,
        });
    }
    if a == 0.0 {
        return Err(Error::AxisParallelRay);
    }
    let s = math::sqrt(b * b - a * k);
    // (-b + s) / a, rearranged to avoid cancellation when b > 0.
    let z = if b <= 0.0 { (s - b) / a } else { -k / (b + s) };
    Ok(z)
}

/// Azimuth of the wall hit, from `r sin θ = c1 z + tx`, `r cos θ = c3 z + tz`.
#[inline]
pub fn solve_theta(c: &SolveCoefficients, z_c: f64, pose: &Pose, _cyl: &CylinderModel) -> f64 {
    let t = pose.translation();
    math::wrap_angle(math::atan2(c.c1 * z_c + t.x, c.c3 * z_c + t.z))
}

/// World height of the wall hit.
#[inline]
pub fn solve_height(c: &SolveCoefficients, z_c: f64, pose: &Pose) -> f64 {
    c.c2 * z_c + pose.translation().y
}

/// Wall point seen by pixel `p`.
pub fn pixel_to_cylinder(
    intr: &CameraIntrinsics,
    pose: &Pose,
    cyl: &CylinderModel,
    p: PixelCoord,
) -> Result<CylinderPoint> {
    let c = solve_coefficients(intr, pose, p);
    let z = solve_depth(&c, pose, cyl)?;
    Ok(CylinderPoint {
        theta: solve_theta(&c, z, pose, cyl),
        height: solve_height(&c, z, pose),
    })
}

/// Pixel at which the wall point `cp` appears, or `None` when it is behind
/// the camera or outside the image.
pub fn cylinder_to_pixel(
    intr: &CameraIntrinsics,
    pose: &Pose,
    cyl: &CylinderModel,
    cp: CylinderPoint,
) -> Option<PixelCoord> {
    let x_cam = pose.inverse_transform(&cyl.point(cp));
    if !(x_cam.z > 0.0) {
        return None;
    }
    let p = PixelCoord::new(
        intr.f * x_cam.x / x_cam.z + intr.cx,
        intr.f * x_cam.y / x_cam.z + intr.cy,
    );
    intr.contains(p).then_some(p)
}
