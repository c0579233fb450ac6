//! Software ray caster for synthetic tunnel imagery.
//!
//! Rendering deliberately avoids the solver in [`crate::geometry`]: rays are
//! intersected with the wall by a generic parametric quadratic, so rendered
//! frames and the ground-truth panorama are an independent check on it.

use alloc::vec;

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, CylinderModel, Pose, Vec3};
use crate::image::{Image, Rgb};
use crate::math;
use crate::stitch::PanoramaSpec;
use crate::texture::{surface_color, RenderConfig, TextureSpec};

/// Smallest `λ > 0` with `origin + λ·dir` on `x² + z² = r²`.
pub fn ray_cylinder_intersect(origin: &Vec3, dir: &Vec3, r: f64) -> Option<f64> {
    let a = dir.x * dir.x + dir.z * dir.z;
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (origin.x * dir.x + origin.z * dir.z);
    let c = origin.x * origin.x + origin.z * origin.z - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = math::sqrt(disc);
    let near = (-b - sq) / (2.0 * a);
    let far = (-b + sq) / (2.0 * a);
    if near > 0.0 {
        Some(near)
    } else if far > 0.0 {
        Some(far)
    } else {
        None
    }
}

fn shade_ray(pose: &Pose, cyl: &CylinderModel, tex: &TextureSpec, cfg: &RenderConfig, dir_cam: &Vec3) -> Option<Rgb> {
    let dir = pose.rotation() * dir_cam;
    let origin = pose.translation();
    let lambda = ray_cylinder_intersect(origin, &dir, cyl.radius())?;
    let hit = origin + dir * lambda;
    let theta = math::atan2(hit.x, hit.z);
    let normal = Vec3::new(-hit.x, 0.0, -hit.z) / cyl.radius();
    Some(surface_color(tex, cfg, theta, hit.y, &normal))
}

/// Mean of `samples`, or `None` if there were none.
fn average(samples: impl Iterator<Item = Rgb>) -> Option<Rgb> {
    let (mut sum, mut n) = ([0.0f64; 3], 0u32);
    for c in samples {
        for k in 0..3 {
            sum[k] += c[k] as f64;
        }
        n += 1;
    }
    (n > 0).then(|| sum.map(|s| (s / n as f64) as f32))
}

/// Offsets of the `n x n` sub-pixel sample grid inside a unit pixel.
fn subpixel_offsets(n: u32) -> impl Iterator<Item = (f64, f64)> {
    (0..n * n).map(move |i| {
        let step = 1.0 / n as f64;
        (((i % n) as f64 + 0.5) * step, ((i / n) as f64 + 0.5) * step)
    })
}

/// Shade one camera pixel, averaging `cfg.supersampling()²` rays. `None`
/// when no ray meets the wall.
pub fn shade_pixel(
    intr: &CameraIntrinsics,
    pose: &Pose,
    cyl: &CylinderModel,
    tex: &TextureSpec,
    cfg: &RenderConfig,
    col: u32,
    row: u32,
) -> Option<Rgb> {
    let ray = |du: f64, dv: f64| {
        Vec3::new(
            (col as f64 + du - intr.cx) / intr.f,
            (row as f64 + dv - intr.cy) / intr.f,
            1.0,
        )
    };
    if cfg.supersampling() == 1 {
        return shade_ray(pose, cyl, tex, cfg, &ray(0.5, 0.5));
    }
    average(subpixel_offsets(cfg.supersampling()).filter_map(|(du, dv)| shade_ray(pose, cyl, tex, cfg, &ray(du, dv))))
}

/// Render one scanline into `out` (length `intr.width`), flagging misses
/// in `valid`.
#[allow(clippy::too_many_arguments)]
pub fn render_row(
    intr: &CameraIntrinsics,
    pose: &Pose,
    cyl: &CylinderModel,
    tex: &TextureSpec,
    cfg: &RenderConfig,
    row: u32,
    out: &mut [Rgb],
    valid: &mut [bool],
) {
    for (col, (px, ok)) in out.iter_mut().zip(valid.iter_mut()).enumerate() {
        match shade_pixel(intr, pose, cyl, tex, cfg, col as u32, row) {
            Some(c) => {
                *px = c;
                *ok = true;
            }
            None => {
                *px = [0.0; 3];
                *ok = false;
            }
        }
    }
}

pub fn check_inside(pose: &Pose, cyl: &CylinderModel) -> Result<()> {
    if cyl.contains(pose) {
        Ok(())
    } else {
        Err(Error::CameraOutsideCylinder {
            distance: math::sqrt(pose.lateral_offset_sq()),
            radius: cyl.radius(),
        })
    }
}

/// Render the view from `pose`.
pub fn render_view(
    intr: &CameraIntrinsics,
    pose: &Pose,
    cyl: &CylinderModel,
    tex: &TextureSpec,
    cfg: &RenderConfig,
) -> Result<Image> {
    check_inside(pose, cyl)?;
    let w = intr.width as usize;
    let mut img = Image::new(intr.width, intr.height);
    let mut valid = vec![false; img.len()];
    for (row, (px, ok)) in img
        .pixels_mut()
        .chunks_exact_mut(w)
        .zip(valid.chunks_exact_mut(w))
        .enumerate()
    {
        render_row(intr, pose, cyl, tex, cfg, row as u32, px, ok);
    }
    img.set_validity(valid);
    Ok(img)
}

/// One row of the exact unwrapped wall texture, box-filtered like the
/// camera when `cfg` supersamples.
pub fn render_oracle_row(tex: &TextureSpec, cfg: &RenderConfig, spec: &PanoramaSpec, row: u32, out: &mut [Rgb]) {
    let shade = |u: f64, v: f64| {
        let cp = spec.pixel_to_cylinder(u, v);
        surface_color(tex, cfg, cp.theta, cp.height, &CylinderModel::inward_normal(cp.theta))
    };
    let n = cfg.supersampling();
    for (col, px) in out.iter_mut().enumerate() {
        let (u, v) = (col as f64, row as f64);
        *px = if n == 1 {
            shade(u + 0.5, v + 0.5)
        } else {
            average(subpixel_offsets(n).map(|(du, dv)| shade(u + du, v + dv))).expect("n >= 1")
        };
    }
}

/// Ground-truth panorama: the wall texture sampled directly on the panorama
/// grid, no camera involved.
pub fn render_oracle_panorama(tex: &TextureSpec, cfg: &RenderConfig, spec: &PanoramaSpec) -> Image {
    let mut img = Image::new(spec.width(), spec.rows());
    let w = spec.width() as usize;
    for (row, px) in img.pixels_mut().chunks_exact_mut(w).enumerate() {
        render_oracle_row(tex, cfg, spec, row as u32, px);
    }
    img
}
