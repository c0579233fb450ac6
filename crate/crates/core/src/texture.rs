//! Procedural wall textures and shading.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::image::Rgb;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    Checkerboard,
    Brick,
    Solid,
}

/// Circular synthetic defect painted on the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultMark {
    pub theta: f64,
    pub y: f64,
    pub radius_m: f64,
    pub color: Rgb,
}

/// Wall texture parameterized in `(theta, y)`.
///
/// The tile width is stored as a whole number of tiles around the
/// circumference so the texture always closes seamlessly at `θ = 2π`.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureSpec {
    pub kind: TextureKind,
    tiles_around: u32,
    pub tile_y: f64,
    pub primary: Rgb,
    pub secondary: Rgb,
    pub mortar_fraction: f64,
    pub fault_marks: Vec<FaultMark>,
    /// Converts angular offsets to arc length for fault marks.
    pub wall_radius: f64,
}

impl TextureSpec {
    pub fn new(kind: TextureKind, tiles_around: u32, tile_y: f64, primary: Rgb, secondary: Rgb) -> Result<Self> {
        let spec = Self {
            kind,
            tiles_around,
            tile_y,
            primary,
            secondary,
            mortar_fraction: 0.08,
            fault_marks: Vec::new(),
            wall_radius: 3.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn checkerboard(tiles_around: u32, tile_y: f64, primary: Rgb, secondary: Rgb) -> Result<Self> {
        Self::new(TextureKind::Checkerboard, tiles_around, tile_y, primary, secondary)
    }

    pub fn solid(color: Rgb) -> Self {
        Self {
            kind: TextureKind::Solid,
            tiles_around: 1,
            tile_y: 1.0,
            primary: color,
            secondary: color,
            mortar_fraction: 0.0,
            fault_marks: Vec::new(),
            wall_radius: 3.0,
        }
    }

    /// Build from a tile angle, which must divide `2π` (to within 1e-9 tiles).
    pub fn with_tile_theta(
        kind: TextureKind,
        tile_theta: f64,
        tile_y: f64,
        primary: Rgb,
        secondary: Rgb,
    ) -> Result<Self> {
        if !(tile_theta > 0.0 && tile_theta.is_finite()) {
            return Err(Error::InvalidTexture("tile_theta must be positive"));
        }
        let n = math::TAU / tile_theta;
        let rounded = math::round(n);
        if math::abs(n - rounded) > 1e-9 || rounded < 1.0 || rounded > u32::MAX as f64 {
            return Err(Error::InvalidTexture("2π / tile_theta must be an integer"));
        }
        Self::new(kind, rounded as u32, tile_y, primary, secondary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tiles_around == 0 {
            return Err(Error::InvalidTexture("need at least one tile around"));
        }
        if !(self.tile_y > 0.0 && self.tile_y.is_finite()) {
            return Err(Error::InvalidTexture("tile_y must be positive"));
        }
        if !(0.0..0.5).contains(&self.mortar_fraction) {
            return Err(Error::InvalidTexture("mortar_fraction must be in [0, 0.5)"));
        }
        if !(self.wall_radius > 0.0 && self.wall_radius.is_finite()) {
            return Err(Error::InvalidTexture("wall_radius must be positive"));
        }
        let in_unit = |c: &Rgb| c.iter().all(|x| (0.0..=1.0).contains(x));
        if !in_unit(&self.primary) || !in_unit(&self.secondary) {
            return Err(Error::InvalidTexture("colors must lie in [0, 1]"));
        }
        for m in &self.fault_marks {
            if !(m.radius_m >= 0.0) || !in_unit(&m.color) {
                return Err(Error::InvalidTexture("bad fault mark"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn tiles_around(&self) -> u32 {
        self.tiles_around
    }

    #[inline]
    pub fn tile_theta(&self) -> f64 {
        math::TAU / self.tiles_around as f64
    }

    /// Unshaded albedo at a wall point.
    pub fn albedo(&self, theta: f64, y: f64) -> Rgb {
        let theta = math::wrap_angle(theta);
        for m in &self.fault_marks {
            let mut d = theta - math::wrap_angle(m.theta);
            if d > PI {
                d -= math::TAU;
            } else if d < -PI {
                d += math::TAU;
            }
            let arc = d * self.wall_radius;
            let dy = y - m.y;
            if arc * arc + dy * dy < m.radius_m * m.radius_m {
                return m.color;
            }
        }
        // Position in tile units around; exact integers land on tile starts.
        let s = theta * self.tiles_around as f64 / math::TAU;
        let t = y / self.tile_y;
        match self.kind {
            TextureKind::Solid => self.primary,
            TextureKind::Checkerboard => {
                let i = (math::floor(s) as i64).rem_euclid(self.tiles_around as i64);
                let j = math::floor(t) as i64;
                if (i + j).rem_euclid(2) == 0 {
                    self.primary
                } else {
                    self.secondary
                }
            }
            TextureKind::Brick => {
                let j = math::floor(t);
                let offset = if (j as i64).rem_euclid(2) == 1 { 0.5 } else { 0.0 };
                let sb = s + offset;
                let fu = sb - math::floor(sb);
                let fv = t - j;
                if fu < self.mortar_fraction || fv < self.mortar_fraction {
                    self.secondary
                } else {
                    self.primary
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shading {
    Unlit,
    LambertianDownward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub shading: Shading,
    light_direction: Vec3,
    supersampling: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            shading: Shading::Unlit,
            light_direction: Self::DEFAULT_LIGHT,
            supersampling: 1,
        }
    }
}

impl RenderConfig {
    /// Travels toward `+z`, lighting the wall around `θ = 0` and leaving
    /// `θ = π` dark.
    pub const DEFAULT_LIGHT: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub fn new(shading: Shading, light_direction: Vec3) -> Result<Self> {
        let n = light_direction.norm();
        if !(math::abs(n - 1.0) <= 1e-9) {
            return Err(Error::InvalidRenderConfig("light direction must have unit norm"));
        }
        Ok(Self {
            shading,
            light_direction,
            supersampling: 1,
        })
    }

    /// Average an `n x n` grid of samples per pixel (box filter). `n = 1`
    /// samples pixel centers only.
    pub fn with_supersampling(mut self, n: u32) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::InvalidRenderConfig("supersampling must be in 1..=16"));
        }
        self.supersampling = n;
        Ok(self)
    }

    pub fn unlit() -> Self {
        Self::default()
    }

    #[inline]
    pub fn light_direction(&self) -> &Vec3 {
        &self.light_direction
    }

    #[inline]
    pub fn supersampling(&self) -> u32 {
        self.supersampling
    }
}

/// Shaded color of the wall at `(theta, y)` with surface normal `normal`.
pub fn surface_color(tex: &TextureSpec, cfg: &RenderConfig, theta: f64, y: f64, normal: &Vec3) -> Rgb {
    let albedo = tex.albedo(theta, y);
    match cfg.shading {
        Shading::Unlit => albedo,
        Shading::LambertianDownward => {
            let k = (-normal.dot(&cfg.light_direction)).max(0.0) as f32;
            [albedo[0] * k, albedo[1] * k, albedo[2] * k]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CylinderModel;
    use core::f64::consts::FRAC_PI_2;

    const A: Rgb = [0.8, 0.2, 0.2];
    const B: Rgb = [0.2, 0.2, 0.8];

    #[test]
    fn checkerboard_examples() {
        let tex = TextureSpec::with_tile_theta(TextureKind::Checkerboard, FRAC_PI_2, 1.0, A, B).unwrap();
        assert_eq!(tex.tiles_around(), 4);
        let cfg = RenderConfig::unlit();
        let n = CylinderModel::inward_normal(0.1);
        assert_eq!(surface_color(&tex, &cfg, 0.1, 0.1, &n), A);
        assert_eq!(surface_color(&tex, &cfg, 0.1 + FRAC_PI_2, 0.1, &n), B);
        assert_eq!(surface_color(&tex, &cfg, 0.1 + math::TAU, 0.1, &n), A);
        assert_eq!(surface_color(&tex, &cfg, 0.1, 1.1, &n), B);
        assert_eq!(surface_color(&tex, &cfg, 0.1, -0.5, &n), B);
    }

    #[test]
    fn tile_theta_must_divide_circle() {
        assert!(TextureSpec::with_tile_theta(TextureKind::Checkerboard, 1.0, 1.0, A, B).is_err());
        assert!(TextureSpec::with_tile_theta(TextureKind::Checkerboard, math::TAU / 7.0, 1.0, A, B).is_ok());
        assert!(TextureSpec::checkerboard(8, 0.0, A, B).is_err());
    }

    #[test]
    fn brick_rows_are_offset() {
        let tex = TextureSpec::new(TextureKind::Brick, 8, 0.5, A, B).unwrap();
        let w = tex.tile_theta();
        // Mortar at the start of each brick in row 0, mid-brick in row 1.
        assert_eq!(tex.albedo(0.01 * w, 0.25), B);
        assert_eq!(tex.albedo(0.5 * w, 0.25), A);
        assert_eq!(tex.albedo(0.51 * w, 0.75), B);
        assert_eq!(tex.albedo(0.01 * w, 0.75), A);
        // Horizontal mortar line at the bottom of each course.
        assert_eq!(tex.albedo(0.3 * w, 0.01), B);
    }

    #[test]
    fn faults_wrap_around_seam() {
        let mut tex = TextureSpec::solid(A);
        tex.fault_marks.push(FaultMark {
            theta: 0.0,
            y: 1.0,
            radius_m: 0.1,
            color: [0.0; 3],
        });
        assert_eq!(tex.albedo(math::TAU - 0.01, 1.0), [0.0; 3]);
        assert_eq!(tex.albedo(0.01, 1.05), [0.0; 3]);
        assert_eq!(tex.albedo(0.1, 1.0), A);
    }

    #[test]
    fn downward_light_brightens_theta_zero() {
        let tex = TextureSpec::solid([1.0; 3]);
        let cfg = RenderConfig::new(Shading::LambertianDownward, RenderConfig::DEFAULT_LIGHT).unwrap();
        let lit = surface_color(&tex, &cfg, 0.0, 0.0, &CylinderModel::inward_normal(0.0));
        let dark = surface_color(&tex, &cfg, PI, 0.0, &CylinderModel::inward_normal(PI));
        assert_eq!(lit, [1.0; 3]);
        assert_eq!(dark, [0.0; 3]);
        assert!(RenderConfig::new(Shading::Unlit, Vec3::new(0.0, 0.0, 2.0)).is_err());
    }
}
