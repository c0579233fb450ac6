use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Linear RGB, nominally in `[0, 1]`.
pub type Rgb = [f32; 3];

/// Row-major floating-point RGB raster with an optional validity mask.
///
/// Pixel `(col, row)` covers `[col, col + 1) x [row, row + 1)` in continuous
/// coordinates, so its center is at `(col + 0.5, row + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
    valid: Option<Vec<bool>>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![[0.0; 3]; width as usize * height as usize],
            valid: None,
        }
    }

    /// Returns `None` when the buffer length does not match.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Option<Self> {
        (pixels.len() == width as usize * height as usize).then_some(Self {
            width,
            height,
            pixels,
            valid: None,
        })
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
            valid: None,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }

    #[inline]
    pub fn get(&self, col: u32, row: u32) -> Rgb {
        self.pixels[self.index(col, row)]
    }

    #[inline]
    pub fn set(&mut self, col: u32, row: u32, color: Rgb) {
        let i = self.index(col, row);
        self.pixels[i] = color;
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.pixels
    }

    pub fn validity(&self) -> Option<&[bool]> {
        self.valid.as_deref()
    }

    /// Attach a per-pixel validity mask. An all-true mask is dropped.
    pub fn set_validity(&mut self, valid: Vec<bool>) {
        assert_eq!(valid.len(), self.pixels.len(), "validity mask size");
        self.valid = if valid.iter().all(|v| *v) { None } else { Some(valid) };
    }

    #[inline]
    pub fn is_valid(&self, col: u32, row: u32) -> bool {
        match &self.valid {
            Some(v) => v[self.index(col, row)],
            None => true,
        }
    }

    /// Rows flipped top to bottom.
    pub fn flipped_vertically(&self) -> Image {
        let w = self.width as usize;
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(w.max(1)).rev() {
            pixels.extend_from_slice(row);
        }
        let valid = self.valid.as_ref().map(|v| {
            let mut out = Vec::with_capacity(v.len());
            for row in v.chunks_exact(w.max(1)).rev() {
                out.extend_from_slice(row);
            }
            out
        });
        Image {
            width: self.width,
            height: self.height,
            pixels,
            valid,
        }
    }

    /// Bilinear sample at a continuous coordinate inside `[0, w) x [0, h)`.
    ///
    /// The outer half pixel clamps to the edge. Outside the image, or touching
    /// an invalid pixel, gives `None`.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Option<Rgb> {
        let (w, h) = (self.width as f64, self.height as f64);
        if !(u >= 0.0 && u < w && v >= 0.0 && v < h) {
            return None;
        }
        let u = (u - 0.5).clamp(0.0, w - 1.0);
        let v = (v - 0.5).clamp(0.0, h - 1.0);
        let (u0, v0) = (math::floor(u), math::floor(v));
        let (fu, fv) = ((u - u0) as f32, (v - v0) as f32);
        let (c0, r0) = (u0 as u32, v0 as u32);
        let c1 = (c0 + 1).min(self.width - 1);
        let r1 = (r0 + 1).min(self.height - 1);
        if !(self.is_valid(c0, r0) && self.is_valid(c1, r0) && self.is_valid(c0, r1) && self.is_valid(c1, r1)) {
            return None;
        }
        let (p00, p10) = (self.get(c0, r0), self.get(c1, r0));
        let (p01, p11) = (self.get(c0, r1), self.get(c1, r1));
        let mut out = [0.0; 3];
        for ch in 0..3 {
            let top = p00[ch] + (p10[ch] - p00[ch]) * fu;
            let bottom = p01[ch] + (p11[ch] - p01[ch]) * fu;
            out[ch] = top + (bottom - top) * fv;
        }
        Some(out)
    }

    /// Nearest-pixel sample; same domain as [`Image::sample_bilinear`].
    pub fn sample_nearest(&self, u: f64, v: f64) -> Option<Rgb> {
        let (w, h) = (self.width as f64, self.height as f64);
        if !(u >= 0.0 && u < w && v >= 0.0 && v < h) {
            return None;
        }
        let col = (math::floor(u) as u32).min(self.width - 1);
        let row = (math::floor(v) as u32).min(self.height - 1);
        self.is_valid(col, row).then(|| self.get(col, row))
    }
}

/// Rec. 601 luma.
#[inline]
pub fn luminance(c: Rgb) -> f64 {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Image {
        let mut img = Image::new(4, 3);
        for row in 0..3 {
            for col in 0..4 {
                img.set(col, row, [col as f32, row as f32, 1.0]);
            }
        }
        img
    }

    #[test]
    fn bilinear_is_exact_on_linear_ramp() {
        let img = ramp();
        let c = img.sample_bilinear(1.75, 1.0).unwrap();
        assert!((c[0] - 1.25).abs() < 1e-6 && (c[1] - 0.5).abs() < 1e-6);
        assert_eq!(img.sample_bilinear(3.5, 2.5).unwrap(), [3.0, 2.0, 1.0]);
        // Outer half pixel clamps to the edge.
        assert_eq!(img.sample_bilinear(0.1, 0.0).unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(img.sample_bilinear(4.0, 0.0), None);
        assert_eq!(img.sample_bilinear(-0.01, 0.0), None);
        assert_eq!(img.sample_bilinear(f64::NAN, 0.0), None);
    }

    #[test]
    fn invalid_neighbours_block_sampling() {
        let mut img = ramp();
        let mut valid = vec![true; img.len()];
        valid[img.index(2, 1)] = false;
        img.set_validity(valid);
        assert_eq!(img.sample_bilinear(2.0, 1.0), None);
        assert!(img.sample_bilinear(1.0, 1.0).is_some());
        assert_eq!(img.sample_nearest(2.7, 1.4), None);
        assert_eq!(img.sample_nearest(2.7, 0.9).unwrap(), [2.0, 0.0, 1.0]);
    }

    #[test]
    fn flip_reverses_rows() {
        let img = ramp();
        let f = img.flipped_vertically();
        assert_eq!(f.get(1, 0), img.get(1, 2));
        assert_eq!(f.flipped_vertically(), img);
    }
}
