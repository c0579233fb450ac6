//! Edge straightness of a stitched two-tone texture.
//!
//! On the unwrapped wall every tile edge is a straight axis-aligned line.
//! Edges are located to sub-pixel precision on every scanline (vertical
//! edges) and every column (horizontal edges), chained into tracks across
//! neighbouring lines, and each track's spread (max - min position) is its
//! deviation from straightness.

use alloc::vec::Vec;

use crate::image::{luminance, Image};
use crate::math;

/// Largest per-edge positional spread, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStraightness {
    /// Spread of `û` along vertical edges.
    pub vertical_px: f64,
    /// Spread of `v̂` along horizontal edges.
    pub horizontal_px: f64,
    pub vertical_edges: usize,
    pub horizontal_edges: usize,
}

impl EdgeStraightness {
    pub fn max_deviation(&self) -> f64 {
        self.vertical_px.max(self.horizontal_px)
    }
}

/// Tuning for edge tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackParams {
    /// Largest shift of an edge between neighbouring lines.
    pub max_step_px: f64,
    /// Lines a track may skip (corners, uncovered pixels) before it ends.
    pub max_gap: usize,
    /// Tracks shorter than this many lines are ignored.
    pub min_length: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            max_step_px: 1.5,
            max_gap: 8,
            min_length: 24,
        }
    }
}

/// Sub-pixel crossings of `mid` along one line of samples.
///
/// `lum(i)` is `None` for uncovered samples. A crossing between samples `i`
/// and `i + 1` is kept only if the samples one further out on either side
/// differ by at least half the tile contrast, which rejects the blurred
/// transitions near corners.
fn crossings(len: usize, circular: bool, mid: f64, contrast: f64, lum: impl Fn(usize) -> Option<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    if len < 4 {
        return out;
    }
    let at = |i: isize| -> Option<f64> {
        if circular {
            lum(i.rem_euclid(len as isize) as usize)
        } else if i < 0 || i >= len as isize {
            None
        } else {
            lum(i as usize)
        }
    };
    let last = if circular { len } else { len - 1 };
    for i in 0..last {
        let i = i as isize;
        let (Some(a), Some(b)) = (at(i), at(i + 1)) else {
            continue;
        };
        if (a - mid) * (b - mid) > 0.0 || a == b {
            continue;
        }
        let (Some(pre), Some(post)) = (at(i - 1), at(i + 2)) else {
            continue;
        };
        if math::abs(post - pre) < 0.5 * contrast || (post - pre) * (b - a) < 0.0 {
            continue;
        }
        // Sample i is centered at i + 0.5.
        out.push(i as f64 + 0.5 + (mid - a) / (b - a));
    }
    out
}

struct Track {
    lo: f64,
    hi: f64,
    last: f64,
    last_line: usize,
    length: usize,
}

/// Chain per-line crossings into tracks and return the largest spread among
/// tracks of sufficient length.
fn track_spread(lines: &[Vec<f64>], period: Option<f64>, params: &TrackParams) -> (f64, usize) {
    let wrap = |d: f64| match period {
        Some(p) => d - p * math::round(d / p),
        None => d,
    };
    let mut active: Vec<Track> = Vec::new();
    let mut done: Vec<Track> = Vec::new();
    for (line, xs) in lines.iter().enumerate() {
        let mut taken = alloc::vec![false; xs.len()];
        for t in active.iter_mut() {
            let best = xs
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .map(|(i, x)| (i, wrap(x - t.last)))
                .filter(|(_, d)| math::abs(*d) <= params.max_step_px)
                .min_by(|a, b| math::abs(a.1).total_cmp(&math::abs(b.1)));
            if let Some((i, d)) = best {
                taken[i] = true;
                t.last += d;
                t.lo = t.lo.min(t.last);
                t.hi = t.hi.max(t.last);
                t.last_line = line;
                t.length += 1;
            }
        }
        let (keep, ended): (Vec<Track>, Vec<Track>) =
            active.into_iter().partition(|t| line - t.last_line <= params.max_gap);
        done.extend(ended);
        active = keep;
        for (i, x) in xs.iter().enumerate() {
            if !taken[i] {
                active.push(Track {
                    lo: *x,
                    hi: *x,
                    last: *x,
                    last_line: line,
                    length: 1,
                });
            }
        }
    }
    done.extend(active);
    let long: Vec<&Track> = done.iter().filter(|t| t.length >= params.min_length).collect();
    let spread = long.iter().map(|t| t.hi - t.lo).fold(0.0, f64::max);
    (spread, long.len())
}

/// Straightness of tile edges in a stitched two-tone texture.
///
/// `lum_a` and `lum_b` are the luminances of the two tile colors; `mask`
/// selects the pixels to use (e.g. panorama coverage).
pub fn edge_straightness(img: &Image, mask: &[bool], lum_a: f64, lum_b: f64, params: &TrackParams) -> EdgeStraightness {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mid = 0.5 * (lum_a + lum_b);
    let contrast = math::abs(lum_a - lum_b);
    let lum: Vec<Option<f64>> = img
        .pixels()
        .iter()
        .zip(mask)
        .map(|(c, m)| m.then(|| luminance(*c)))
        .collect();

    let rows: Vec<Vec<f64>> = (0..h)
        .map(|r| crossings(w, true, mid, contrast, |c| lum[r * w + c]))
        .collect();
    let cols: Vec<Vec<f64>> = (0..w)
        .map(|c| crossings(h, false, mid, contrast, |r| lum[r * w + c]))
        .collect();
    let (vertical_px, vertical_edges) = track_spread(&rows, Some(w as f64), params);
    let (horizontal_px, horizontal_edges) = track_spread(&cols, None, params);
    EdgeStraightness {
        vertical_px,
        horizontal_px,
        vertical_edges,
        horizontal_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn checker(w: u32, h: u32, tile: u32, warp: impl Fn(u32, u32) -> (f64, f64)) -> Image {
        let mut img = Image::new(w, h);
        for r in 0..h {
            for c in 0..w {
                let (x, y) = warp(c, r);
                let i = math::floor(x / tile as f64) as i64 + math::floor(y / tile as f64) as i64;
                img.set(c, r, if i.rem_euclid(2) == 0 { [1.0; 3] } else { [0.0; 3] });
            }
        }
        img
    }

    #[test]
    fn axis_aligned_checker_is_straight() {
        let img = checker(256, 128, 32, |c, r| (c as f64 + 0.5, r as f64 + 0.5));
        let s = edge_straightness(&img, &vec![true; img.len()], 1.0, 0.0, &TrackParams::default());
        assert!(s.max_deviation() < 1e-9, "{s:?}");
        assert_eq!(s.vertical_edges, 8);
        assert_eq!(s.horizontal_edges, 3);
    }

    #[test]
    fn bent_rows_are_detected() {
        // Horizontal edges follow a sine of amplitude 6 px.
        let img = checker(256, 128, 32, |c, r| {
            let x = c as f64 + 0.5;
            (x, r as f64 + 0.5 + 6.0 * libm::sin(x * math::TAU / 256.0))
        });
        let s = edge_straightness(&img, &vec![true; img.len()], 1.0, 0.0, &TrackParams::default());
        assert!(s.horizontal_px > 5.0, "{s:?}");
        assert!(s.vertical_px < 1.0, "{s:?}");
    }

    #[test]
    fn slanted_columns_are_detected() {
        let img = checker(256, 128, 32, |c, r| (c as f64 + 0.5 + 0.05 * r as f64, r as f64 + 0.5));
        let s = edge_straightness(&img, &vec![true; img.len()], 1.0, 0.0, &TrackParams::default());
        assert!(s.vertical_px > 5.0, "{s:?}");
    }

    #[test]
    fn masked_pixels_are_ignored() {
        let img = checker(64, 64, 16, |c, r| (c as f64 + 0.5, r as f64 + 0.5));
        let s = edge_straightness(&img, &vec![false; img.len()], 1.0, 0.0, &TrackParams::default());
        assert_eq!((s.vertical_edges, s.horizontal_edges), (0, 0));
    }
}
