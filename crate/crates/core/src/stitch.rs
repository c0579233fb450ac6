//! Pose-driven panorama compositing.
//!
//! Each frame's image border is pushed through the wall solver to get its
//! footprint on the panorama (the forward-warped boundary). Every panorama
//! pixel inside that footprint is then pulled back into the frame (inverse
//! warping), so the output has no forward-splatting holes. Overlaps are
//! feather-blended with a weight that falls off toward each frame's border.
//!
//! Accumulation is a per-pixel sum taken over frames in ascending frame
//! index, whatever order frames are supplied or rows are processed in, so
//! sequential and row-parallel drivers give bit-identical output.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{
    cylinder_to_pixel, pixel_to_cylinder, CameraIntrinsics, CylinderModel, CylinderPoint, PixelCoord, Pose,
};
use crate::image::{Image, Rgb};
use crate::math;
use crate::trajectory::FramePose;

/// World-frame panorama raster.
///
/// Column `i` covers `û ∈ [i, i + 1)` with `û = width · θ / 2π`; row `j`
/// covers `v̂ ∈ [j, j + 1)` with `v̂ = (y - y_min) · scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanoramaSpec {
    width: u32,
    y_min: f64,
    y_max: f64,
    scale: f64,
}

impl PanoramaSpec {
    pub fn new(width: u32, y_min: f64, y_max: f64, scale: f64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidPanoramaSpec("width must be at least 1"));
        }
        if !(y_min.is_finite() && y_max.is_finite() && y_max > y_min) {
            return Err(Error::InvalidPanoramaSpec("need y_max > y_min"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidPanoramaSpec("scale must be positive"));
        }
        let spec = Self {
            width,
            y_min,
            y_max,
            scale,
        };
        if spec.rows() == 0 {
            return Err(Error::InvalidPanoramaSpec("band is thinner than one row"));
        }
        Ok(spec)
    }

    /// Equal tangential and axial sampling density on a wall of radius `r`.
    pub fn default_scale(width: u32, radius: f64) -> f64 {
        width as f64 / (math::TAU * radius)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    #[inline]
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn rows(&self) -> u32 {
        math::round((self.y_max - self.y_min) * self.scale) as u32
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width as usize * self.rows() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Continuous panorama coordinate to wall point; `θ` wraps.
    #[inline]
    pub fn pixel_to_cylinder(&self, u: f64, v: f64) -> CylinderPoint {
        CylinderPoint::new(u * math::TAU / self.width as f64, self.y_min + v / self.scale)
    }

    /// Wall point to continuous panorama coordinate, `û ∈ [0, width)`.
    /// `v̂` is not clipped; see [`PanoramaSpec::in_band`].
    #[inline]
    pub fn cylinder_to_pixel(&self, cp: CylinderPoint) -> (f64, f64) {
        let u = math::wrap_angle(cp.theta) * self.width as f64 / math::TAU;
        let u = if u >= self.width as f64 { 0.0 } else { u };
        (u, (cp.height - self.y_min) * self.scale)
    }

    #[inline]
    pub fn in_band(&self, v: f64) -> bool {
        v >= 0.0 && v < self.rows() as f64
    }

    /// Wall point at the center of pixel `(col, row)`.
    #[inline]
    pub fn pixel_center(&self, col: u32, row: u32) -> CylinderPoint {
        self.pixel_to_cylinder(col as f64 + 0.5, row as f64 + 0.5)
    }

    /// Same band shifted/extended to `[y_min, y_max]`, snapped outward to
    /// whole rows.
    pub fn with_band(width: u32, y_min: f64, y_max: f64, scale: f64) -> Result<Self> {
        let rows = math::ceil((y_max - y_min) * scale).max(1.0);
        Self::new(width, y_min, y_min + rows / scale, scale)
    }
}

/// `(θ, y)` to panorama coordinates.
pub fn cylinder_to_pano(spec: &PanoramaSpec, cp: CylinderPoint) -> (f64, f64) {
    spec.cylinder_to_pixel(cp)
}

/// Panorama coordinates to `(θ, y)`.
pub fn pano_to_cylinder(spec: &PanoramaSpec, u: f64, v: f64) -> CylinderPoint {
    spec.pixel_to_cylinder(u, v)
}

/// Which pose drives the warp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StitchMode {
    /// Measured pose, off-axis position taken into account.
    Corrected,
    /// Measured yaw and height only, camera assumed on the tunnel axis.
    Egocentric,
    /// Planned (noise-free) pose.
    Baseline,
}

impl StitchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            StitchMode::Corrected => "corrected",
            StitchMode::Egocentric => "egocentric",
            StitchMode::Baseline => "baseline",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "corrected" => Some(StitchMode::Corrected),
            "egocentric" => Some(StitchMode::Egocentric),
            "baseline" => Some(StitchMode::Baseline),
            _ => None,
        }
    }

    pub fn pose_for(&self, fp: &FramePose) -> Pose {
        match self {
            StitchMode::Corrected => fp.pose,
            StitchMode::Egocentric => fp.pose.egocentric(),
            StitchMode::Baseline => fp.planned_pose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Bilinear,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StitchOptions {
    pub mode: StitchMode,
    pub sampling: Sampling,
    /// Border samples per image edge for the forward-warped boundary.
    pub boundary_samples: usize,
}

impl Default for StitchOptions {
    fn default() -> Self {
        Self {
            mode: StitchMode::Corrected,
            sampling: Sampling::Bilinear,
            boundary_samples: 32,
        }
    }
}

impl StitchOptions {
    pub fn with_mode(mode: StitchMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// A captured image bound to its poses.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub pose: FramePose,
    pub image: Image,
}

impl Frame {
    pub fn index(&self) -> usize {
        self.pose.index
    }
}

/// Footprint of a frame on the panorama.
///
/// `polygon` is in panorama coordinates with `û` unwrapped to be continuous
/// along the border, so it may extend past `[0, width)`; [`WarpBoundary::pieces`]
/// cuts it at the seam.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpBoundary {
    pub polygon: Vec<[f64; 2]>,
    /// The footprint winds all the way around the tunnel (camera looking
    /// along the axis). Every column in `v_range` is then a candidate.
    pub full_wrap: bool,
    pub v_range: (f64, f64),
    width: u32,
}

impl WarpBoundary {
    /// The boundary clipped to `[0, width]`, one polygon per side of the seam.
    pub fn pieces(&self) -> Vec<Vec<[f64; 2]>> {
        let w = self.width as f64;
        if self.full_wrap {
            let (v0, v1) = self.v_range;
            return vec![vec![[0.0, v0], [w, v0], [w, v1], [0.0, v1]]];
        }
        let mut out = Vec::new();
        for shift in [-w, 0.0, w] {
            let shifted: Vec<[f64; 2]> = self.polygon.iter().map(|p| [p[0] + shift, p[1]]).collect();
            let clipped = clip_to_strip(&shifted, 0.0, w);
            if clipped.len() >= 3 && polygon_area(&clipped).abs() > 1e-12 {
                out.push(clipped);
            }
        }
        out
    }

    /// Column spans `[a, b]` of the boundary on the horizontal line `v`,
    /// in `[0, width]`.
    pub fn spans_at(&self, v: f64) -> Vec<(f64, f64)> {
        let mut spans = Vec::new();
        for piece in self.pieces() {
            scanline_spans(&piece, v, &mut spans);
        }
        spans
    }

    /// Whether the continuous panorama point lies inside the footprint.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.spans_at(v).iter().any(|&(a, b)| u >= a && u <= b)
    }
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Sutherland-Hodgman against `lo <= u <= hi`.
fn clip_to_strip(poly: &[[f64; 2]], lo: f64, hi: f64) -> Vec<[f64; 2]> {
    let keep_lo = |p: &[f64; 2]| p[0] >= lo;
    let keep_hi = |p: &[f64; 2]| p[0] <= hi;
    let stage1 = clip_half_plane(poly, keep_lo, lo);
    clip_half_plane(&stage1, keep_hi, hi)
}

fn clip_half_plane(poly: &[[f64; 2]], inside: impl Fn(&[f64; 2]) -> bool, edge_u: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 4);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let cur = poly[i];
        let prev = poly[(i + n - 1) % n];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let t = (edge_u - prev[0]) / (cur[0] - prev[0]);
            out.push([edge_u, prev[1] + t * (cur[1] - prev[1])]);
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

/// Even-odd crossings of a closed polygon with the line `v`, appended as
/// `(a, b)` spans.
fn scanline_spans(poly: &[[f64; 2]], v: f64, spans: &mut Vec<(f64, f64)>) {
    let n = poly.len();
    let mut xs: Vec<f64> = Vec::new();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        if (p[1] <= v) != (q[1] <= v) {
            xs.push(p[0] + (v - p[1]) * (q[0] - p[0]) / (q[1] - p[1]));
        }
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    for pair in xs.chunks_exact(2) {
        spans.push((pair[0], pair[1]));
    }
}

/// Border of the image, walked clockwise in pixel space, `samples` points
/// per edge.
fn border_samples(intr: &CameraIntrinsics, samples: usize) -> Vec<PixelCoord> {
    let (w, h) = (intr.width as f64, intr.height as f64);
    let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let n = samples.max(1);
    let mut out = Vec::with_capacity(4 * n);
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        for s in 0..n {
            let t = s as f64 / n as f64;
            out.push(PixelCoord::new(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

/// Push the frame's border (corners plus `samples` points per edge, since
/// the warp bends straight edges) onto the panorama.
///
/// Border samples whose rays miss the wall are dropped.
pub fn forward_warp_boundary(
    frame: &FramePose,
    intr: &CameraIntrinsics,
    cyl: &CylinderModel,
    spec: &PanoramaSpec,
    mode: StitchMode,
    samples: usize,
) -> Result<WarpBoundary> {
    boundary_for_pose(frame.index, &mode.pose_for(frame), intr, cyl, spec, samples)
}

fn boundary_for_pose(
    index: usize,
    pose: &Pose,
    intr: &CameraIntrinsics,
    cyl: &CylinderModel,
    spec: &PanoramaSpec,
    samples: usize,
) -> Result<WarpBoundary> {
    let w = spec.width as f64;
    let mut polygon: Vec<[f64; 2]> = Vec::new();
    for p in border_samples(intr, samples) {
        let Ok(cp) = pixel_to_cylinder(intr, pose, cyl, p) else {
            continue;
        };
        let (mut u, v) = spec.cylinder_to_pixel(cp);
        if let Some(prev) = polygon.last() {
            let d = u - prev[0];
            u = prev[0] + d - w * math::round(d / w);
        }
        polygon.push([u, v]);
    }
    if polygon.len() < 3 {
        return Err(Error::DegenerateBoundary(index));
    }
    let (first, last) = (polygon[0], polygon[polygon.len() - 1]);
    let mut closing = first[0] - last[0];
    closing -= w * math::round(closing / w);
    let winding = last[0] + closing - first[0];
    let v_min = polygon.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let v_max = polygon.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    Ok(WarpBoundary {
        polygon,
        full_wrap: math::abs(winding) > 0.5 * w,
        v_range: (v_min, v_max),
        width: spec.width,
    })
}

/// Feather weight of a source pixel: distance to the nearest image border,
/// normalized so the image center has weight 1. Strictly positive inside.
#[inline]
pub fn feather_weight(intr: &CameraIntrinsics, p: PixelCoord) -> f64 {
    let (w, h) = (intr.width as f64, intr.height as f64);
    let du = p.u.min(w - p.u) / (0.5 * w);
    let dv = p.v.min(h - p.v) / (0.5 * h);
    du.min(dv).max(1e-6)
}

/// Everything needed to inverse-warp one frame.
#[derive(Debug, Clone)]
pub struct FrameWarp<'a> {
    pub frame: &'a Frame,
    pub pose: Pose,
    pub boundary: WarpBoundary,
    pieces: Vec<Vec<[f64; 2]>>,
    intr: CameraIntrinsics,
    cyl: CylinderModel,
    spec: PanoramaSpec,
    sampling: Sampling,
}

impl<'a> FrameWarp<'a> {
    pub fn new(
        frame: &'a Frame,
        intr: &CameraIntrinsics,
        cyl: &CylinderModel,
        spec: &PanoramaSpec,
        opts: &StitchOptions,
    ) -> Result<Self> {
        let boundary = forward_warp_boundary(&frame.pose, intr, cyl, spec, opts.mode, opts.boundary_samples)?;
        Ok(Self::with_boundary(frame, intr, cyl, spec, opts, boundary))
    }

    pub fn with_boundary(
        frame: &'a Frame,
        intr: &CameraIntrinsics,
        cyl: &CylinderModel,
        spec: &PanoramaSpec,
        opts: &StitchOptions,
        boundary: WarpBoundary,
    ) -> Self {
        let pieces = boundary.pieces();
        Self {
            frame,
            pose: opts.mode.pose_for(&frame.pose),
            boundary,
            pieces,
            intr: *intr,
            cyl: *cyl,
            spec: *spec,
            sampling: opts.sampling,
        }
    }

    /// Rows the boundary touches, padded by one.
    pub fn row_range(&self) -> core::ops::Range<u32> {
        let (v0, v1) = self.boundary.v_range;
        let rows = self.spec.rows() as f64;
        let lo = (math::floor(v0) - 1.0).clamp(0.0, rows);
        let hi = (math::floor(v1) + 2.0).clamp(0.0, rows);
        lo as u32..hi as u32
    }

    /// Candidate columns on `row`: boundary spans at the row center, padded
    /// by one pixel and merged.
    pub fn row_columns(&self, row: u32, padded: bool) -> Vec<(u32, u32)> {
        let v = row as f64 + 0.5;
        let mut spans = Vec::new();
        for piece in &self.pieces {
            scanline_spans(piece, v, &mut spans);
        }
        column_ranges(&spans, self.spec.width, padded)
    }

    /// Visit every panorama pixel of `row` this frame contributes to, with the
    /// sampled color and feather weight.
    pub fn warp_row(&self, row: u32, mut visit: impl FnMut(u32, Rgb, f64)) {
        if !self.row_range().contains(&row) {
            return;
        }
        for (c0, c1) in self.row_columns(row, true) {
            for col in c0..c1 {
                let cp = self.spec.pixel_center(col, row);
                let Some(p) = cylinder_to_pixel(&self.intr, &self.pose, &self.cyl, cp) else {
                    continue;
                };
                let sample = match self.sampling {
                    Sampling::Bilinear => self.frame.image.sample_bilinear(p.u, p.v),
                    Sampling::Nearest => self.frame.image.sample_nearest(p.u, p.v),
                };
                if let Some(color) = sample {
                    visit(col, color, feather_weight(&self.intr, p));
                }
            }
        }
    }
}

/// Half-open integer column ranges covering the spans, merged and clipped to
/// `[0, width)`. Unpadded ranges include a column when its center lies in a
/// span.
fn column_ranges(spans: &[(f64, f64)], width: u32, padded: bool) -> Vec<(u32, u32)> {
    let w = width as f64;
    let mut ranges: Vec<(u32, u32)> = spans
        .iter()
        .filter_map(|&(a, b)| {
            let (lo, hi) = if padded {
                (math::floor(a) - 1.0, math::floor(b) + 2.0)
            } else {
                (math::ceil(a - 0.5), math::floor(b - 0.5) + 1.0)
            };
            let (lo, hi) = (lo.clamp(0.0, w), hi.clamp(0.0, w));
            (hi > lo).then_some((lo as u32, hi as u32))
        })
        .collect();
    ranges.sort_unstable();
    let mut merged: Vec<(u32, u32)> = Vec::with_capacity(ranges.len());
    for r in ranges {
        match merged.last_mut() {
            Some(last) if r.0 <= last.1 => last.1 = last.1.max(r.1),
            _ => merged.push(r),
        }
    }
    merged
}

/// Running weighted sums for a panorama.
#[derive(Debug, Clone, PartialEq)]
pub struct PanoramaAccumulator {
    spec: PanoramaSpec,
    color: Vec<[f64; 3]>,
    weight: Vec<f64>,
}

impl PanoramaAccumulator {
    pub fn new(spec: PanoramaSpec) -> Self {
        Self {
            spec,
            color: vec![[0.0; 3]; spec.len()],
            weight: vec![0.0; spec.len()],
        }
    }

    pub fn from_parts(spec: PanoramaSpec, color: Vec<[f64; 3]>, weight: Vec<f64>) -> Result<Self> {
        if color.len() != spec.len() || weight.len() != spec.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "accumulator buffers must hold {} pixels",
                spec.len()
            )));
        }
        Ok(Self { spec, color, weight })
    }

    pub fn spec(&self) -> &PanoramaSpec {
        &self.spec
    }

    /// Mutable row slices for row-parallel drivers.
    pub fn rows_mut(&mut self) -> impl Iterator<Item = (u32, &mut [[f64; 3]], &mut [f64])> {
        let w = self.spec.width as usize;
        self.color
            .chunks_exact_mut(w)
            .zip(self.weight.chunks_exact_mut(w))
            .enumerate()
            .map(|(r, (c, wt))| (r as u32, c, wt))
    }

    /// Normalize and build the coverage mask.
    pub fn finish(self) -> Result<Panorama> {
        let mut color = Vec::with_capacity(self.color.len());
        let mut coverage = Vec::with_capacity(self.color.len());
        for (c, &w) in self.color.iter().zip(&self.weight) {
            if w > 0.0 {
                color.push([(c[0] / w) as f32, (c[1] / w) as f32, (c[2] / w) as f32]);
                coverage.push(true);
            } else {
                color.push([0.0; 3]);
                coverage.push(false);
            }
        }
        if !coverage.iter().any(|c| *c) {
            return Err(Error::ZeroCoverage);
        }
        Ok(Panorama {
            spec: self.spec,
            color,
            weight: self.weight,
            coverage,
        })
    }
}

/// Add the contributions of `warps` (in order) to one row.
pub fn accumulate_row(warps: &[FrameWarp<'_>], row: u32, color: &mut [[f64; 3]], weight: &mut [f64]) {
    for warp in warps {
        warp.warp_row(row, |col, c, w| {
            let px = &mut color[col as usize];
            px[0] += c[0] as f64 * w;
            px[1] += c[1] as f64 * w;
            px[2] += c[2] as f64 * w;
            weight[col as usize] += w;
        });
    }
}

/// Inverse-warp one frame inside `boundary` into the accumulator.
pub fn inverse_warp_fill(
    frame: &Frame,
    intr: &CameraIntrinsics,
    cyl: &CylinderModel,
    boundary: &WarpBoundary,
    pano: &mut PanoramaAccumulator,
    opts: &StitchOptions,
) {
    let spec = pano.spec;
    let warp = FrameWarp::with_boundary(frame, intr, cyl, &spec, opts, boundary.clone());
    let warps = core::slice::from_ref(&warp);
    for (row, color, weight) in pano.rows_mut() {
        accumulate_row(warps, row, color, weight);
    }
}

/// Frame warps in ascending frame index. Frames whose border never meets the
/// wall are skipped.
pub fn prepare_warps<'a>(
    frames: &'a [Frame],
    intr: &CameraIntrinsics,
    cyl: &CylinderModel,
    spec: &PanoramaSpec,
    opts: &StitchOptions,
) -> Result<Vec<FrameWarp<'a>>> {
    if frames.is_empty() {
        return Err(Error::NoFrames);
    }
    let mut order: Vec<&Frame> = frames.iter().collect();
    order.sort_by_key(|f| f.index());
    let mut warps = Vec::with_capacity(order.len());
    for frame in order {
        match FrameWarp::new(frame, intr, cyl, spec, opts) {
            Ok(w) => warps.push(w),
            Err(Error::DegenerateBoundary(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(warps)
}

/// Stitch `frames` into a panorama (sequential driver).
pub fn composite(
    frames: &[Frame],
    intr: &CameraIntrinsics,
    cyl: &CylinderModel,
    spec: &PanoramaSpec,
    opts: &StitchOptions,
) -> Result<Panorama> {
    let warps = prepare_warps(frames, intr, cyl, spec, opts)?;
    let mut acc = PanoramaAccumulator::new(*spec);
    for (row, color, weight) in acc.rows_mut() {
        accumulate_row(&warps, row, color, weight);
    }
    acc.finish()
}

/// Rows in which every column lies inside at least one frame boundary.
pub fn theta_complete_rows(warps: &[FrameWarp<'_>], spec: &PanoramaSpec) -> Vec<bool> {
    (0..spec.rows())
        .map(|row| {
            let mut spans = Vec::new();
            for warp in warps {
                if warp.row_range().contains(&row) {
                    spans.extend(warp.row_columns(row, false));
                }
            }
            spans.sort_unstable();
            let mut reach = 0;
            for (a, b) in spans {
                if a > reach {
                    break;
                }
                reach = reach.max(b);
            }
            reach >= spec.width
        })
        .collect()
}

/// Panorama bounds covering every frame's footprint.
pub fn band_for_frames(
    frames: &[FramePose],
    intr: &CameraIntrinsics,
    cyl: &CylinderModel,
    width: u32,
    scale: f64,
    mode: StitchMode,
) -> Result<PanoramaSpec> {
    if frames.is_empty() {
        return Err(Error::NoFrames);
    }
    // Height is independent of the panorama's own y range.
    let probe = PanoramaSpec::new(width, 0.0, 1.0, 1.0)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for fp in frames {
        if let Ok(b) = forward_warp_boundary(fp, intr, cyl, &probe, mode, 32) {
            lo = lo.min(b.v_range.0);
            hi = hi.max(b.v_range.1);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::ZeroCoverage);
    }
    PanoramaSpec::with_band(width, lo, hi, scale)
}

/// Finished panorama.
#[derive(Debug, Clone, PartialEq)]
pub struct Panorama {
    pub spec: PanoramaSpec,
    pub color: Vec<Rgb>,
    pub weight: Vec<f64>,
    pub coverage: Vec<bool>,
}

impl Panorama {
    pub fn coverage_fraction(&self) -> f64 {
        let n = self.coverage.iter().filter(|c| **c).count();
        n as f64 / self.coverage.len().max(1) as f64
    }

    /// Colors as an image, uncovered pixels black and marked invalid.
    pub fn to_image(&self) -> Image {
        let mut img = Image::from_pixels(self.spec.width, self.spec.rows(), self.color.clone())
            .expect("panorama buffers match spec");
        img.set_validity(self.coverage.clone());
        img
    }

    pub fn psnr(&self, reference: &Image) -> Result<f64> {
        psnr(&self.to_image(), reference, &self.coverage)
    }
}

/// Peak signal-to-noise ratio on a unit intensity scale over masked pixels.
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(image: &Image, reference: &Image, mask: &[bool]) -> Result<f64> {
    if image.width() != reference.width() || image.height() != reference.height() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{}x{} vs {}x{}",
            image.width(),
            image.height(),
            reference.width(),
            reference.height()
        )));
    }
    if mask.len() != image.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "mask has {} entries for {} pixels",
            mask.len(),
            image.len()
        )));
    }
    let (mut sse, mut n) = (0.0f64, 0usize);
    for ((a, b), _) in image
        .pixels()
        .iter()
        .zip(reference.pixels())
        .zip(mask)
        .filter(|(_, m)| **m)
    {
        for ch in 0..3 {
            let d = a[ch] as f64 - b[ch] as f64;
            sse += d * d;
        }
        n += 3;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let mse = sse / n as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * math::log10(1.0 / mse))
}
