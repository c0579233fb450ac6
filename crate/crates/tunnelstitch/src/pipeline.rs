//! Simulation, stitching, evaluation and export, with the row loops spread
//! over a rayon pool. Every parallel loop writes disjoint rows and sums in a
//! fixed frame order, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tunnelstitch_core::mesh::{build_curved_mesh, build_straight_mesh};
use tunnelstitch_core::metrics::{edge_straightness, EdgeStraightness, TrackParams};
use tunnelstitch_core::render::{check_inside, render_oracle_row, render_row};
use tunnelstitch_core::stitch::{
    accumulate_row, band_for_frames, prepare_warps, psnr, theta_complete_rows, Frame, FrameWarp, Panorama,
    PanoramaAccumulator, PanoramaSpec, StitchMode,
};
use tunnelstitch_core::texture::TextureKind;
use tunnelstitch_core::trajectory::{generate, FramePose};
use tunnelstitch_core::{Image, Pose};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::imageio::{read_bytes, read_image, read_mask, write_bytes, write_image, write_mask};
use crate::meshio::{read_curve, write_mesh, MeshFiles};
use crate::trajfile::{read_trajectory, write_trajectory};

pub const TRAJECTORY_FILE: &str = "trajectory.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const PANORAMA_HEADER: &str = "tunnelstitch-panorama v1";

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.ppm")
}

/// Render one view with rows in parallel.
pub fn render_view_parallel(cfg: &ExperimentConfig, pose: &Pose) -> Result<Image> {
    check_inside(pose, &cfg.cylinder)?;
    let intr = &cfg.camera;
    let w = intr.width as usize;
    let mut img = Image::new(intr.width, intr.height);
    let mut valid = vec![false; img.len()];
    img.pixels_mut()
        .par_chunks_exact_mut(w)
        .zip(valid.par_chunks_exact_mut(w))
        .enumerate()
        .for_each(|(row, (px, ok))| {
            render_row(intr, pose, &cfg.cylinder, &cfg.texture, &cfg.render, row as u32, px, ok);
        });
    img.set_validity(valid);
    Ok(img)
}

pub fn render_oracle_parallel(cfg: &ExperimentConfig, spec: &PanoramaSpec) -> Image {
    let mut img = Image::new(spec.width(), spec.rows());
    let w = spec.width() as usize;
    img.pixels_mut()
        .par_chunks_exact_mut(w)
        .enumerate()
        .for_each(|(row, px)| render_oracle_row(&cfg.texture, &cfg.render, spec, row as u32, px));
    img
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: ExperimentConfig,
    pub frames: Vec<Frame>,
}

impl Dataset {
    pub fn poses(&self) -> Vec<FramePose> {
        self.frames.iter().map(|f| f.pose).collect()
    }
}

/// Generate the trajectory and render every frame.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Dataset> {
    let poses = generate(&cfg.trajectory, Some(&cfg.cylinder))?;
    let frames = poses
        .into_iter()
        .map(|pose| {
            Ok(Frame {
                image: render_view_parallel(cfg, &pose.pose)?,
                pose,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        config: cfg.clone(),
        frames,
    })
}

pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for f in &ds.frames {
        write_image(&dir.join(frame_file_name(f.index())), &f.image)?;
    }
    write_trajectory(&dir.join(TRAJECTORY_FILE), &ds.poses())?;
    write_bytes(&dir.join(CONFIG_FILE), ds.config.to_text().as_bytes())
}

pub fn read_dataset_config(dir: &Path) -> Result<ExperimentConfig> {
    let path = dir.join(CONFIG_FILE);
    let text = String::from_utf8(read_bytes(&path)?).map_err(|_| Error::format(&path, "not UTF-8"))?;
    ExperimentConfig::parse_text(&text, &path)
}

/// Load the frames listed in the dataset's trajectory file.
pub fn read_dataset(dir: &Path, config: ExperimentConfig) -> Result<Dataset> {
    let poses = read_trajectory(&dir.join(TRAJECTORY_FILE))?;
    let missing: Vec<usize> = poses
        .iter()
        .map(|p| p.index)
        .filter(|i| !dir.join(frame_file_name(*i)).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFrames {
            dir: dir.to_path_buf(),
            missing,
        });
    }
    let frames = poses
        .into_iter()
        .map(|pose| {
            let path = dir.join(frame_file_name(pose.index));
            let image = read_image(&path)?;
            if (image.width(), image.height()) != (config.camera.width, config.camera.height) {
                return Err(Error::format(
                    &path,
                    format!(
                        "frame is {}x{} but the camera is {}x{}",
                        image.width(),
                        image.height(),
                        config.camera.width,
                        config.camera.height
                    ),
                ));
            }
            Ok(Frame { pose, image })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { config, frames })
}

/// Panorama grid: the configured band, or the footprint of the measured
/// poses. The band never depends on the stitch mode so panoramas of the same
/// dataset in different modes share one grid.
pub fn panorama_spec(cfg: &ExperimentConfig, poses: &[FramePose]) -> Result<PanoramaSpec> {
    let scale = cfg.panorama_scale();
    Ok(match cfg.panorama.band {
        Some((lo, hi)) => PanoramaSpec::new(cfg.panorama.width, lo, hi, scale)?,
        None => band_for_frames(
            poses,
            &cfg.camera,
            &cfg.cylinder,
            cfg.panorama.width,
            scale,
            StitchMode::Corrected,
        )?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameStats {
    pub index: usize,
    /// Panorama pixels this frame contributed to.
    pub pixels: usize,
    pub weight: f64,
    /// The frame's own warp against the blended panorama on those pixels.
    pub psnr_db: f64,
}

#[derive(Debug, Clone)]
pub struct StitchResult {
    pub mode: StitchMode,
    pub panorama: Panorama,
    pub frame_stats: Vec<FrameStats>,
    /// Rows where the frame footprints close all the way around.
    pub theta_complete: Vec<bool>,
}

impl StitchResult {
    /// Coverage restricted to theta-complete rows.
    pub fn band_coverage(&self) -> Option<f64> {
        band_coverage(
            &self.panorama.coverage,
            &self.theta_complete,
            self.panorama.spec.width(),
        )
    }
}

pub fn band_coverage(coverage: &[bool], rows: &[bool], width: u32) -> Option<f64> {
    let w = width as usize;
    let (mut n, mut hit) = (0usize, 0usize);
    for (row, &full) in rows.iter().enumerate() {
        if full {
            n += w;
            hit += coverage[row * w..(row + 1) * w].iter().filter(|c| **c).count();
        }
    }
    (n > 0).then(|| hit as f64 / n as f64)
}

/// Row-parallel composite; bit-identical to the sequential core driver.
pub fn composite_parallel(warps: &[FrameWarp<'_>], spec: &PanoramaSpec) -> Result<Panorama> {
    let mut acc = PanoramaAccumulator::new(*spec);
    let rows: Vec<_> = acc.rows_mut().collect();
    rows.into_par_iter()
        .for_each(|(row, color, weight)| accumulate_row(warps, row, color, weight));
    Ok(acc.finish()?)
}

fn frame_stats(warp: &FrameWarp<'_>, pano: &Panorama) -> FrameStats {
    let w = pano.spec.width() as usize;
    let (mut pixels, mut weight, mut sq) = (0usize, 0.0, 0.0);
    for row in warp.row_range() {
        warp.warp_row(row, |col, c, wt| {
            let p = pano.color[row as usize * w + col as usize];
            pixels += 1;
            weight += wt;
            sq += (0..3).map(|k| ((c[k] - p[k]) as f64).powi(2)).sum::<f64>();
        });
    }
    let mse = sq / (3 * pixels.max(1)) as f64;
    FrameStats {
        index: warp.frame.index(),
        pixels,
        weight,
        psnr_db: if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() },
    }
}

pub fn stitch(cfg: &ExperimentConfig, frames: &[Frame], spec: &PanoramaSpec) -> Result<StitchResult> {
    let warps = prepare_warps(frames, &cfg.camera, &cfg.cylinder, spec, &cfg.stitch)?;
    let panorama = composite_parallel(&warps, spec)?;
    let frame_stats = warps.par_iter().map(|w| frame_stats(w, &panorama)).collect();
    let theta_complete = theta_complete_rows(&warps, spec);
    Ok(StitchResult {
        mode: cfg.stitch.mode,
        panorama,
        frame_stats,
        theta_complete,
    })
}

/// Stitch a dataset on its own panorama grid.
pub fn stitch_dataset(ds: &Dataset) -> Result<StitchResult> {
    let spec = panorama_spec(&ds.config, &ds.poses())?;
    stitch(&ds.config, &ds.frames, &spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanoramaFiles {
    pub image: PathBuf,
    pub mask: PathBuf,
    pub metadata: PathBuf,
}

impl PanoramaFiles {
    /// Sidecar paths next to `image`: `{stem}_mask.pgm` and `{stem}.txt`.
    pub fn for_image(image: &Path) -> Self {
        let stem = image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let dir = image.parent().unwrap_or(Path::new(""));
        Self {
            image: image.to_path_buf(),
            mask: dir.join(format!("{stem}_mask.pgm")),
            metadata: dir.join(format!("{stem}.txt")),
        }
    }
}

fn row_runs(rows: &[bool]) -> String {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &r) in rows.iter().chain(std::iter::once(&false)).enumerate() {
        match (r, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(format!("{s}-{}", i - 1));
                start = None;
            }
            _ => {}
        }
    }
    runs.join(",")
}

fn parse_row_runs(s: &str, rows: u32) -> Option<Vec<bool>> {
    let mut out = vec![false; rows as usize];
    for run in s.split(',').filter(|r| !r.is_empty()) {
        let (a, b) = run.split_once('-')?;
        let (a, b): (usize, usize) = (a.parse().ok()?, b.parse().ok()?);
        if a > b || b >= out.len() {
            return None;
        }
        out[a..=b].iter_mut().for_each(|x| *x = true);
    }
    Some(out)
}

pub fn format_metadata(res: &StitchResult, cfg: &ExperimentConfig) -> String {
    let s = &res.panorama.spec;
    let mut t = format!("{PANORAMA_HEADER}\n");
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(t, "{k}={v}");
    };
    kv("mode", res.mode.as_str().into());
    kv("radius", cfg.cylinder.radius().to_string());
    kv("width", s.width().to_string());
    kv("rows", s.rows().to_string());
    kv("y_min", s.y_min().to_string());
    kv("y_max", s.y_max().to_string());
    kv("scale", s.scale().to_string());
    kv("frames", res.frame_stats.len().to_string());
    kv("coverage", res.panorama.coverage_fraction().to_string());
    kv(
        "band_coverage",
        res.band_coverage().map_or("none".into(), |c| c.to_string()),
    );
    kv("theta_complete_rows", row_runs(&res.theta_complete));
    for f in &res.frame_stats {
        kv(&format!("frame.{:05}.pixels", f.index), f.pixels.to_string());
        kv(&format!("frame.{:05}.weight", f.index), f.weight.to_string());
        kv(&format!("frame.{:05}.psnr_db", f.index), f.psnr_db.to_string());
    }
    t
}

pub fn write_panorama(res: &StitchResult, cfg: &ExperimentConfig, image: &Path) -> Result<PanoramaFiles> {
    let files = PanoramaFiles::for_image(image);
    let s = &res.panorama.spec;
    write_image(&files.image, &res.panorama.to_image())?;
    write_mask(&files.mask, s.width(), s.rows(), &res.panorama.coverage)?;
    write_bytes(&files.metadata, format_metadata(res, cfg).as_bytes())?;
    Ok(files)
}

/// A panorama read back from disk.
#[derive(Debug, Clone)]
pub struct StoredPanorama {
    pub image: Image,
    pub coverage: Vec<bool>,
    pub spec: PanoramaSpec,
    pub theta_complete: Vec<bool>,
    pub metadata: BTreeMap<String, String>,
}

pub fn read_panorama(image: &Path) -> Result<StoredPanorama> {
    let files = PanoramaFiles::for_image(image);
    let mpath = &files.metadata;
    let text = String::from_utf8(read_bytes(mpath)?).map_err(|_| Error::format(mpath, "not UTF-8"))?;
    let mut lines = text.lines();
    if lines.next() != Some(PANORAMA_HEADER) {
        return Err(Error::parse(mpath, 1, format!("expected header {PANORAMA_HEADER:?}")));
    }
    let metadata: BTreeMap<String, String> = lines
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let num = |k: &str| -> Result<f64> {
        metadata
            .get(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::format(mpath, format!("missing or bad {k}")))
    };
    let spec = PanoramaSpec::new(num("width")? as u32, num("y_min")?, num("y_max")?, num("scale")?)?;
    let theta_complete = metadata
        .get("theta_complete_rows")
        .and_then(|s| parse_row_runs(s, spec.rows()))
        .ok_or_else(|| Error::format(mpath, "missing or bad theta_complete_rows"))?;
    let img = read_image(&files.image)?;
    let (mw, mh, coverage) = read_mask(&files.mask)?;
    if (img.width(), img.height()) != (spec.width(), spec.rows()) || (mw, mh) != (spec.width(), spec.rows()) {
        return Err(Error::format(
            &files.image,
            format!(
                "image {}x{} and mask {mw}x{mh} do not match the {}x{} grid in the metadata",
                img.width(),
                img.height(),
                spec.width(),
                spec.rows()
            ),
        ));
    }
    Ok(StoredPanorama {
        image: img,
        coverage,
        spec,
        theta_complete,
        metadata,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub psnr_db: f64,
    pub coverage: f64,
    pub band_coverage: Option<f64>,
    pub straightness: Option<EdgeStraightness>,
}

impl EvalReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "psnr_db={}", self.psnr_db);
        let _ = writeln!(s, "coverage={}", self.coverage);
        let _ = writeln!(
            s,
            "band_coverage={}",
            self.band_coverage.map_or("none".into(), |c| c.to_string())
        );
        if let Some(st) = &self.straightness {
            let _ = writeln!(s, "straightness_px={}", st.max_deviation());
            let _ = writeln!(s, "straightness_vertical_px={}", st.vertical_px);
            let _ = writeln!(s, "straightness_horizontal_px={}", st.horizontal_px);
            let _ = writeln!(s, "vertical_edges={}", st.vertical_edges);
            let _ = writeln!(s, "horizontal_edges={}", st.horizontal_edges);
        }
        s
    }

    pub fn to_human(&self) -> String {
        let mut s = format!(
            "PSNR vs reference: {} dB\ncoverage: {:.4}%\n",
            if self.psnr_db.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.3}", self.psnr_db)
            },
            100.0 * self.coverage
        );
        if let Some(b) = self.band_coverage {
            let _ = writeln!(s, "coverage of theta-complete band: {:.4}%", 100.0 * b);
        }
        if let Some(st) = &self.straightness {
            let _ = writeln!(
                s,
                "edge straightness: {:.3} px max ({} vertical edges, {:.3} px; {} horizontal edges, {:.3} px)",
                st.max_deviation(),
                st.vertical_edges,
                st.vertical_px,
                st.horizontal_edges,
                st.horizontal_px
            );
        }
        s
    }
}

/// Compare `pano` with `reference` (default: the oracle panorama of `cfg`)
/// over its coverage mask.
pub fn evaluate(cfg: &ExperimentConfig, pano: &StoredPanorama, reference: Option<&Image>) -> Result<EvalReport> {
    let oracle;
    let reference = match reference {
        Some(r) => r,
        None => {
            oracle = render_oracle_parallel(cfg, &pano.spec);
            &oracle
        }
    };
    let psnr_db = psnr(&pano.image, reference, &pano.coverage)?;
    let coverage = pano.coverage.iter().filter(|c| **c).count() as f64 / pano.coverage.len() as f64;
    let straightness = matches!(cfg.texture.kind, TextureKind::Checkerboard | TextureKind::Brick).then(|| {
        let (a, b) = cfg.tile_luminances();
        edge_straightness(&pano.image, &pano.coverage, a, b, &TrackParams::default())
    });
    Ok(EvalReport {
        psnr_db,
        coverage,
        band_coverage: band_coverage(&pano.coverage, &pano.theta_complete, pano.spec.width()),
        straightness,
    })
}

/// PSNR of two panoramas on the same grid over the pixels both cover.
pub fn joint_psnr(a: &StoredPanorama, b: &StoredPanorama, reference: &Image) -> Result<(f64, f64)> {
    let mask: Vec<bool> = a.coverage.iter().zip(&b.coverage).map(|(x, y)| *x && *y).collect();
    Ok((psnr(&a.image, reference, &mask)?, psnr(&b.image, reference, &mask)?))
}

pub fn export_mesh(cfg: &ExperimentConfig, pano: &StoredPanorama, prefix: &Path) -> Result<MeshFiles> {
    let r = cfg.cylinder.radius();
    let m = &cfg.mesh;
    let spec = &pano.spec;
    let mut header = vec![format!(
        "panorama band y = [{}, {}] m, radius {r} m",
        spec.y_min(),
        spec.y_max()
    )];
    let mesh = match &m.curve {
        None => build_straight_mesh(r, spec.y_max() - spec.y_min(), m.radial_segments, m.axial_segments)?,
        Some(path) => {
            header.push(format!("centerline from {}", path.display()));
            header.push("curved sweep: the straight-tunnel panorama is applied for display only".into());
            build_curved_mesh(&read_curve(path)?, r, m.radial_segments, m.segments_per_span)?
        }
    };
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_mesh(&mesh, &pano.image, prefix, &header)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tunnelstitch_core::stitch::composite;

    fn small(preset: &str) -> ExperimentConfig {
        ExperimentConfig::load(
            Some(preset),
            None,
            &[
                "camera.width=96".into(),
                "camera.height=72".into(),
                "panorama.width=256".into(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parallel_composite_matches_sequential() {
        let cfg = small("fig7");
        let ds = simulate(&cfg).unwrap();
        let spec = panorama_spec(&cfg, &ds.poses()).unwrap();
        let par = stitch(&cfg, &ds.frames, &spec).unwrap().panorama;
        let seq = composite(&ds.frames, &cfg.camera, &cfg.cylinder, &spec, &cfg.stitch).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn parallel_render_matches_core() {
        let cfg = small("fig7");
        let pose = Pose::from_yaw(0.7, tunnelstitch_core::Vec3::new(0.5, 0.1, 0.5));
        let core = tunnelstitch_core::render::render_view(&cfg.camera, &pose, &cfg.cylinder, &cfg.texture, &cfg.render)
            .unwrap();
        assert_eq!(render_view_parallel(&cfg, &pose).unwrap(), core);
    }

    #[test]
    fn row_runs_round_trip() {
        let rows = [false, true, true, false, true, false, false, true];
        let s = row_runs(&rows);
        assert_eq!(s, "1-2,4-4,7-7");
        assert_eq!(parse_row_runs(&s, 8).unwrap(), rows);
        assert_eq!(parse_row_runs("", 3).unwrap(), vec![false; 3]);
        assert!(parse_row_runs("2-9", 3).is_none());
    }

    #[test]
    fn frame_stats_cover_every_frame() {
        let cfg = small("fig5");
        let ds = simulate(&cfg).unwrap();
        let res = stitch_dataset(&ds).unwrap();
        assert_eq!(res.frame_stats.len(), 12);
        assert!(res.frame_stats.iter().all(|f| f.pixels > 0 && f.psnr_db > 25.0));
    }
}
