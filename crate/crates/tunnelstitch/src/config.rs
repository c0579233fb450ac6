//! Experiment configuration: flat `key=value` text with dotted sections.
//!
//! Settings are layered (defaults, preset, file, command-line overrides) as
//! raw strings and then resolved into an [`ExperimentConfig`]. Angles are
//! given either as `*_deg` or `*_rad`; snapshots always use radians so they
//! reload bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tunnelstitch_core::stitch::{Sampling, StitchMode, StitchOptions};
use tunnelstitch_core::texture::{FaultMark, RenderConfig, Shading, TextureKind, TextureSpec};
use tunnelstitch_core::trajectory::{TrajectoryConfig, TrajectoryMode};
use tunnelstitch_core::{CameraIntrinsics, CylinderModel, Rgb, Vec3};

use crate::error::{Error, Result};
use crate::imageio::read_bytes;

pub const PRESETS: [&str; 3] = ["fig5", "fig7", "fig8"];

/// Keys that set the same quantity; setting one clears the others.
const ALIASES: [&[&str]; 3] = [
    &["camera.f", "camera.hfov_deg", "camera.hfov_rad"],
    &["trajectory.yaw_step_deg", "trajectory.yaw_step_rad"],
    &["trajectory.noise_rotation_deg", "trajectory.noise_rotation_rad"],
];

const DEFAULTS: &[(&str, &str)] = &[
    ("seed", "1"),
    ("cylinder.radius", "3"),
    ("camera.width", "640"),
    ("camera.height", "480"),
    ("camera.hfov_deg", "90"),
    ("texture.kind", "checkerboard"),
    ("texture.tiles_around", "16"),
    ("texture.tile_y", "0.5"),
    ("texture.primary", "0.62,0.5,0.4"),
    ("texture.secondary", "0.44,0.36,0.3"),
    ("texture.mortar_fraction", "0.08"),
    ("render.shading", "unlit"),
    ("render.light", "0,0,1"),
    ("render.supersampling", "3"),
    ("trajectory.mode", "stationary"),
    ("trajectory.n_frames", "12"),
    ("trajectory.yaw_step_deg", "30"),
    ("trajectory.translation_step", "0,0,0"),
    ("trajectory.initial_t", "0,0,0"),
    ("trajectory.noise_translation", "0,0,0"),
    ("trajectory.noise_rotation_deg", "0"),
    ("panorama.width", "2048"),
    ("stitch.mode", "corrected"),
    ("stitch.sampling", "bilinear"),
    ("stitch.boundary_samples", "32"),
    ("mesh.radial_segments", "64"),
    ("mesh.axial_segments", "16"),
    ("mesh.segments_per_span", "8"),
];

fn preset_entries(name: &str) -> Option<&'static [(&'static str, &'static str)]> {
    Some(match name {
        "fig5" => &[],
        "fig7" => &[("trajectory.initial_t", "0.5,0,0.5")],
        "fig8" => &[
            ("trajectory.mode", "spiral"),
            ("trajectory.n_frames", "120"),
            ("trajectory.yaw_step_rad", "0.524"),
            ("trajectory.translation_step", "0,0.1,0"),
            ("trajectory.noise_translation", "0.02,0.02,0.03"),
            ("trajectory.noise_rotation_deg", "2"),
        ],
        _ => return None,
    })
}

/// Raw layered settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn defaults() -> Self {
        let mut m = Self::default();
        for (k, v) in DEFAULTS {
            m.set(k, v);
        }
        m
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        if let Some(group) = ALIASES.iter().find(|g| g.contains(&key)) {
            for k in group.iter() {
                self.entries.remove(*k);
            }
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        let entries = preset_entries(name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?} (known: {})", PRESETS.join(", "))))?;
        for (k, v) in entries {
            self.set(k, v);
        }
        Ok(())
    }

    /// Apply one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {kv:?} is not key=value")))?;
        self.set(k.trim(), v);
        Ok(())
    }

    /// Layer the settings from config text; `path` is for error messages.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected key=value"))?;
            self.set(k.trim(), v);
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = String::from_utf8(read_bytes(path)?).map_err(|_| Error::format(path, "not UTF-8"))?;
        self.apply_text(&text, path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanoramaConfig {
    pub width: u32,
    /// Pixels per meter along y; defaults to `width / (2π r)`.
    pub scale: Option<f64>,
    /// World y range; defaults to the frames' footprint.
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub radial_segments: u32,
    pub axial_segments: u32,
    pub segments_per_span: u32,
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cylinder: CylinderModel,
    pub camera: CameraIntrinsics,
    pub texture: TextureSpec,
    pub render: RenderConfig,
    pub trajectory: TrajectoryConfig,
    pub panorama: PanoramaConfig,
    pub stitch: StitchOptions,
    pub mesh: MeshConfig,
    pub output_dir: Option<PathBuf>,
}

struct Reader<'a> {
    map: &'a ConfigMap,
    used: Vec<&'static str>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &'static str) -> Option<&str> {
        self.used.push(key);
        self.map.get(key)
    }

    fn req(&mut self, key: &'static str) -> Result<String> {
        self.raw(key)
            .map(str::to_string)
            .ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &'static str) -> Result<T> {
        let s = self.req(key)?;
        s.parse().map_err(|_| bad(key, &s))
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &'static str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => {
                let s = s.to_string();
                s.parse().map(Some).map_err(|_| bad(key, &s))
            }
        }
    }

    fn triple<T: std::str::FromStr + Copy>(&mut self, key: &'static str) -> Result<[T; 3]> {
        let s = self.req(key)?;
        parse_triple(&s).ok_or_else(|| bad(key, &s))
    }

    fn vec3(&mut self, key: &'static str) -> Result<Vec3> {
        self.triple::<f64>(key).map(Vec3::from)
    }

    /// Radians from whichever of `{stem}_rad` / `{stem}_deg` is present.
    fn angle(&mut self, rad: &'static str, deg: &'static str) -> Result<Option<f64>> {
        if let Some(r) = self.opt::<f64>(rad)? {
            return Ok(Some(r));
        }
        Ok(self.opt::<f64>(deg)?.map(f64::to_radians))
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("{key}: cannot parse {value:?}"))
}

fn parse_triple<T: std::str::FromStr + Copy>(s: &str) -> Option<[T; 3]> {
    let v: Vec<T> = s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?;
    v.try_into().ok()
}

fn parse_fault_marks(s: &str) -> Option<Vec<FaultMark>> {
    s.split(';')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(|m| {
            let v: Vec<f64> = m.split_whitespace().map(|x| x.parse().ok()).collect::<Option<_>>()?;
            let [theta, y, radius_m, r, g, b]: [f64; 6] = v.try_into().ok()?;
            Some(FaultMark {
                theta,
                y,
                radius_m,
                color: [r as f32, g as f32, b as f32],
            })
        })
        .collect()
}

fn core_err(key: &str) -> impl Fn(tunnelstitch_core::Error) -> Error + '_ {
    move |e| Error::Config(format!("{key}: {e}"))
}

impl ExperimentConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let mut r = Reader { map, used: Vec::new() };

        let radius: f64 = r.parse("cylinder.radius")?;
        let cylinder = CylinderModel::new(radius).map_err(core_err("cylinder.radius"))?;

        let width: u32 = r.parse("camera.width")?;
        let height: u32 = r.parse("camera.height")?;
        let f = match r.opt::<f64>("camera.f")? {
            Some(f) => f,
            None => {
                let hfov = r
                    .angle("camera.hfov_rad", "camera.hfov_deg")?
                    .ok_or_else(|| Error::Config("missing camera.f or camera.hfov_deg".into()))?;
                width as f64 / 2.0 / (hfov / 2.0).tan()
            }
        };
        let cx = r.opt("camera.cx")?.unwrap_or(width as f64 / 2.0);
        let cy = r.opt("camera.cy")?.unwrap_or(height as f64 / 2.0);
        let camera = CameraIntrinsics::new(f, cx, cy, width, height).map_err(core_err("camera"))?;

        let kind = match r.req("texture.kind")?.as_str() {
            "checkerboard" => TextureKind::Checkerboard,
            "brick" => TextureKind::Brick,
            "solid" => TextureKind::Solid,
            other => return Err(bad("texture.kind", other)),
        };
        let mut texture = TextureSpec::new(
            kind,
            r.parse("texture.tiles_around")?,
            r.parse("texture.tile_y")?,
            r.triple("texture.primary")?,
            r.triple("texture.secondary")?,
        )
        .map_err(core_err("texture"))?;
        texture.mortar_fraction = r.parse("texture.mortar_fraction")?;
        if let Some(s) = r.raw("texture.fault_marks_rad").map(str::to_string) {
            texture.fault_marks = parse_fault_marks(&s).ok_or_else(|| bad("texture.fault_marks_rad", &s))?;
        }
        texture.wall_radius = radius;
        texture.validate().map_err(core_err("texture"))?;

        let shading = match r.req("render.shading")?.as_str() {
            "unlit" => Shading::Unlit,
            "lambertian" => Shading::LambertianDownward,
            other => return Err(bad("render.shading", other)),
        };
        let light = r.vec3("render.light")?;
        let ss: u32 = r.parse("render.supersampling")?;
        let render = RenderConfig::new(shading, light)
            .and_then(|c| c.with_supersampling(ss))
            .map_err(core_err("render"))?;

        let mode_s = r.req("trajectory.mode")?;
        let trajectory = TrajectoryConfig {
            mode: TrajectoryMode::parse(&mode_s).ok_or_else(|| bad("trajectory.mode", &mode_s))?,
            n_frames: r.parse("trajectory.n_frames")?,
            yaw_step: r
                .angle("trajectory.yaw_step_rad", "trajectory.yaw_step_deg")?
                .ok_or_else(|| Error::Config("missing trajectory.yaw_step_deg".into()))?,
            translation_step: r.vec3("trajectory.translation_step")?,
            initial_t: r.vec3("trajectory.initial_t")?,
            noise_std_translation: r.vec3("trajectory.noise_translation")?,
            noise_std_rotation: r
                .angle("trajectory.noise_rotation_rad", "trajectory.noise_rotation_deg")?
                .unwrap_or(0.0),
            seed: r.parse("seed")?,
        };
        trajectory.validate().map_err(core_err("trajectory"))?;

        let band = match (r.opt::<f64>("panorama.y_min")?, r.opt::<f64>("panorama.y_max")?) {
            (Some(a), Some(b)) if b > a => Some((a, b)),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "panorama.y_min and panorama.y_max must be set together, y_min < y_max".into(),
                ))
            }
        };
        let panorama = PanoramaConfig {
            width: r.parse("panorama.width")?,
            scale: r.opt("panorama.scale")?,
            band,
        };
        if panorama.width == 0 || panorama.scale.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config(
                "panorama.width and panorama.scale must be positive".into(),
            ));
        }

        let smode = r.req("stitch.mode")?;
        let sampling = match r.req("stitch.sampling")?.as_str() {
            "bilinear" => Sampling::Bilinear,
            "nearest" => Sampling::Nearest,
            other => return Err(bad("stitch.sampling", other)),
        };
        let stitch = StitchOptions {
            mode: StitchMode::parse(&smode).ok_or_else(|| bad("stitch.mode", &smode))?,
            sampling,
            boundary_samples: r.parse("stitch.boundary_samples")?,
        };
        if stitch.boundary_samples < 2 {
            return Err(Error::Config("stitch.boundary_samples must be at least 2".into()));
        }

        let mesh = MeshConfig {
            radial_segments: r.parse("mesh.radial_segments")?,
            axial_segments: r.parse("mesh.axial_segments")?,
            segments_per_span: r.parse("mesh.segments_per_span")?,
            curve: r.raw("mesh.curve").map(PathBuf::from),
        };
        let output_dir = r.raw("output.dir").map(PathBuf::from);

        if let Some(k) = map.entries.keys().find(|k| !r.used.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key {k}")));
        }
        Ok(Self {
            cylinder,
            camera,
            texture,
            render,
            trajectory,
            panorama,
            stitch,
            mesh,
            output_dir,
        })
    }

    /// Defaults, then `preset`, then `file`, then `overrides`.
    pub fn load(preset: Option<&str>, file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut map = ConfigMap::defaults();
        if let Some(p) = preset {
            map.apply_preset(p)?;
        }
        if let Some(f) = file {
            map.apply_file(f)?;
        }
        for o in overrides {
            map.apply_override(o)?;
        }
        Self::from_map(&map)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::load(Some(name), None, &[])
    }

    /// Fully explicit settings that reload to an identical config.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# tunnelstitch experiment config\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        let v3 = |v: &Vec3| format!("{},{},{}", v.x, v.y, v.z);
        let rgb = |c: &Rgb| format!("{},{},{}", c[0], c[1], c[2]);
        kv("seed", self.trajectory.seed.to_string());
        kv("cylinder.radius", self.cylinder.radius().to_string());
        let c = &self.camera;
        kv("camera.width", c.width.to_string());
        kv("camera.height", c.height.to_string());
        kv("camera.f", c.f.to_string());
        kv("camera.cx", c.cx.to_string());
        kv("camera.cy", c.cy.to_string());
        let t = &self.texture;
        kv(
            "texture.kind",
            match t.kind {
                TextureKind::Checkerboard => "checkerboard",
                TextureKind::Brick => "brick",
                TextureKind::Solid => "solid",
            }
            .into(),
        );
        kv("texture.tiles_around", t.tiles_around().to_string());
        kv("texture.tile_y", t.tile_y.to_string());
        kv("texture.primary", rgb(&t.primary));
        kv("texture.secondary", rgb(&t.secondary));
        kv("texture.mortar_fraction", t.mortar_fraction.to_string());
        if !t.fault_marks.is_empty() {
            let marks: Vec<String> = t
                .fault_marks
                .iter()
                .map(|m| {
                    format!(
                        "{} {} {} {} {} {}",
                        m.theta, m.y, m.radius_m, m.color[0], m.color[1], m.color[2]
                    )
                })
                .collect();
            kv("texture.fault_marks_rad", marks.join(";"));
        }
        kv(
            "render.shading",
            match self.render.shading {
                Shading::Unlit => "unlit",
                Shading::LambertianDownward => "lambertian",
            }
            .into(),
        );
        kv("render.light", v3(self.render.light_direction()));
        kv("render.supersampling", self.render.supersampling().to_string());
        let tr = &self.trajectory;
        kv("trajectory.mode", tr.mode.as_str().into());
        kv("trajectory.n_frames", tr.n_frames.to_string());
        kv("trajectory.yaw_step_rad", tr.yaw_step.to_string());
        kv("trajectory.translation_step", v3(&tr.translation_step));
        kv("trajectory.initial_t", v3(&tr.initial_t));
        kv("trajectory.noise_translation", v3(&tr.noise_std_translation));
        kv("trajectory.noise_rotation_rad", tr.noise_std_rotation.to_string());
        let p = &self.panorama;
        kv("panorama.width", p.width.to_string());
        if let Some(scale) = p.scale {
            kv("panorama.scale", scale.to_string());
        }
        if let Some((a, b)) = p.band {
            kv("panorama.y_min", a.to_string());
            kv("panorama.y_max", b.to_string());
        }
        kv("stitch.mode", self.stitch.mode.as_str().into());
        kv(
            "stitch.sampling",
            match self.stitch.sampling {
                Sampling::Bilinear => "bilinear",
                Sampling::Nearest => "nearest",
            }
            .into(),
        );
        kv("stitch.boundary_samples", self.stitch.boundary_samples.to_string());
        let m = &self.mesh;
        kv("mesh.radial_segments", m.radial_segments.to_string());
        kv("mesh.axial_segments", m.axial_segments.to_string());
        kv("mesh.segments_per_span", m.segments_per_span.to_string());
        if let Some(c) = &m.curve {
            kv("mesh.curve", c.display().to_string());
        }
        if let Some(d) = &self.output_dir {
            kv("output.dir", d.display().to_string());
        }
        s
    }

    pub fn parse_text(text: &str, path: &Path) -> Result<Self> {
        let mut map = ConfigMap::defaults();
        map.apply_text(text, path)?;
        Self::from_map(&map)
    }

    pub fn panorama_scale(&self) -> f64 {
        self.panorama.scale.unwrap_or_else(|| {
            tunnelstitch_core::stitch::PanoramaSpec::default_scale(self.panorama.width, self.cylinder.radius())
        })
    }

    /// Luminance of the two tile colors.
    pub fn tile_luminances(&self) -> (f64, f64) {
        use tunnelstitch_core::image::luminance;
        (luminance(self.texture.primary), luminance(self.texture.secondary))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        let fig5 = ExperimentConfig::preset("fig5").unwrap();
        assert_eq!(fig5.trajectory.n_frames, 12);
        assert_eq!(fig5.trajectory.yaw_step, 30f64.to_radians());
        assert_eq!(
            (fig5.camera.f, fig5.camera.cx, fig5.camera.cy),
            (320.000_000_000_000_06, 320.0, 240.0)
        );
        let fig7 = ExperimentConfig::preset("fig7").unwrap();
        assert_eq!(fig7.trajectory.initial_t, Vec3::new(0.5, 0.0, 0.5));
        assert_eq!(fig7.render.supersampling(), 3);
        let fig8 = ExperimentConfig::preset("fig8").unwrap();
        assert_eq!(fig8.trajectory.mode, TrajectoryMode::Spiral);
        assert_eq!(fig8.trajectory.n_frames, 120);
        assert_eq!(fig8.trajectory.yaw_step, 0.524);
        assert_eq!(fig8.trajectory.noise_std_translation, Vec3::new(0.02, 0.02, 0.03));
        assert_eq!(fig8.trajectory.noise_std_rotation, 2f64.to_radians());
        assert!(ExperimentConfig::preset("fig6").is_err());
    }

    #[test]
    fn snapshot_round_trips_losslessly() {
        for p in PRESETS {
            let mut cfg = ExperimentConfig::preset(p).unwrap();
            cfg.panorama.band = Some((-1.25, 2.0 / 3.0));
            cfg.texture.fault_marks.push(FaultMark {
                theta: 0.1,
                y: 0.3,
                radius_m: 0.05,
                color: [0.9, 0.1, 0.1],
            });
            let text = cfg.to_text();
            assert_eq!(
                ExperimentConfig::parse_text(&text, Path::new("snap")).unwrap(),
                cfg,
                "{p}"
            );
        }
    }

    #[test]
    fn overrides_replace_aliases() {
        let cfg = ExperimentConfig::load(
            Some("fig5"),
            None,
            &[
                "trajectory.yaw_step_rad=0.5".into(),
                "camera.f=400".into(),
                "stitch.mode=egocentric".into(),
                "render.supersampling=1".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.render.supersampling(), 1);
        assert_eq!(cfg.trajectory.yaw_step, 0.5);
        assert_eq!(cfg.camera.f, 400.0);
        assert_eq!(cfg.stitch.mode, StitchMode::Egocentric);
    }

    #[test]
    fn bad_input_is_reported() {
        let err = |o: &str| {
            ExperimentConfig::load(None, None, &[o.to_string()])
                .unwrap_err()
                .to_string()
        };
        assert!(err("camera.widht=3").contains("unknown key camera.widht"));
        assert!(err("cylinder.radius=-1").contains("cylinder.radius"));
        assert!(err("texture.primary=1,2").contains("texture.primary"));
        assert!(err("stitch.mode=sideways").contains("stitch.mode"));
        assert!(err("panorama.y_min=0").contains("y_max"));
        assert!(err("noequals").contains("key=value"));
        assert!(err("render.supersampling=0").contains("render"));
        let e = ExperimentConfig::parse_text("seed=1\nbroken\n", Path::new("c.txt")).unwrap_err();
        assert!(e.to_string().starts_with("c.txt:2:"), "{e}");
    }
}
