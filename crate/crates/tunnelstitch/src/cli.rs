//! `tunnelstitch simulate|stitch|eval|export-mesh`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::imageio::{read_image, write_bytes};
use crate::pipeline::{
    evaluate, export_mesh, read_dataset, read_dataset_config, read_panorama, simulate, stitch_dataset, write_dataset,
    write_panorama, CONFIG_FILE,
};

#[derive(Debug, Parser)]
#[command(
    name = "tunnelstitch",
    version,
    about = "Pose-driven cylindrical panoramas of tunnel walls"
)]
pub struct Cli {
    /// Default location for datasets, panoramas and meshes.
    #[arg(long, global = true, env = "TUNNELSTITCH_OUT", default_value = "tunnelstitch-out")]
    pub root: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ConfigArgs {
    /// Config file of key=value lines.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Built-in experiment: fig5, fig7 or fig8.
    #[arg(long)]
    pub preset: Option<String>,

    /// Settings applied last, e.g. `stitch.mode=egocentric`.
    #[arg(value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic dataset: frames, trajectory and config snapshot.
    Simulate {
        /// Dataset directory [default: ROOT/dataset].
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Stitch a dataset into a panorama.
    Stitch {
        /// Dataset directory [default: ROOT/dataset].
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Panorama image, .ppm or .png [default: ROOT/panorama_MODE.ppm].
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Score a panorama against the oracle rendering or another panorama.
    Eval {
        #[arg(long)]
        panorama: PathBuf,
        /// Compare against this image instead of the oracle.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Dataset whose config snapshot describes the scene [default: ROOT/dataset].
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Report file [default: PANORAMA_report.txt].
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Write an OBJ/MTL/PNG tunnel mesh textured with a panorama.
    ExportMesh {
        #[arg(long)]
        panorama: PathBuf,
        /// Centerline file, one `x y z` per line.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Output prefix [default: ROOT/tunnel].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// Explicit config or preset if given, else the dataset snapshot if present,
/// else defaults; overrides go on top.
fn resolve_config(args: &ConfigArgs, dataset: Option<&Path>) -> Result<ExperimentConfig> {
    let explicit = args.config.is_some() || args.preset.is_some();
    let snapshot = dataset.map(|d| d.join(CONFIG_FILE)).filter(|p| p.is_file());
    match snapshot {
        Some(path) if !explicit => {
            let mut cfg = read_dataset_config(path.parent().expect("joined path"))?;
            if !args.overrides.is_empty() {
                let mut map = crate::config::ConfigMap::defaults();
                map.apply_text(&cfg.to_text(), &path)?;
                for o in &args.overrides {
                    map.apply_override(o)?;
                }
                cfg = ExperimentConfig::from_map(&map)?;
            }
            Ok(cfg)
        }
        _ => ExperimentConfig::load(args.preset.as_deref(), args.config.as_deref(), &args.overrides),
    }
}

fn root_for(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| cli.root.clone())
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(d) => std::fs::create_dir_all(d).map_err(|e| crate::Error::io(d, e)),
        None => Ok(()),
    }
}

/// Run one command and return what it prints on success.
pub fn run(cli: &Cli) -> Result<String> {
    let mut out = String::new();
    match &cli.command {
        Command::Simulate { out: dir, cfg } => {
            let cfg = resolve_config(cfg, None)?;
            let dir = dir.clone().unwrap_or_else(|| root_for(cli, &cfg).join("dataset"));
            let ds = simulate(&cfg)?;
            write_dataset(&ds, &dir)?;
            let _ = writeln!(out, "wrote {} frames to {}", ds.frames.len(), dir.display());
        }
        Command::Stitch {
            dataset,
            out: image,
            cfg,
        } => {
            let dir = dataset.clone().unwrap_or_else(|| cli.root.join("dataset"));
            let cfg = resolve_config(cfg, Some(&dir))?;
            let ds = read_dataset(&dir, cfg.clone())?;
            let res = stitch_dataset(&ds)?;
            let image = match image {
                Some(p) => p.clone(),
                None => {
                    let p = root_for(cli, &cfg).join(format!("panorama_{}.ppm", res.mode.as_str()));
                    ensure_parent(&p)?;
                    p
                }
            };
            let files = write_panorama(&res, &cfg, &image)?;
            let _ = writeln!(
                out,
                "wrote {} ({} mode, {}x{}, coverage {:.4}%)",
                files.image.display(),
                res.mode.as_str(),
                res.panorama.spec.width(),
                res.panorama.spec.rows(),
                100.0 * res.panorama.coverage_fraction()
            );
        }
        Command::Eval {
            panorama,
            reference,
            dataset,
            report,
            cfg,
        } => {
            let dir = dataset.clone().unwrap_or_else(|| cli.root.join("dataset"));
            let cfg = resolve_config(cfg, Some(&dir))?;
            let pano = read_panorama(panorama)?;
            let reference = reference.as_deref().map(read_image).transpose()?;
            let rep = evaluate(&cfg, &pano, reference.as_ref())?;
            let report = report.clone().unwrap_or_else(|| {
                let stem = panorama.file_stem().unwrap_or_default().to_string_lossy();
                panorama.with_file_name(format!("{stem}_report.txt"))
            });
            write_bytes(&report, rep.to_kv().as_bytes())?;
            out.push_str(&rep.to_human());
            let _ = writeln!(out, "report: {}", report.display());
        }
        Command::ExportMesh {
            panorama,
            curve,
            out: prefix,
            dataset,
            cfg,
        } => {
            let dir = dataset.clone().unwrap_or_else(|| cli.root.join("dataset"));
            let mut cfg = resolve_config(cfg, Some(&dir))?;
            if curve.is_some() {
                cfg.mesh.curve = curve.clone();
            }
            let pano = read_panorama(panorama)?;
            let prefix = match prefix {
                Some(p) => p.clone(),
                None => {
                    let p = root_for(cli, &cfg).join("tunnel");
                    ensure_parent(&p)?;
                    p
                }
            };
            let files = export_mesh(&cfg, &pano, &prefix)?;
            for p in [&files.obj, &files.mtl, &files.texture] {
                let _ = writeln!(out, "wrote {}", p.display());
            }
        }
    }
    Ok(out)
}
