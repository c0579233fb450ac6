//! Camera paths through the tunnel.
//!
//! Frame `k` of a spiral is planned at yaw `k · yaw_step` and position
//! `initial_t + k · translation_step`. The measured pose adds independent
//! zero-mean Gaussian jitter per frame: per-axis translation noise, and small
//! rotations about body x, then y, then z composed onto the planned rotation.
//! All noise comes from a counter-based generator keyed by
//! `(seed, frame, channel)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{rot_x, rot_y, rot_z, CylinderModel, Pose, Vec3};
use crate::math;
use crate::rng::CounterRng;

/// Noise channel ids for the counter-based generator.
pub mod channel {
    pub const TX: u64 = 0;
    pub const TY: u64 = 1;
    pub const TZ: u64 = 2;
    pub const RX: u64 = 3;
    pub const RY: u64 = 4;
    pub const RZ: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMode {
    Stationary,
    Spiral,
}

impl TrajectoryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryMode::Stationary => "stationary",
            TrajectoryMode::Spiral => "spiral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stationary" => Some(TrajectoryMode::Stationary),
            "spiral" => Some(TrajectoryMode::Spiral),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub mode: TrajectoryMode,
    pub n_frames: usize,
    /// Radians per frame about world y.
    pub yaw_step: f64,
    /// Meters per frame.
    pub translation_step: Vec3,
    pub initial_t: Vec3,
    /// Per-axis translation standard deviation, meters.
    pub noise_std_translation: Vec3,
    /// Per-axis rotation standard deviation, radians.
    pub noise_std_rotation: f64,
    pub seed: u64,
}

impl TrajectoryConfig {
    /// Noise-free rotation about a fixed point.
    pub fn stationary(yaw_step: f64, n_frames: usize, position: Vec3) -> Self {
        Self {
            mode: TrajectoryMode::Stationary,
            n_frames,
            yaw_step,
            translation_step: Vec3::zeros(),
            initial_t: position,
            noise_std_translation: Vec3::zeros(),
            noise_std_rotation: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::InvalidTrajectory("n_frames must be at least 1"));
        }
        let finite = |v: &Vec3| v.iter().all(|x| x.is_finite());
        if !(self.yaw_step.is_finite() && finite(&self.translation_step) && finite(&self.initial_t)) {
            return Err(Error::InvalidTrajectory("non-finite step or start"));
        }
        if !self.noise_std_translation.iter().all(|s| *s >= 0.0 && s.is_finite())
            || !(self.noise_std_rotation >= 0.0 && self.noise_std_rotation.is_finite())
        {
            return Err(Error::InvalidTrajectory("noise standard deviations must be >= 0"));
        }
        Ok(())
    }
}

/// Frames needed to complete `rotations` full turns at `yaw_step` per frame.
pub fn frames_for_rotations(yaw_step: f64, rotations: f64) -> usize {
    math::ceil(rotations * math::TAU / math::abs(yaw_step)) as usize
}

/// Measured and planned pose of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePose {
    pub index: usize,
    pub pose: Pose,
    pub planned_pose: Pose,
}

/// `R_y(k · yaw_step)`, with the angle reduced to `[0, 2π)` first.
pub fn planned_yaw(yaw_step: f64, k: usize) -> f64 {
    math::wrap_angle(k as f64 * yaw_step)
}

/// Frame `k` of a pure rotation about the tunnel axis.
pub fn generate_stationary(yaw_step: f64, n: usize) -> Result<Vec<FramePose>> {
    if n == 0 {
        return Err(Error::InvalidTrajectory("n_frames must be at least 1"));
    }
    Ok((0..n)
        .map(|k| {
            let pose = Pose::from_yaw(planned_yaw(yaw_step, k), Vec3::zeros());
            FramePose {
                index: k,
                pose,
                planned_pose: pose,
            }
        })
        .collect())
}

fn planned_pose(cfg: &TrajectoryConfig, k: usize) -> Pose {
    Pose::from_yaw(
        planned_yaw(cfg.yaw_step, k),
        cfg.initial_t + cfg.translation_step * k as f64,
    )
}

fn jittered_pose(cfg: &TrajectoryConfig, rng: &CounterRng, k: usize, planned: &Pose) -> Result<Pose> {
    let f = k as u64;
    let sd = &cfg.noise_std_translation;
    let dt = Vec3::new(
        rng.normal(f, channel::TX, sd.x),
        rng.normal(f, channel::TY, sd.y),
        rng.normal(f, channel::TZ, sd.z),
    );
    let s = cfg.noise_std_rotation;
    let (ex, ey, ez) = (
        rng.normal(f, channel::RX, s),
        rng.normal(f, channel::RY, s),
        rng.normal(f, channel::RZ, s),
    );
    if dt == Vec3::zeros() && ex == 0.0 && ey == 0.0 && ez == 0.0 {
        return Ok(*planned);
    }
    // Body-frame jitter: x first, then y, then z.
    let noise = rot_z(ez) * rot_y(ey) * rot_x(ex);
    Pose::new(planned.rotation() * noise, planned.translation() + dt)
}

/// Spiral (or, with zero steps, stationary) trajectory with optional jitter.
///
/// When `cylinder` is given, every measured pose must stay strictly inside
/// it; otherwise the offending frame indices are reported.
pub fn generate_spiral(cfg: &TrajectoryConfig, cylinder: Option<&CylinderModel>) -> Result<Vec<FramePose>> {
    cfg.validate()?;
    let rng = CounterRng::new(cfg.seed);
    let mut frames = Vec::with_capacity(cfg.n_frames);
    for k in 0..cfg.n_frames {
        let planned = planned_pose(cfg, k);
        let pose = jittered_pose(cfg, &rng, k, &planned)?;
        frames.push(FramePose {
            index: k,
            pose,
            planned_pose: planned,
        });
    }
    if let Some(cyl) = cylinder {
        let outside: Vec<usize> = frames
            .iter()
            .filter(|f| !cyl.contains(&f.pose) || !cyl.contains(&f.planned_pose))
            .map(|f| f.index)
            .collect();
        if !outside.is_empty() {
            return Err(Error::FramesOutsideCylinder { frames: outside });
        }
    }
    Ok(frames)
}

/// Dispatch on `cfg.mode`. Stationary ignores translation step and noise.
pub fn generate(cfg: &TrajectoryConfig, cylinder: Option<&CylinderModel>) -> Result<Vec<FramePose>> {
    match cfg.mode {
        TrajectoryMode::Stationary => {
            cfg.validate()?;
            let frames: Vec<FramePose> = (0..cfg.n_frames)
                .map(|k| {
                    let pose = Pose::from_yaw(planned_yaw(cfg.yaw_step, k), cfg.initial_t);
                    FramePose {
                        index: k,
                        pose,
                        planned_pose: pose,
                    }
                })
                .collect();
            if let Some(cyl) = cylinder {
                if !cyl.contains(&frames[0].pose) {
                    return Err(Error::FramesOutsideCylinder {
                        frames: frames.iter().map(|f| f.index).collect(),
                    });
                }
            }
            Ok(frames)
        }
        TrajectoryMode::Spiral => generate_spiral(cfg, cylinder),
    }
}
