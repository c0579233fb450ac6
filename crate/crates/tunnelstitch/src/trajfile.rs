//! Trajectory text files.
//!
//! ```text
//! tunnelstitch-trajectory v1
//! # k r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz [| planned pose]
//! 0 1 0 0 0 1 0 0 0 1 0 0 0 | 1 0 0 0 1 0 0 0 1 0 0 0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use tunnelstitch_core::trajectory::FramePose;
use tunnelstitch_core::{Mat3, Pose, Vec3};

use crate::error::{Error, Result};
use crate::imageio::{read_bytes, write_bytes};

pub const HEADER: &str = "tunnelstitch-trajectory v1";

fn push_pose(out: &mut String, p: &Pose) {
    let r = p.rotation();
    for i in 0..3 {
        for j in 0..3 {
            let _ = write!(out, " {}", r[(i, j)]);
        }
    }
    let t = p.translation();
    let _ = write!(out, " {} {} {}", t.x, t.y, t.z);
}

pub fn format_trajectory(frames: &[FramePose]) -> String {
    let mut out = format!("{HEADER}\n# k r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz | planned pose\n");
    for f in frames {
        let _ = write!(out, "{}", f.index);
        push_pose(&mut out, &f.pose);
        out.push_str(" |");
        push_pose(&mut out, &f.planned_pose);
        out.push('\n');
    }
    out
}

fn parse_pose(fields: &[&str]) -> std::result::Result<Pose, String> {
    if fields.len() != 12 {
        return Err(format!("expected 12 pose numbers, found {}", fields.len()));
    }
    let mut v = [0.0; 12];
    for (x, s) in v.iter_mut().zip(fields) {
        *x = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    }
    let r = Mat3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
    Pose::new(r, Vec3::new(v[9], v[10], v[11])).map_err(|e| e.to_string())
}

/// `path` is used for error messages only.
pub fn parse_trajectory(text: &str, path: &Path) -> Result<Vec<FramePose>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        _ => return Err(Error::parse(path, 1, format!("expected header {HEADER:?}"))),
    }
    let mut frames: Vec<FramePose> = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::parse(path, i + 1, m);
        let (measured, planned) = match line.split_once('|') {
            Some((a, b)) => (a, Some(b)),
            None => (line, None),
        };
        let fields: Vec<&str> = measured.split_whitespace().collect();
        if fields.is_empty() {
            return Err(err("missing frame index".into()));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame index {:?}", fields[0])))?;
        if frames.iter().any(|f| f.index == index) {
            return Err(err(format!("duplicate frame index {index}")));
        }
        let pose = parse_pose(&fields[1..]).map_err(err)?;
        let planned_pose = match planned {
            Some(p) => parse_pose(&p.split_whitespace().collect::<Vec<_>>()).map_err(err)?,
            None => pose,
        };
        frames.push(FramePose {
            index,
            pose,
            planned_pose,
        });
    }
    Ok(frames)
}

pub fn write_trajectory(path: &Path, frames: &[FramePose]) -> Result<()> {
    write_bytes(path, format_trajectory(frames).as_bytes())
}

pub fn read_trajectory(path: &Path) -> Result<Vec<FramePose>> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::format(path, "not UTF-8"))?;
    parse_trajectory(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tunnelstitch_core::trajectory::{generate, TrajectoryConfig, TrajectoryMode};

    fn spiral() -> Vec<FramePose> {
        let cfg = TrajectoryConfig {
            mode: TrajectoryMode::Spiral,
            n_frames: 7,
            yaw_step: 0.524,
            translation_step: Vec3::new(0.0, 0.1, 0.0),
            initial_t: Vec3::zeros(),
            noise_std_translation: Vec3::new(0.02, 0.02, 0.03),
            noise_std_rotation: 2f64.to_radians(),
            seed: 9,
        };
        generate(&cfg, None).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let frames = spiral();
        let text = format_trajectory(&frames);
        assert!(text.starts_with(HEADER));
        assert_eq!(parse_trajectory(&text, Path::new("t")).unwrap(), frames);
    }

    #[test]
    fn planned_pose_defaults_to_measured() {
        let text = format!("{HEADER}\n# comment\n\n3 1 0 0 0 1 0 0 0 1 0.5 0 0.5\n");
        let f = parse_trajectory(&text, Path::new("t")).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].index, 3);
        assert_eq!(f[0].pose, f[0].planned_pose);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = |body: &str| {
            parse_trajectory(&format!("{HEADER}\n{body}"), Path::new("t"))
                .unwrap_err()
                .to_string()
        };
        assert!(bad("0 1 0 0 0 1 0 0 0 1 0 0\n").starts_with("t:2:"));
        assert!(bad("# c\n0 1 0 0 0 1 0 0 0 1 0 0 x\n").starts_with("t:3:"));
        // Not a rotation.
        assert!(bad("0 2 0 0 0 1 0 0 0 1 0 0 0\n").contains("orthonormal"));
        assert!(bad("0 1 0 0 0 1 0 0 0 1 0 0 0\n0 1 0 0 0 1 0 0 0 1 0 0 0\n").contains("duplicate"));
        assert!(parse_trajectory("0 1 0\n", Path::new("t"))
            .unwrap_err()
            .to_string()
            .starts_with("t:1:"));
    }
}
