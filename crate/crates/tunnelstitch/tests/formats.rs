use std::path::Path;

use nalgebra::Rotation3;
use proptest::prelude::*;
use tunnelstitch::imageio::{decode_ppm, encode_ppm, quantize};
use tunnelstitch::trajfile::{format_trajectory, parse_trajectory};
use tunnelstitch_core::trajectory::FramePose;
use tunnelstitch_core::{Image, Pose, Vec3};

prop_compose! {
    fn pose()(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64,
              t in prop::array::uniform3(-1e3..1e3f64)) -> Pose {
        Pose::new(Rotation3::from_euler_angles(a, b, c).into_inner(), Vec3::from(t)).unwrap()
    }
}

proptest! {
    #[test]
    fn trajectory_text_is_lossless(poses in prop::collection::vec((pose(), pose()), 1..20)) {
        let frames: Vec<FramePose> = poses
            .into_iter()
            .enumerate()
            .map(|(index, (pose, planned_pose))| FramePose { index, pose, planned_pose })
            .collect();
        let back = parse_trajectory(&format_trajectory(&frames), Path::new("t")).unwrap();
        prop_assert_eq!(back, frames);
    }

    #[test]
    fn ppm_keeps_quantized_values(w in 1u32..24, h in 1u32..24, seed in any::<u32>()) {
        let mut img = Image::new(w, h);
        for (i, p) in img.pixels_mut().iter_mut().enumerate() {
            let x = (i as u32).wrapping_mul(2_654_435_761).wrapping_add(seed);
            *p = [(x & 255) as f32 / 255.0, ((x >> 8) & 255) as f32 / 255.0, ((x >> 16) & 255) as f32 / 255.0];
        }
        let back = decode_ppm(&encode_ppm(&img)).unwrap();
        prop_assert_eq!((back.width(), back.height()), (w, h));
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            prop_assert_eq!(a.map(quantize), b.map(quantize));
        }
    }
}
